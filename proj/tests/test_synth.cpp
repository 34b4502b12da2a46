#include <cmath>

#include "doctest.h"
#include "ee/common.hpp"
#include "ee/synth.hpp"

using namespace ee;

TEST_CASE("generation is byte-identical per seed") {
    SynthConfig cfg;
    cfg.n_vulns = 60;
    cfg.seed = 17;
    auto a = generate(cfg);
    auto b = generate(cfg);
    CHECK(a.vulns_jsonl == b.vulns_jsonl);
    CHECK(a.artifacts_jsonl == b.artifacts_jsonl);
    CHECK(a.evidence_jsonl == b.evidence_jsonl);
    CHECK(a.trace_json == b.trace_json);

    cfg.seed = 18;
    auto c = generate(cfg);
    CHECK(a.vulns_jsonl != c.vulns_jsonl);
}

TEST_CASE("positive count stays within three sigma of the base rate") {
    SynthConfig cfg;
    cfg.n_vulns = 1000;
    cfg.exploit_base_rate = 0.3;
    cfg.seed = 5;
    auto r = generate(cfg);
    double positives = 0;
    for (const auto& [_, label] : r.true_labels) positives += label;
    double sigma = std::sqrt(1000 * 0.3 * 0.7);
    CHECK(std::abs(positives - 300.0) <= 3.0 * sigma);
}

TEST_CASE("generated corpus re-ingests with full referential integrity") {
    SynthConfig cfg;
    cfg.n_vulns = 80;
    cfg.seed = 9;
    auto r = generate(cfg);
    CHECK(r.store.vuln_count() == 80);
    CHECK(r.store.dangling_references().empty());
    for (const auto& id : r.store.vuln_ids()) {
        // Every vulnerability is datable: a write-up lands on day zero.
        CHECK_NOTHROW(r.store.estimate_disclosure(id));
    }
}

TEST_CASE("corpus labels match the generator's ground truth when not suppressed") {
    SynthConfig cfg;
    cfg.n_vulns = 120;
    cfg.seed = 21;
    cfg.evidence_delay_max = 300;  // comfortably inside the 365-day horizon
    auto r = generate(cfg);
    for (const auto& [id, truth] : r.true_labels) {
        CHECK(r.store.label(id) == truth);
    }
}

TEST_CASE("suppression hides evidence for tagged positives but keeps the trace truthful") {
    SynthConfig cfg;
    cfg.n_vulns = 300;
    cfg.seed = 33;
    cfg.noise_tag_rate_pos = 0.5;
    cfg.suppress_tagged_evidence = true;
    auto r = generate(cfg);
    std::size_t suppressed = 0;
    for (const auto& [id, truth] : r.true_labels) {
        int observed = r.store.label(id);
        if (truth == 1 && observed == 0) ++suppressed;
        CHECK(observed <= truth);  // suppression only hides positives
    }
    CHECK(suppressed > 0);
    CHECK(r.trace_json.find("\"suppressed\": true") != std::string::npos);
}

TEST_CASE("degenerate base rate still generates, with a warning in the trace") {
    SynthConfig cfg;
    cfg.n_vulns = 20;
    cfg.exploit_base_rate = 0.0;
    cfg.seed = 3;
    auto r = generate(cfg);
    CHECK(r.store.vuln_count() == 20);
    CHECK(r.trace_json.find("degenerate") != std::string::npos);
}

TEST_CASE("config floor is enforced") {
    SynthConfig cfg;
    cfg.n_vulns = 3;
    CHECK_THROWS_AS(generate(cfg), Error);
}

TEST_CASE("config serialization round-trips") {
    SynthConfig cfg;
    cfg.n_vulns = 45;
    cfg.noise_tag = "CWE-42";
    cfg.positive_tokens = {"alpha", "beta"};
    auto back = SynthConfig::from_json(cfg.to_json());
    CHECK(back.n_vulns == 45);
    CHECK(back.noise_tag == "CWE-42");
    CHECK(back.positive_tokens == cfg.positive_tokens);
}
