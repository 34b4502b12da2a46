#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ee/corpus.hpp"

namespace ee {

// Synthetic corpus generator with known ground truth. Artifact delays follow
// the shapes seen in the wild: write-ups at disclosure, PoCs within days,
// NVD and CVSS trailing behind.
struct SynthConfig {
    std::size_t n_vulns = 200;
    double exploit_base_rate = 0.3;
    std::string start_date = "2014-01-01";
    int span_days = 1200;

    // Indicator tokens planted in prose and PoC comments.
    std::vector<std::string> positive_tokens = {"weaponized", "shellcode", "privesc",
                                                "heapspray", "ropchain"};
    double positive_token_rate = 0.9;   // per token, for exploited vulnerabilities
    double negative_token_rate = 0.05;  // per token, for the rest
    double day0_signal_fraction = 0.6;  // disclosure-day write-up carries weaker signal

    // Extra nested control blocks in exploited PoCs.
    int code_effect_size = 3;

    int writeup_delay_max = 10;
    int poc_delay_max = 10;
    int nvd_delay_max = 15;
    int cvss_delay_min = 5;
    int cvss_delay_max = 40;
    int evidence_delay_min = 5;
    int evidence_delay_max = 300;
    double prose_poc_rate = 0.2;      // PoCs that are prose-only
    double extension_rate = 0.7;      // PoCs carrying a file extension
    double undated_evidence_rate = 0.0;

    // Feature-dependent noise planting: a CWE-like tag, optionally with the
    // exploit evidence of tagged positives suppressed in the emitted corpus.
    std::string noise_tag = "CWE-9899";
    double noise_tag_rate_pos = 0.0;
    double noise_tag_rate_neg = 0.0;
    bool suppress_tagged_evidence = false;

    std::uint64_t seed = 1;

    std::string to_json() const;
    static SynthConfig from_json(const std::string& text);
};

struct SynthResult {
    std::string vulns_jsonl;
    std::string artifacts_jsonl;
    std::string evidence_jsonl;
    std::string trace_json;
    CorpusStore store;                      // the same data, ingested
    std::map<std::string, int> true_labels;  // before any evidence suppression
};

// Deterministic per seed: identical config gives byte-identical output.
// Degenerate rates (0 or 1) generate with a warning in the trace.
SynthResult generate(const SynthConfig& config);

// Writes vulns.jsonl, artifacts.jsonl, evidence.jsonl and trace.json.
SynthResult generate_files(const SynthConfig& config, const std::string& out_dir);

}  // namespace ee
