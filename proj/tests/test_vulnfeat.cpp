#include "doctest.h"
#include "ee/corpus.hpp"
#include "ee/vulnfeat.hpp"

using namespace ee;

namespace {

VulnRecord sample_vuln() {
    VulnRecord v;
    v.id = "CVE-X";
    CvssComponents v3;
    v3.metrics = {{"AV", "N"}, {"AC", "L"}, {"PR", "N"}};
    v3.base_score = 9.8;
    v.cvss_v3 = v3;
    CvssComponents v2;
    v2.metrics = {{"AV", "N"}, {"Au", "N"}};
    v.cvss_v2 = v2;
    v.cvss_published = Date::parse("2019-03-01");
    v.nvd_published = Date::parse("2019-02-10");
    v.cwe_ids = {"CWE-79", "CWE-999"};
    v.products = {"windows", "obscureproduct"};
    return v;
}

StructuredWhitelists sample_whitelists() {
    StructuredWhitelists wl;
    wl.products = {"linux", "windows"};
    wl.cwes = {"CWE-79"};
    return wl;
}

}  // namespace

TEST_CASE("one-hot CVSS components appear once published") {
    VulnRecord v = sample_vuln();
    auto wl = sample_whitelists();
    SparseVector late = encode_structured(v, wl, Date::parse("2019-06-01"));
    CHECK(late.get("cvss:v3:AV=N") == 1.0);
    CHECK(late.get("cvss:v3:AC=L") == 1.0);
    CHECK(late.get("cvss:v2:Au=N") == 1.0);

    // Snapshot before the CVSS publication: no cvss features at all.
    SparseVector early = encode_structured(v, wl, Date::parse("2019-02-20"));
    for (const auto& [id, _] : early) CHECK(id.rfind("cvss:", 0) != 0);
    // CWE and product features are NVD-gated and already visible.
    CHECK(early.get("cwe:CWE-79") == 1.0);
    CHECK(early.get("cpe:windows") == 1.0);
}

TEST_CASE("whitelists filter products and CWEs") {
    VulnRecord v = sample_vuln();
    auto wl = sample_whitelists();
    SparseVector out = encode_structured(v, wl, Date::parse("2020-01-01"));
    CHECK(out.get("cpe:windows") == 1.0);
    CHECK_FALSE(out.has("cpe:obscureproduct"));
    CHECK(out.get("cwe:CWE-79") == 1.0);
    CHECK_FALSE(out.has("cwe:CWE-999"));
}

TEST_CASE("time gating is monotone: features only accumulate") {
    VulnRecord v = sample_vuln();
    auto wl = sample_whitelists();
    Date dates[] = {Date::parse("2019-01-01"), Date::parse("2019-02-15"),
                    Date::parse("2019-03-15"), Date::parse("2020-01-01")};
    SparseVector prev;
    for (Date z : dates) {
        SparseVector cur = encode_structured(v, wl, z);
        for (const auto& [id, _] : prev) CHECK(cur.has(id));
        prev = cur;
    }
}

TEST_CASE("absent records produce absent features, not zeros") {
    VulnRecord v;
    v.id = "CVE-BARE";
    auto wl = sample_whitelists();
    SparseVector out = encode_structured(v, wl, Date::parse("2020-01-01"));
    CHECK(out.empty());
}

TEST_CASE("at most one active value per CVSS metric") {
    VulnRecord v = sample_vuln();
    auto wl = sample_whitelists();
    SparseVector out = encode_structured(v, wl, Date::parse("2020-01-01"));
    int av_count = 0;
    for (const auto& [id, _] : out) {
        if (id.rfind("cvss:v3:AV=", 0) == 0) ++av_count;
    }
    CHECK(av_count == 1);
}

TEST_CASE("whitelist learning: top-K products, CWE floor of 5") {
    CorpusStore store;
    IngestStats stats;
    for (int i = 0; i < 12; ++i) {
        std::string products = i < 8 ? R"(["windows","rare])" + std::to_string(i) + R"("])"
                                     : R"(["linux"])";
        std::string cwes = i < 5 ? R"(["CWE-79"])" : R"(["CWE-89"])";
        store.ingest_line(R"({"id":"CVE-)" + std::to_string(i) + R"(","description":"d",)" +
                              R"("products":)" + products + R"(,"cwe_ids":)" + cwes + "}",
                          RecordSchema::vulns, stats);
    }
    REQUIRE(stats.skipped == 0);
    auto wl = build_whitelists(store, store.vuln_ids(), /*top_k_products=*/2,
                               /*min_cwe_count=*/5);
    REQUIRE(wl.products.size() == 2);
    CHECK(std::find(wl.products.begin(), wl.products.end(), "windows") != wl.products.end());
    CHECK(std::find(wl.products.begin(), wl.products.end(), "linux") != wl.products.end());
    REQUIRE(wl.cwes.size() == 2);  // CWE-79 x5, CWE-89 x7

    auto wl_strict = build_whitelists(store, store.vuln_ids(), 2, 6);
    REQUIRE(wl_strict.cwes.size() == 1);
    CHECK(wl_strict.cwes[0] == "CWE-89");
}

TEST_CASE("whitelists serialize round-trip") {
    auto wl = sample_whitelists();
    auto back = StructuredWhitelists::from_json(wl.to_json());
    CHECK(back.products == wl.products);
    CHECK(back.cwes == wl.cwes);
}

TEST_CASE("encoding is stable across calls") {
    VulnRecord v = sample_vuln();
    auto wl = sample_whitelists();
    SparseVector a = encode_structured(v, wl, Date::parse("2020-01-01"));
    SparseVector b = encode_structured(v, wl, Date::parse("2020-01-01"));
    CHECK(a.entries() == b.entries());
}
