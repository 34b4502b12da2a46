#include <cmath>

#include "doctest.h"
#include "ee/common.hpp"
#include "ee/noise.hpp"

using namespace ee;

namespace {

SparseVector row_with(std::initializer_list<const char*> features) {
    SparseVector v;
    for (const char* f : features) v.set_flag(f);
    return v;
}

// 22 window instances carrying the feature, 21 exploited; plus background
// vulnerabilities outside the window.
CorpusStore prior_fixture(int with_feature, int exploited_among_them, const char* cwe) {
    CorpusStore store;
    IngestStats stats;
    auto add_vuln = [&](const std::string& id, const std::string& cwe_id,
                        const std::string& disclosed, bool exploit) {
        store.ingest_line(R"({"id":")" + id + R"(","description":"d","cwe_ids":[")" + cwe_id +
                              R"("],"nvd_published":")" + disclosed + R"("})",
                          RecordSchema::vulns, stats);
        if (exploit) {
            store.ingest_line(R"({"vuln_id":")" + id +
                                  R"(","source":"tenable","kind":"functional","date":")" +
                                  Date::parse(disclosed).plus_days(40).to_string() + R"("})",
                              RecordSchema::evidence, stats);
        }
    };
    for (int i = 0; i < with_feature; ++i) {
        // Disclosed inside [2016-01-01, 2016-06-29).
        add_vuln("CVE-W" + std::to_string(i), cwe, "2016-02-15", i < exploited_among_them);
    }
    // Same CWE but outside the window: must not affect the estimate.
    add_vuln("CVE-OUT1", cwe, "2015-06-01", true);
    add_vuln("CVE-OUT2", cwe, "2016-08-01", false);
    // Different CWE inside the window.
    add_vuln("CVE-OTHER", "CWE-1", "2016-02-20", true);
    REQUIRE(stats.skipped == 0);
    return store;
}

}  // namespace

TEST_CASE("injection flips exactly the feature-carrying positives") {
    std::vector<SparseVector> rows = {row_with({"cwe:CWE-79"}), row_with({"cwe:CWE-79"}),
                                      row_with({"cwe:CWE-1"}), row_with({})};
    std::vector<int> labels = {1, 0, 1, 1};
    std::vector<std::string> space = {"cwe:CWE-1", "cwe:CWE-79"};

    auto out = inject_feature_noise(labels, rows, "cwe:CWE-79", space);
    CHECK(out.labels == std::vector<int>{0, 0, 1, 1});
    CHECK(out.spec.flipped == 1);
    CHECK_FALSE(out.degenerate);
    // Never flips negatives, never leaves {0,1}.
    for (int l : out.labels) CHECK((l == 0 || l == 1));
}

TEST_CASE("feature carried by no row is a no-op; unknown feature is an error") {
    std::vector<SparseVector> rows = {row_with({"cwe:CWE-1"})};
    std::vector<int> labels = {1};
    std::vector<std::string> space = {"cwe:CWE-1", "cwe:CWE-79"};

    auto out = inject_feature_noise(labels, rows, "cwe:CWE-79", space);
    CHECK(out.labels == labels);
    CHECK(out.spec.flipped == 0);
    CHECK(out.spec.fraction_of_resulting_negatives == 0.0);

    CHECK_THROWS_AS(inject_feature_noise(labels, rows, "cwe:CWE-404", space), Error);
}

TEST_CASE("flipping every positive is degenerate but legal") {
    std::vector<SparseVector> rows = {row_with({"f"}), row_with({"f"})};
    std::vector<int> labels = {1, 1};
    auto out = inject_feature_noise(labels, rows, "f", {"f"});
    CHECK(out.labels == std::vector<int>{0, 0});
    CHECK(out.degenerate);
}

TEST_CASE("both noise-fraction conventions are reported") {
    // 10 of 50 positives carry f; 100 negatives.
    std::vector<SparseVector> rows;
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) {
        rows.push_back(i < 10 ? row_with({"f"}) : row_with({}));
        labels.push_back(1);
    }
    for (int i = 0; i < 100; ++i) {
        rows.push_back(row_with({}));
        labels.push_back(0);
    }
    auto out = inject_feature_noise(labels, rows, "f", {"f"});
    CHECK(out.spec.flipped == 10);
    CHECK(out.spec.fraction_of_resulting_negatives == doctest::Approx(10.0 / 110.0));
    CHECK(out.spec.fraction_of_original_negatives == doctest::Approx(10.0 / 100.0));
}

TEST_CASE("prior estimation reproduces the reference rows") {
    SUBCASE("22 instances, 21 exploited: 0.95 within 0.005") {
        CorpusStore store = prior_fixture(22, 21, "CWE-89");
        auto est = estimate_feature_prior(store, "cwe:CWE-89", Date::parse("2016-01-01"),
                                          Date::parse("2016-06-29"),
                                          structured_feature_test(store, "cwe:CWE-89"));
        CHECK(est.n_instances == 22);
        CHECK(std::abs(est.prior - 0.95) <= 0.005);
    }
    SUBCASE("4 instances, 2 exploited: exactly 0.50") {
        CorpusStore store = prior_fixture(4, 2, "CWE-77");
        auto est = estimate_feature_prior(store, "cwe:CWE-77", Date::parse("2016-01-01"),
                                          Date::parse("2016-06-29"),
                                          structured_feature_test(store, "cwe:CWE-77"));
        CHECK(est.n_instances == 4);
        CHECK(est.prior == 0.5);
    }
    SUBCASE("all unexploited window instances: 0.0") {
        CorpusStore store = prior_fixture(6, 0, "CWE-22");
        auto est = estimate_feature_prior(store, "cwe:CWE-22", Date::parse("2016-01-01"),
                                          Date::parse("2016-06-29"),
                                          structured_feature_test(store, "cwe:CWE-22"));
        CHECK(est.prior == 0.0);
    }
    SUBCASE("empty window is an error") {
        CorpusStore store = prior_fixture(4, 2, "CWE-77");
        CHECK_THROWS_AS(estimate_feature_prior(store, "cwe:CWE-77", Date::parse("2026-01-01"),
                                               Date::parse("2026-06-29"),
                                               structured_feature_test(store, "cwe:CWE-77")),
                        Error);
    }
}

TEST_CASE("structured membership test covers cwe: and cpe: namespaces") {
    CorpusStore store;
    IngestStats stats;
    store.ingest_line(
        R"({"id":"CVE-1","description":"d","cwe_ids":["CWE-79"],"products":["linux"]})",
        RecordSchema::vulns, stats);
    CHECK(structured_feature_test(store, "cwe:CWE-79")("CVE-1"));
    CHECK_FALSE(structured_feature_test(store, "cwe:CWE-89")("CVE-1"));
    CHECK(structured_feature_test(store, "cpe:linux")("CVE-1"));
    CHECK_FALSE(structured_feature_test(store, "cpe:windows")("CVE-1"));
    CHECK_THROWS_AS(structured_feature_test(store, "writeup:token"), Error);
}

TEST_CASE("chi-squared: exact independence is never rejected") {
    // Equal exploitation share with and without the feature.
    std::size_t table[2][2] = {{30, 30}, {20, 20}};
    auto r = chi2_from_table(table);
    CHECK(r.outcome == Chi2Outcome::tested);
    CHECK(r.statistic == doctest::Approx(0.0));
    CHECK_FALSE(r.reject);
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("chi-squared: perfect association on the 50/50 table") {
    std::size_t table[2][2] = {{50, 0}, {0, 50}};
    auto r = chi2_from_table(table);
    CHECK(r.statistic == doctest::Approx(100.0));
    CHECK(r.p_value < 1e-12);
    CHECK(r.reject);
}

TEST_CASE("chi-squared: statistic is symmetric under transposition") {
    std::size_t table[2][2] = {{37, 12}, {9, 41}};
    std::size_t transposed[2][2] = {{37, 9}, {12, 41}};
    auto a = chi2_from_table(table);
    auto b = chi2_from_table(transposed);
    CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-12));
    CHECK(a.p_value == doctest::Approx(b.p_value).epsilon(1e-12));
}

TEST_CASE("chi-squared: degenerate marginals are untestable") {
    std::size_t table[2][2] = {{50, 30}, {0, 0}};
    auto r = chi2_from_table(table);
    CHECK(r.outcome == Chi2Outcome::untestable);
}

TEST_CASE("Bonferroni correction tightens the rejection threshold") {
    // A table with p just under 0.01.
    std::size_t table[2][2] = {{60, 40}, {40, 60}};
    auto single = chi2_from_table(table, 1, 0.01);
    REQUIRE(single.outcome == Chi2Outcome::tested);
    CHECK(single.p_value < 0.01);
    CHECK(single.reject);
    auto corrected = chi2_from_table(table, 100, 0.01);
    CHECK_FALSE(corrected.reject);
}

TEST_CASE("Yates correction reduces the statistic") {
    std::size_t table[2][2] = {{12, 5}, {6, 14}};
    auto plain = chi2_from_table(table, 1, 0.01, false);
    auto yates = chi2_from_table(table, 1, 0.01, true);
    CHECK(yates.statistic < plain.statistic);
}

TEST_CASE("chi2_independence builds the table from the corpus") {
    CorpusStore store;
    IngestStats stats;
    // Feature cwe:CWE-79 perfectly predicts evidence in source "src".
    for (int i = 0; i < 40; ++i) {
        bool f = i < 20;
        store.ingest_line(R"({"id":"CVE-)" + std::to_string(i) + R"(","description":"d",)" +
                              R"("cwe_ids":[")" + (f ? "CWE-79" : "CWE-1") + R"("]})",
                          RecordSchema::vulns, stats);
        if (f) {
            store.ingest_line(R"({"vuln_id":"CVE-)" + std::to_string(i) +
                                  R"(","source":"src","kind":"functional","date":"2016-01-01"})",
                              RecordSchema::evidence, stats);
        }
    }
    auto r = chi2_independence(store, "src", "cwe:CWE-79");
    REQUIRE(r.outcome == Chi2Outcome::tested);
    CHECK(r.statistic == doctest::Approx(40.0));
    CHECK(r.reject);
    CHECK(r.table[1][1] == 20);
    CHECK(r.table[0][0] == 20);

    // A source nobody references is untestable (degenerate marginal).
    auto none = chi2_independence(store, "ghost", "cwe:CWE-79");
    CHECK(none.outcome == Chi2Outcome::untestable);
}
