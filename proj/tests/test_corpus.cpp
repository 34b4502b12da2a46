#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ee/common.hpp"
#include "ee/corpus.hpp"

using namespace ee;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ee_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        std::string p = (path / name).string();
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }
};

const char* kVuln =
    R"({"id":"CVE-2018-0001","description":"stack overflow","nvd_published":"2018-05-09",)"
    R"("cvss_published":"2018-05-20","cvss_v2":{"AV":"N","AC":"L","base_score":7.5},)"
    R"("cwe_ids":["CWE-119"],"products":["windows"]})";

}  // namespace

TEST_CASE("ingest adds one valid vulnerability line") {
    TempDir dir;
    CorpusStore store;
    auto stats = store.ingest_jsonl(dir.file("v.jsonl", std::string(kVuln) + "\n"),
                                    RecordSchema::vulns);
    CHECK(stats.added == 1);
    CHECK(stats.skipped == 0);
    CHECK(store.vuln_count() == 1);
    const VulnRecord* v = store.find_vuln("CVE-2018-0001");
    REQUIRE(v != nullptr);
    CHECK(v->cwe_ids.size() == 1);
    CHECK(v->cvss_v2->metrics.at("AV") == "N");
    CHECK(v->cvss_v2->base_score == 7.5);
}

TEST_CASE("ingest of an empty file changes nothing") {
    TempDir dir;
    CorpusStore store;
    auto stats = store.ingest_jsonl(dir.file("v.jsonl", ""), RecordSchema::vulns);
    CHECK(stats.added == 0);
    CHECK(stats.skipped == 0);
    CHECK(store.vuln_count() == 0);
}

TEST_CASE("a line missing its id is skipped with a diagnostic") {
    TempDir dir;
    CorpusStore store;
    std::string lines = std::string(kVuln) + "\n" + R"({"description":"no id"})" + "\n" +
                        R"({"id":"CVE-2018-0002","description":"x"})" + "\n";
    auto stats = store.ingest_jsonl(dir.file("v.jsonl", lines), RecordSchema::vulns);
    CHECK(stats.added == 2);
    CHECK(stats.skipped == 1);
    REQUIRE(stats.diagnostics.size() == 1);
    CHECK(stats.diagnostics[0].find("id") != std::string::npos);
}

TEST_CASE("unreadable file is fatal") {
    CorpusStore store;
    CHECK_THROWS_AS(store.ingest_jsonl("/nonexistent/vulns.jsonl", RecordSchema::vulns), Error);
}

TEST_CASE("artifact dedupe is whitespace-invariant per vulnerability") {
    TempDir dir;
    CorpusStore store;
    std::string a1 =
        R"({"vuln_id":"CVE-1","kind":"poc","date":"2018-01-01","source":"a","content":"int  main()\n{ }"})";
    std::string a2 =
        R"({"vuln_id":"CVE-1","kind":"poc","date":"2018-01-02","source":"b","content":"int main() { }"})";
    auto stats = store.ingest_jsonl(dir.file("a.jsonl", a1 + "\n" + a2 + "\n"),
                                    RecordSchema::artifacts);
    CHECK(stats.added == 1);
    CHECK(stats.duplicates == 1);

    CorpusStore keep_all;
    auto stats2 = keep_all.ingest_jsonl(dir.file("b.jsonl", a1 + "\n" + a2 + "\n"),
                                        RecordSchema::artifacts, /*dedupe=*/false);
    CHECK(stats2.added == 2);
}

TEST_CASE("base64 artifact content decodes") {
    TempDir dir;
    CorpusStore store;
    // "exploit\x00bytes" base64
    std::string line =
        R"({"vuln_id":"CVE-1","kind":"poc","date":"2018-01-01","source":"a",)"
        R"("content":"ZXhwbG9pdABieXRlcw==","encoding":"b64"})";
    auto stats = store.ingest_jsonl(dir.file("a.jsonl", line + "\n"), RecordSchema::artifacts);
    CHECK(stats.added == 1);
    const auto& artifacts = store.artifacts_of("CVE-1");
    REQUIRE(artifacts.size() == 1);
    CHECK(artifacts[0].content == std::string("exploit\0bytes", 13));
}

namespace {

CorpusStore lifecycle_fixture() {
    CorpusStore store;
    IngestStats stats;
    store.ingest_line(
        R"({"id":"CVE-A","description":"d","nvd_published":"2018-05-09"})",
        RecordSchema::vulns, stats);
    store.ingest_line(R"({"id":"CVE-B","description":"d","nvd_published":"2019-01-01"})",
                      RecordSchema::vulns, stats);
    store.ingest_line(R"({"id":"CVE-C","description":"d"})", RecordSchema::vulns, stats);
    store.ingest_line(
        R"({"vuln_id":"CVE-A","kind":"writeup","date":"2018-05-08","source":"s1","content":"w1"})",
        RecordSchema::artifacts, stats);
    store.ingest_line(
        R"({"vuln_id":"CVE-A","kind":"writeup","date":"2018-05-10","source":"s2","content":"w2"})",
        RecordSchema::artifacts, stats);
    REQUIRE(stats.skipped == 0);
    return store;
}

}  // namespace

TEST_CASE("disclosure is the minimum over write-ups and the NVD date") {
    CorpusStore store = lifecycle_fixture();
    CHECK(store.estimate_disclosure("CVE-A").to_string() == "2018-05-08");
    CHECK(store.estimate_disclosure("CVE-B").to_string() == "2019-01-01");
    CHECK_THROWS_AS(store.estimate_disclosure("CVE-C"), Error);  // undatable
}

TEST_CASE("exploit date estimation excludes zero-days and tolerates absence") {
    CorpusStore store = lifecycle_fixture();
    IngestStats stats;
    // CVE-A disclosure is 2018-05-08.
    store.ingest_line(
        R"({"vuln_id":"CVE-A","source":"tenable","kind":"functional","date":"2018-05-16"})",
        RecordSchema::evidence, stats);
    store.ingest_line(
        R"({"vuln_id":"CVE-A","source":"xforce","kind":"functional","date":"2018-09-10"})",
        RecordSchema::evidence, stats);
    auto est = store.estimate_exploit_date("CVE-A");
    REQUIRE(est.date.has_value());
    CHECK(*est.date - store.estimate_disclosure("CVE-A") == 8);
    CHECK_FALSE(est.zero_day);

    // Single evidence before disclosure: zero-day, excluded.
    store.ingest_line(
        R"({"vuln_id":"CVE-B","source":"s","kind":"in_the_wild","date":"2018-12-29"})",
        RecordSchema::evidence, stats);
    auto zd = store.estimate_exploit_date("CVE-B");
    CHECK_FALSE(zd.date.has_value());
    CHECK(zd.zero_day);

    CorpusStore no_evidence = lifecycle_fixture();
    auto none = no_evidence.estimate_exploit_date("CVE-A");
    CHECK_FALSE(none.date.has_value());
    CHECK_FALSE(none.zero_day);
}

TEST_CASE("label: within-horizon evidence is positive, beyond-horizon is not") {
    CorpusStore store = lifecycle_fixture();
    IngestStats stats;
    // 86 days after the 2018-05-08 disclosure.
    store.ingest_line(
        R"({"vuln_id":"CVE-A","source":"tenable","kind":"functional","date":"2018-08-02"})",
        RecordSchema::evidence, stats);
    CHECK(store.label("CVE-A") == 1);

    // 412 days out for CVE-B (disclosure 2019-01-01).
    store.ingest_line(
        R"({"vuln_id":"CVE-B","source":"tenable","kind":"functional","date":"2020-02-17"})",
        RecordSchema::evidence, stats);
    CHECK(store.label("CVE-B", 365) == 0);
    CHECK(store.label("CVE-B", 500) == 1);

    CorpusStore no_evidence = lifecycle_fixture();
    CHECK(no_evidence.label("CVE-A") == 0);
}

TEST_CASE("undated evidence counts only when explicitly accepted") {
    CorpusStore store = lifecycle_fixture();
    IngestStats stats;
    store.ingest_line(R"({"vuln_id":"CVE-A","source":"s","kind":"functional","date":null})",
                      RecordSchema::evidence, stats);
    CHECK(store.label("CVE-A") == 0);
    CHECK(store.label("CVE-A", 365, /*accept_undated_evidence=*/true) == 1);
}

TEST_CASE("snapshot filters by date and is monotone") {
    CorpusStore store = lifecycle_fixture();
    IngestStats stats;
    store.ingest_line(
        R"({"vuln_id":"CVE-A","kind":"poc","date":"2018-06-17","source":"edb","content":"c1"})",
        RecordSchema::artifacts, stats);

    Date disclosure = store.estimate_disclosure("CVE-A");
    auto at_disclosure = store.snapshot("CVE-A", disclosure);
    CHECK(at_disclosure.size() == 1);  // only the day-0 write-up

    auto at_30 = store.snapshot("CVE-A", disclosure.plus_days(30));
    CHECK(at_30.size() == 2);

    auto at_60 = store.snapshot("CVE-A", disclosure.plus_days(60));
    CHECK(at_60.size() == 3);

    // Monotone: every earlier snapshot is a prefix-subset of later ones.
    for (const auto* a : at_30) {
        CHECK(std::find(at_60.begin(), at_60.end(), a) != at_60.end());
    }
    // Ordered by (date, source).
    for (std::size_t i = 1; i < at_60.size(); ++i) {
        bool ordered = at_60[i - 1]->date < at_60[i]->date ||
                       (at_60[i - 1]->date == at_60[i]->date &&
                        at_60[i - 1]->source <= at_60[i]->source);
        CHECK(ordered);
    }
}

TEST_CASE("label is deterministic for a fixed store and horizon") {
    CorpusStore store = lifecycle_fixture();
    IngestStats stats;
    store.ingest_line(
        R"({"vuln_id":"CVE-A","source":"t","kind":"functional","date":"2018-06-01"})",
        RecordSchema::evidence, stats);
    int first = store.label("CVE-A");
    for (int i = 0; i < 10; ++i) CHECK(store.label("CVE-A") == first);
}

TEST_CASE("date parsing is strict about granularity") {
    CHECK(Date::parse("2018-05-08").to_string() == "2018-05-08");
    CHECK_FALSE(Date::try_parse("2018-05"));
    CHECK_FALSE(Date::try_parse("2018-13-01"));
    CHECK_FALSE(Date::try_parse("2018-02-30"));
    CHECK_FALSE(Date::try_parse("garbage"));
    CHECK(Date::parse("2020-02-29").plus_days(1).to_string() == "2020-03-01");
}

TEST_CASE("referential integrity reporting") {
    CorpusStore store = lifecycle_fixture();
    IngestStats stats;
    store.ingest_line(
        R"({"vuln_id":"CVE-MISSING","kind":"poc","date":"2018-01-01","source":"x","content":"c"})",
        RecordSchema::artifacts, stats);
    auto dangling = store.dangling_references();
    REQUIRE(dangling.size() == 1);
    CHECK(dangling[0].find("CVE-MISSING") != std::string::npos);
}
