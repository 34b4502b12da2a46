#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "ee/dates.hpp"

namespace ee {

// One CVSS vector, stored as string-valued metric components plus the
// numeric base / exploitability subscores. Metric keys are the standard
// abbreviations (AV, AC, Au or PR, UI, S, C, I, A).
struct CvssComponents {
    std::map<std::string, std::string> metrics;
    std::optional<double> base_score;
    std::optional<double> exploitability_score;
};

struct VulnRecord {
    std::string id;
    std::string description;
    std::optional<CvssComponents> cvss_v2;
    std::optional<CvssComponents> cvss_v3;
    std::optional<Date> cvss_published;
    std::vector<std::string> cwe_ids;
    std::vector<std::string> products;
    std::optional<Date> nvd_published;
};

enum class ArtifactKind { writeup, poc, nvd_description };

struct ArtifactRecord {
    std::string vuln_id;
    ArtifactKind kind = ArtifactKind::writeup;
    Date date;
    std::string source;
    std::string content;  // may be arbitrary bytes
    std::optional<std::string> declared_extension;
};

enum class EvidenceKind { functional, in_the_wild };

struct ExploitEvidence {
    std::string vuln_id;
    std::string source;
    EvidenceKind kind = EvidenceKind::functional;
    std::optional<Date> date;
};

const char* to_string(ArtifactKind k);
const char* to_string(EvidenceKind k);
std::optional<ArtifactKind> artifact_kind_from_string(const std::string& s);
std::optional<EvidenceKind> evidence_kind_from_string(const std::string& s);

enum class RecordSchema { vulns, artifacts, evidence };
std::optional<RecordSchema> schema_from_string(const std::string& s);

struct IngestStats {
    std::size_t added = 0;
    std::size_t skipped = 0;            // malformed lines
    std::size_t duplicates = 0;         // dropped by the content-hash dedupe
    std::vector<std::string> diagnostics;  // one message per skipped line
};

struct ExploitDateEstimate {
    std::optional<Date> date;  // absent: no usable evidence or zero-day
    bool zero_day = false;     // earliest evidence precedes disclosure
};

// In-memory corpus. Built single-threaded by ingestion; immutable afterwards,
// so concurrent read-only featurization needs no locking.
class CorpusStore {
public:
    // Reads one JSON-Lines file of the given schema. Malformed lines are
    // skipped with a diagnostic; an unreadable file throws Error(io).
    // When dedupe_artifacts is true (the default), artifacts whose
    // whitespace-normalized content hash was already ingested for the same
    // vulnerability are dropped.
    IngestStats ingest_jsonl(const std::string& path, RecordSchema schema,
                             bool dedupe_artifacts = true);

    // Same semantics for lines already in memory (one JSON object per line).
    void ingest_line(const std::string& line, RecordSchema schema, IngestStats& stats,
                     bool dedupe_artifacts = true, const std::string& origin = "<memory>");

    // Minimum over all write-up dates and the NVD publication date.
    // Throws Error(not_found) for unknown ids and Error(bad_state) when no
    // dated source exists ("undatable vulnerability").
    Date estimate_disclosure(const std::string& vuln_id) const;

    // Earliest dated evidence at or after disclosure. Evidence strictly
    // before disclosure marks the vulnerability as zero-day and yields an
    // absent date (excluded from imminence analysis).
    ExploitDateEstimate estimate_exploit_date(const std::string& vuln_id) const;

    // 1 iff some exploit evidence is confirmed within horizon_days of
    // disclosure. Undated evidence counts only when accept_undated_evidence
    // is set. Throws when the vulnerability is undatable.
    int label(const std::string& vuln_id, int horizon_days = 365,
              bool accept_undated_evidence = false) const;

    // Artifacts with date <= z, ordered by (date, source, ingest order).
    std::vector<const ArtifactRecord*> snapshot(const std::string& vuln_id, Date z) const;

    const VulnRecord* find_vuln(const std::string& id) const;
    const std::vector<ArtifactRecord>& artifacts_of(const std::string& vuln_id) const;
    const std::vector<ExploitEvidence>& evidence_of(const std::string& vuln_id) const;

    std::vector<std::string> vuln_ids() const;  // sorted
    std::size_t vuln_count() const { return vulns_.size(); }
    std::size_t artifact_count() const { return artifact_count_; }
    std::size_t evidence_count() const { return evidence_count_; }

    // Referential integrity check: every artifact/evidence vuln_id resolves.
    std::vector<std::string> dangling_references() const;

private:
    bool ingest_vuln_line(const std::string& line, std::string& err);
    bool ingest_artifact_line(const std::string& line, bool dedupe, IngestStats& stats,
                              std::string& err);
    bool ingest_evidence_line(const std::string& line, std::string& err);

    std::map<std::string, VulnRecord> vulns_;
    std::map<std::string, std::vector<ArtifactRecord>> artifacts_;
    std::map<std::string, std::vector<ExploitEvidence>> evidence_;
    std::unordered_set<std::uint64_t> artifact_hashes_;
    std::size_t artifact_count_ = 0;
    std::size_t evidence_count_ = 0;
};

}  // namespace ee
