#include "ee/corpus.hpp"

#include <algorithm>
#include <fstream>

#include "ee/common.hpp"
#include "json.hpp"

namespace ee {

using nlohmann::json;

const char* to_string(ArtifactKind k) {
    switch (k) {
        case ArtifactKind::writeup: return "writeup";
        case ArtifactKind::poc: return "poc";
        case ArtifactKind::nvd_description: return "nvd_description";
    }
    return "?";
}

const char* to_string(EvidenceKind k) {
    return k == EvidenceKind::functional ? "functional" : "in_the_wild";
}

std::optional<ArtifactKind> artifact_kind_from_string(const std::string& s) {
    if (s == "writeup") return ArtifactKind::writeup;
    if (s == "poc") return ArtifactKind::poc;
    if (s == "nvd_description") return ArtifactKind::nvd_description;
    return std::nullopt;
}

std::optional<EvidenceKind> evidence_kind_from_string(const std::string& s) {
    if (s == "functional") return EvidenceKind::functional;
    if (s == "in_the_wild") return EvidenceKind::in_the_wild;
    return std::nullopt;
}

std::optional<RecordSchema> schema_from_string(const std::string& s) {
    if (s == "vulns") return RecordSchema::vulns;
    if (s == "artifacts") return RecordSchema::artifacts;
    if (s == "evidence") return RecordSchema::evidence;
    return std::nullopt;
}

namespace {

std::optional<Date> date_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(Errc::parse, std::string(key) + " must be a string date");
    auto d = Date::try_parse(it->get<std::string>());
    if (!d) throw Error(Errc::parse, std::string(key) + ": bad date '" + it->get<std::string>() + "'");
    return d;
}

std::optional<CvssComponents> cvss_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_object()) throw Error(Errc::parse, std::string(key) + " must be an object");
    CvssComponents c;
    for (auto& [k, v] : it->items()) {
        if (k == "base_score") {
            c.base_score = v.get<double>();
        } else if (k == "exploitability_score") {
            c.exploitability_score = v.get<double>();
        } else if (v.is_string()) {
            c.metrics[k] = v.get<std::string>();
        } else {
            throw Error(Errc::parse, std::string(key) + ": metric " + k + " must be a string");
        }
    }
    return c;
}

// Decodes standard base64; returns false on any non-alphabet character.
bool base64_decode(const std::string& in, std::string& out) {
    out.clear();
    int val = 0, bits = -8;
    for (unsigned char c : in) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int d;
        if (c >= 'A' && c <= 'Z') d = c - 'A';
        else if (c >= 'a' && c <= 'z') d = c - 'a' + 26;
        else if (c >= '0' && c <= '9') d = c - '0' + 52;
        else if (c == '+') d = 62;
        else if (c == '/') d = 63;
        else return false;
        val = (val << 6) + d;
        bits += 6;
        if (bits >= 0) {
            out.push_back(static_cast<char>((val >> bits) & 0xFF));
            bits -= 8;
        }
    }
    return true;
}

}  // namespace

bool CorpusStore::ingest_vuln_line(const std::string& line, std::string& err) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        err = "not a JSON object";
        return false;
    }
    try {
        VulnRecord r;
        if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
            err = "missing or empty \"id\"";
            return false;
        }
        r.id = j["id"].get<std::string>();
        if (j.contains("description") && j["description"].is_string())
            r.description = j["description"].get<std::string>();
        r.cvss_v2 = cvss_field(j, "cvss_v2");
        r.cvss_v3 = cvss_field(j, "cvss_v3");
        r.cvss_published = date_field(j, "cvss_published");
        r.nvd_published = date_field(j, "nvd_published");
        if (j.contains("cwe_ids")) {
            for (const auto& c : j["cwe_ids"]) r.cwe_ids.push_back(c.get<std::string>());
        }
        if (j.contains("products")) {
            for (const auto& p : j["products"]) r.products.push_back(p.get<std::string>());
        }
        auto [it, inserted] = vulns_.emplace(r.id, std::move(r));
        if (!inserted) {
            err = "duplicate vulnerability id '" + it->first + "'";
            return false;
        }
        return true;
    } catch (const std::exception& e) {
        err = e.what();
        return false;
    }
}

bool CorpusStore::ingest_artifact_line(const std::string& line, bool dedupe, IngestStats& stats,
                                       std::string& err) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        err = "not a JSON object";
        return false;
    }
    try {
        ArtifactRecord a;
        if (!j.contains("vuln_id") || !j["vuln_id"].is_string()) {
            err = "missing \"vuln_id\"";
            return false;
        }
        a.vuln_id = j["vuln_id"].get<std::string>();
        auto kind = artifact_kind_from_string(j.value("kind", ""));
        if (!kind) {
            err = "unknown artifact kind '" + j.value("kind", "") + "'";
            return false;
        }
        a.kind = *kind;
        auto d = date_field(j, "date");
        if (!d) {
            err = "missing artifact date";
            return false;
        }
        a.date = *d;
        a.source = j.value("source", "");
        std::string content = j.value("content", "");
        if (j.value("encoding", "") == "b64") {
            std::string decoded;
            if (!base64_decode(content, decoded)) {
                err = "invalid base64 content";
                return false;
            }
            a.content = std::move(decoded);
        } else {
            a.content = std::move(content);
        }
        if (j.contains("ext") && j["ext"].is_string()) a.declared_extension = j["ext"].get<std::string>();

        if (dedupe) {
            std::uint64_t h = whitespace_invariant_hash(a.content);
            h = fnv1a64(a.vuln_id, h);
            if (!artifact_hashes_.insert(h).second) {
                ++stats.duplicates;
                return true;  // silently dropped, not an error
            }
        }
        artifacts_[a.vuln_id].push_back(std::move(a));
        ++artifact_count_;
        return true;
    } catch (const std::exception& e) {
        err = e.what();
        return false;
    }
}

bool CorpusStore::ingest_evidence_line(const std::string& line, std::string& err) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        err = "not a JSON object";
        return false;
    }
    try {
        ExploitEvidence e;
        if (!j.contains("vuln_id") || !j["vuln_id"].is_string()) {
            err = "missing \"vuln_id\"";
            return false;
        }
        e.vuln_id = j["vuln_id"].get<std::string>();
        e.source = j.value("source", "");
        auto kind = evidence_kind_from_string(j.value("kind", ""));
        if (!kind) {
            err = "unknown evidence kind '" + j.value("kind", "") + "'";
            return false;
        }
        e.kind = *kind;
        e.date = date_field(j, "date");
        evidence_[e.vuln_id].push_back(std::move(e));
        ++evidence_count_;
        return true;
    } catch (const std::exception& ex) {
        err = ex.what();
        return false;
    }
}

void CorpusStore::ingest_line(const std::string& line, RecordSchema schema, IngestStats& stats,
                              bool dedupe_artifacts, const std::string& origin) {
    std::string err;
    bool ok = false;
    std::size_t before_dupes = stats.duplicates;
    switch (schema) {
        case RecordSchema::vulns: ok = ingest_vuln_line(line, err); break;
        case RecordSchema::artifacts:
            ok = ingest_artifact_line(line, dedupe_artifacts, stats, err);
            break;
        case RecordSchema::evidence: ok = ingest_evidence_line(line, err); break;
    }
    if (ok) {
        if (stats.duplicates == before_dupes) ++stats.added;
    } else {
        ++stats.skipped;
        stats.diagnostics.push_back(origin + ": " + err);
    }
}

IngestStats CorpusStore::ingest_jsonl(const std::string& path, RecordSchema schema,
                                      bool dedupe_artifacts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open corpus file: " + path);

    IngestStats stats;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ingest_line(line, schema, stats, dedupe_artifacts, path + ":" + std::to_string(lineno));
    }
    return stats;
}

const VulnRecord* CorpusStore::find_vuln(const std::string& id) const {
    auto it = vulns_.find(id);
    return it == vulns_.end() ? nullptr : &it->second;
}

const std::vector<ArtifactRecord>& CorpusStore::artifacts_of(const std::string& vuln_id) const {
    static const std::vector<ArtifactRecord> empty;
    auto it = artifacts_.find(vuln_id);
    return it == artifacts_.end() ? empty : it->second;
}

const std::vector<ExploitEvidence>& CorpusStore::evidence_of(const std::string& vuln_id) const {
    static const std::vector<ExploitEvidence> empty;
    auto it = evidence_.find(vuln_id);
    return it == evidence_.end() ? empty : it->second;
}

std::vector<std::string> CorpusStore::vuln_ids() const {
    std::vector<std::string> ids;
    ids.reserve(vulns_.size());
    for (const auto& [id, _] : vulns_) ids.push_back(id);
    return ids;
}

Date CorpusStore::estimate_disclosure(const std::string& vuln_id) const {
    const VulnRecord* v = find_vuln(vuln_id);
    if (!v) throw Error(Errc::not_found, "unknown vulnerability: " + vuln_id);
    std::optional<Date> best = v->nvd_published;
    for (const auto& a : artifacts_of(vuln_id)) {
        if (a.kind != ArtifactKind::writeup) continue;
        if (!best || a.date < *best) best = a.date;
    }
    if (!best) throw Error(Errc::bad_state, "undatable vulnerability: " + vuln_id);
    return *best;
}

ExploitDateEstimate CorpusStore::estimate_exploit_date(const std::string& vuln_id) const {
    ExploitDateEstimate out;
    std::optional<Date> earliest;
    for (const auto& e : evidence_of(vuln_id)) {
        if (!e.date) continue;
        if (!earliest || *e.date < *earliest) earliest = e.date;
    }
    if (!earliest) return out;
    Date disclosure = estimate_disclosure(vuln_id);
    if (*earliest < disclosure) {
        out.zero_day = true;  // excluded from imminence analysis
        return out;
    }
    out.date = earliest;
    return out;
}

int CorpusStore::label(const std::string& vuln_id, int horizon_days,
                       bool accept_undated_evidence) const {
    Date disclosure = estimate_disclosure(vuln_id);
    Date cutoff = disclosure.plus_days(horizon_days);
    for (const auto& e : evidence_of(vuln_id)) {
        if (e.date) {
            if (*e.date <= cutoff) return 1;
        } else if (accept_undated_evidence) {
            return 1;
        }
    }
    return 0;
}

std::vector<const ArtifactRecord*> CorpusStore::snapshot(const std::string& vuln_id, Date z) const {
    std::vector<const ArtifactRecord*> out;
    const auto& all = artifacts_of(vuln_id);
    for (const auto& a : all) {
        if (a.date <= z) out.push_back(&a);
    }
    std::stable_sort(out.begin(), out.end(), [](const ArtifactRecord* a, const ArtifactRecord* b) {
        if (a->date != b->date) return a->date < b->date;
        return a->source < b->source;
    });
    return out;
}

std::vector<std::string> CorpusStore::dangling_references() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : artifacts_) {
        if (!vulns_.count(id)) out.push_back("artifact -> " + id);
    }
    for (const auto& [id, _] : evidence_) {
        if (!vulns_.count(id)) out.push_back("evidence -> " + id);
    }
    return out;
}

}  // namespace ee
