#include "ee/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "ee/common.hpp"
#include "json.hpp"

namespace ee {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool is_numeric_feature(const std::string& id) {
    // Everything outside code complexity blocks is a binary flag; the
    // language flags inside code: are binary as well.
    return id.rfind("code:", 0) == 0 && id.rfind("code:lang:", 0) != 0;
}

json params_to_json(const PipelineParams& p) {
    json j;
    j["cadence_days"] = p.cadence_days;
    j["blackout_days"] = p.blackout_days;
    j["label_horizon_days"] = p.label_horizon_days;
    j["score_offsets"] = p.score_offsets;
    j["writeup_min_count"] = p.writeup_min_count;
    j["nvd_min_count"] = p.nvd_min_count;
    j["pocinfo_min_count"] = p.pocinfo_min_count;
    j["poctok_min_count"] = p.poctok_min_count;
    j["vocab_count_occurrences"] = p.vocab_count_occurrences;
    j["top_k_products"] = p.top_k_products;
    j["min_cwe_count"] = p.min_cwe_count;
    return j;
}

PipelineParams params_from_json(const json& j) {
    PipelineParams p;
    p.cadence_days = j.value("cadence_days", p.cadence_days);
    p.blackout_days = j.value("blackout_days", p.blackout_days);
    p.label_horizon_days = j.value("label_horizon_days", p.label_horizon_days);
    if (j.contains("score_offsets")) p.score_offsets = j["score_offsets"].get<std::vector<int>>();
    p.writeup_min_count = j.value("writeup_min_count", p.writeup_min_count);
    p.nvd_min_count = j.value("nvd_min_count", p.nvd_min_count);
    p.pocinfo_min_count = j.value("pocinfo_min_count", p.pocinfo_min_count);
    p.poctok_min_count = j.value("poctok_min_count", p.poctok_min_count);
    p.vocab_count_occurrences = j.value("vocab_count_occurrences", p.vocab_count_occurrences);
    p.top_k_products = j.value("top_k_products", p.top_k_products);
    p.min_cwe_count = j.value("min_cwe_count", p.min_cwe_count);
    return p;
}

}  // namespace

FeatureSpace FeatureSpace::build(const CorpusStore& store,
                                 const std::vector<std::string>& training_ids, Date train_time,
                                 const PipelineParams& params) {
    FeatureSpace space;
    space.params_ = params;

    // Language model from extension-labeled training PoCs.
    std::vector<std::pair<std::string, LanguageLabel>> labeled;
    for (const auto& id : training_ids) {
        for (const ArtifactRecord* a : store.snapshot(id, train_time)) {
            if (a->kind != ArtifactKind::poc || !a->declared_extension) continue;
            auto lang = language_from_extension(*a->declared_extension);
            if (!lang) continue;
            labeled.emplace_back(a->content, *lang);
        }
    }
    if (labeled.empty()) {
        // Degenerate split without extension-labeled PoCs: a prose-only
        // class keeps identification total; everything classifies as Text.
        labeled.emplace_back("plain prose fallback", LanguageLabel::Text);
    }
    space.langid_model_ = TokenModel::train(labeled);

    // Vocabulary documents, one per artifact visible at T.
    std::vector<std::vector<std::string>> writeup_docs, nvd_docs, pocinfo_docs, poctok_docs;
    for (const auto& id : training_ids) {
        for (const ArtifactRecord* a : store.snapshot(id, train_time)) {
            switch (a->kind) {
                case ArtifactKind::writeup:
                    writeup_docs.push_back(tokenize(a->content));
                    break;
                case ArtifactKind::nvd_description:
                    nvd_docs.push_back(tokenize(a->content));
                    break;
                case ArtifactKind::poc: {
                    auto ident = identify(a->content, a->declared_extension, space.langid_model_);
                    auto sep = separate(a->content, ident.language, ident.confidence);
                    pocinfo_docs.push_back(tokenize(sep.comments));
                    auto toks = code_tokens(sep);
                    if (!toks.empty()) poctok_docs.push_back(std::move(toks));
                    break;
                }
            }
        }
    }
    bool occ = params.vocab_count_occurrences;
    space.writeup_vocab_ = Vocabulary::build(writeup_docs, "writeup", params.writeup_min_count, occ);
    space.nvd_vocab_ = Vocabulary::build(nvd_docs, "nvd", params.nvd_min_count, occ);
    space.pocinfo_vocab_ = Vocabulary::build(pocinfo_docs, "pocinfo", params.pocinfo_min_count, occ);
    space.poctok_vocab_ = Vocabulary::build(poctok_docs, "poctok", params.poctok_min_count, occ);

    space.whitelists_ =
        build_whitelists(store, training_ids, params.top_k_products, params.min_cwe_count);

    space.fit_scaler(store, training_ids, train_time);
    return space;
}

void FeatureSpace::fit_scaler(const CorpusStore& store,
                              const std::vector<std::string>& training_ids, Date train_time) {
    scaler_.clear();
    for (const auto& id : training_ids) {
        SparseVector raw = featurize_raw(store, id, train_time);
        for (const auto& [feature, value] : raw) {
            if (!is_numeric_feature(feature)) continue;
            auto it = scaler_.find(feature);
            if (it == scaler_.end()) {
                scaler_.emplace(feature, std::make_pair(value, value));
            } else {
                it->second.first = std::min(it->second.first, value);
                it->second.second = std::max(it->second.second, value);
            }
        }
    }
}

const Vocabulary& FeatureSpace::vocabulary(const std::string& ns) const {
    if (ns == "writeup") return writeup_vocab_;
    if (ns == "nvd") return nvd_vocab_;
    if (ns == "pocinfo") return pocinfo_vocab_;
    if (ns == "poctok") return poctok_vocab_;
    throw Error(Errc::invalid_argument, "unknown vocabulary namespace: " + ns);
}

SparseVector FeatureSpace::featurize_raw(const CorpusStore& store, const std::string& vuln_id,
                                         Date z) const {
    const VulnRecord* vuln = store.find_vuln(vuln_id);
    if (!vuln) throw Error(Errc::not_found, "unknown vulnerability: " + vuln_id);

    SparseVector out;
    std::vector<PocCodeFeatures> poc_blocks;

    for (const ArtifactRecord* a : store.snapshot(vuln_id, z)) {
        switch (a->kind) {
            case ArtifactKind::writeup:
                out.merge(vectorize(tokenize(a->content), writeup_vocab_));
                break;
            case ArtifactKind::nvd_description:
                out.merge(vectorize(tokenize(a->content), nvd_vocab_));
                break;
            case ArtifactKind::poc: {
                auto ident = identify(a->content, a->declared_extension, langid_model_);
                auto sep = separate(a->content, ident.language, ident.confidence);
                out.merge(vectorize(tokenize(sep.comments), pocinfo_vocab_));
                out.merge(vectorize(code_tokens(sep), poctok_vocab_));
                if (ident.language != LanguageLabel::Text &&
                    ident.language != LanguageLabel::None) {
                    out.set_flag("code:lang:" + std::string(to_string(ident.language)));
                }
                if (has_parser_adapter(ident.language) && !sep.code.empty()) {
                    ParseResult pr = parse_robust(sep.code, ident.language);
                    PocCodeFeatures block;
                    block.lang = ident.language;
                    block.date = a->date;
                    block.source = a->source;
                    block.features = extract_code_features(pr, ident.language, sep.code);
                    poc_blocks.push_back(std::move(block));
                }
                break;
            }
        }
    }

    for (const auto& [lang, block] : aggregate_poc_code_features(poc_blocks)) {
        out.merge(block.to_sparse(lang));
    }
    out.merge(encode_structured(*vuln, whitelists_, z));
    return out;
}

SparseVector FeatureSpace::featurize(const CorpusStore& store, const std::string& vuln_id,
                                     Date z) const {
    SparseVector raw = featurize_raw(store, vuln_id, z);
    SparseVector out;
    for (const auto& [feature, value] : raw) {
        if (!is_numeric_feature(feature)) {
            out.set(feature, value);
            continue;
        }
        auto it = scaler_.find(feature);
        if (it == scaler_.end()) continue;  // not in the training range: dropped
        auto [lo, hi] = it->second;
        if (hi == lo) continue;  // constant during training carries no signal
        double scaled = (value - lo) / (hi - lo);
        out.set(feature, std::clamp(scaled, 0.0, 1.0));
    }
    return out;
}

std::string FeatureSpace::fingerprint() const {
    std::uint64_t h = fnv1a64("feature-space");
    h = fnv1a64(writeup_vocab_.fingerprint(), h);
    h = fnv1a64(nvd_vocab_.fingerprint(), h);
    h = fnv1a64(pocinfo_vocab_.fingerprint(), h);
    h = fnv1a64(poctok_vocab_.fingerprint(), h);
    for (const auto& p : whitelists_.products) h = fnv1a64(p, h);
    for (const auto& c : whitelists_.cwes) h = fnv1a64(c, h);
    for (const auto& [k, range] : scaler_) {
        h = fnv1a64(k, h);
        h = fnv1a64(std::to_string(range.first) + ":" + std::to_string(range.second), h);
    }
    return hex64(h);
}

std::string FeatureSpace::to_json() const {
    json j;
    j["format"] = "ee.feature-space";
    j["version"] = 1;
    j["params"] = params_to_json(params_);
    j["langid_model"] = json::parse(langid_model_.to_json());
    j["vocabularies"] = {{"writeup", json::parse(writeup_vocab_.to_json())},
                         {"nvd", json::parse(nvd_vocab_.to_json())},
                         {"pocinfo", json::parse(pocinfo_vocab_.to_json())},
                         {"poctok", json::parse(poctok_vocab_.to_json())}};
    j["whitelists"] = json::parse(whitelists_.to_json());
    json scaler = json::object();
    for (const auto& [k, range] : scaler_) scaler[k] = {range.first, range.second};
    j["scaler"] = std::move(scaler);
    return j.dump(2);
}

FeatureSpace FeatureSpace::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse, "feature space: invalid JSON");
    if (j.value("format", "") != "ee.feature-space")
        throw Error(Errc::parse, "feature space: unrecognized format");
    if (j.value("version", 0) != 1)
        throw Error(Errc::version_mismatch, "feature space: unsupported version");
    FeatureSpace space;
    space.params_ = params_from_json(j.at("params"));
    space.langid_model_ = TokenModel::from_json(j.at("langid_model").dump());
    space.writeup_vocab_ = Vocabulary::from_json(j.at("vocabularies").at("writeup").dump());
    space.nvd_vocab_ = Vocabulary::from_json(j.at("vocabularies").at("nvd").dump());
    space.pocinfo_vocab_ = Vocabulary::from_json(j.at("vocabularies").at("pocinfo").dump());
    space.poctok_vocab_ = Vocabulary::from_json(j.at("vocabularies").at("poctok").dump());
    space.whitelists_ = StructuredWhitelists::from_json(j.at("whitelists").dump());
    for (auto& [k, v] : j.at("scaler").items()) {
        space.scaler_[k] = {v.at(0).get<double>(), v.at(1).get<double>()};
    }
    return space;
}

std::vector<TemporalSplit> build_splits(const CorpusStore& store, Date start, Date end,
                                        const PipelineParams& params) {
    std::vector<TemporalSplit> out;
    if (!(start < end)) return out;
    for (Date t = start; t < end; t = t.plus_days(params.cadence_days)) {
        TemporalSplit split;
        split.train_time = t;
        Date cutoff = t.plus_days(-params.blackout_days);
        Date test_end = t.plus_days(params.cadence_days);
        for (const auto& id : store.vuln_ids()) {
            Date disclosure;
            try {
                disclosure = store.estimate_disclosure(id);
            } catch (const Error&) {
                ++split.undatable;
                continue;
            }
            if (disclosure <= cutoff) {
                split.train_ids.push_back(id);
            } else if (t <= disclosure && disclosure < test_end) {
                split.test_ids.push_back(id);
            }
        }
        out.push_back(std::move(split));
    }
    return out;
}

DesignMatrix DesignMatrix::assemble(const CorpusStore& store, const FeatureSpace& space,
                                    const std::vector<std::string>& ids,
                                    const std::vector<Date>& snapshot_dates,
                                    const PipelineParams& params, const std::string& split_id) {
    if (ids.size() != snapshot_dates.size()) {
        throw Error(Errc::invalid_argument, "ids and snapshot dates disagree in length");
    }
    DesignMatrix m;
    m.split_id_ = split_id;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        SparseVector v = space.featurize(store, ids[i], snapshot_dates[i]);
        for (const auto& [feature, _] : v) {
            if (m.index_.emplace(feature, 0).second) m.feature_ids_.push_back(feature);
        }
        m.sparse_rows_.push_back(std::move(v));
        m.rows_.push_back({ids[i], snapshot_dates[i]});
        m.labels_.push_back(store.label(ids[i], params.label_horizon_days));
    }
    std::sort(m.feature_ids_.begin(), m.feature_ids_.end());
    for (std::size_t i = 0; i < m.feature_ids_.size(); ++i) {
        m.index_[m.feature_ids_[i]] = static_cast<std::uint32_t>(i);
    }
    m.metadata_["feature_space"] = space.fingerprint();
    m.metadata_["split"] = split_id;
    return m;
}

DesignMatrix DesignMatrix::project(const CorpusStore& store, const FeatureSpace& space,
                                   const std::vector<std::string>& ids,
                                   const std::vector<Date>& snapshot_dates,
                                   const PipelineParams& params, const DesignMatrix& reference,
                                   const std::string& split_id) {
    if (ids.size() != snapshot_dates.size()) {
        throw Error(Errc::invalid_argument, "ids and snapshot dates disagree in length");
    }
    DesignMatrix m;
    m.split_id_ = split_id;
    m.feature_ids_ = reference.feature_ids_;
    m.index_ = reference.index_;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        SparseVector full = space.featurize(store, ids[i], snapshot_dates[i]);
        SparseVector projected;
        for (const auto& [feature, value] : full) {
            if (m.index_.count(feature)) projected.set(feature, value);
        }
        m.sparse_rows_.push_back(std::move(projected));
        m.rows_.push_back({ids[i], snapshot_dates[i]});
        m.labels_.push_back(store.label(ids[i], params.label_horizon_days));
    }
    m.metadata_["feature_space"] = space.fingerprint();
    m.metadata_["split"] = split_id;
    m.metadata_["projected_from"] = reference.split_id_;
    return m;
}

IndexedRow DesignMatrix::indexed_row(std::size_t i) const {
    IndexedRow row;
    row.label = labels_[i];
    for (const auto& [feature, value] : sparse_rows_[i]) {
        row.features.emplace_back(index_.at(feature), value);
    }
    return row;
}

std::vector<IndexedRow> DesignMatrix::indexed_rows() const {
    std::vector<IndexedRow> out;
    out.reserve(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) out.push_back(indexed_row(i));
    return out;
}

std::optional<std::uint32_t> DesignMatrix::column_of(const std::string& feature) const {
    auto it = index_.find(feature);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void DesignMatrix::save(const std::string& dir) const {
    fs::create_directories(dir);
    json index;
    index["format"] = "ee.design-matrix";
    index["version"] = 1;
    index["features"] = feature_ids_;
    write_file(dir + "/index.json", index.dump(2));

    std::string rows_out;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        json line;
        line["vuln_id"] = rows_[i].vuln_id;
        line["z"] = rows_[i].z.to_string();
        json features = json::object();
        for (const auto& [feature, value] : sparse_rows_[i]) features[feature] = value;
        line["features"] = std::move(features);
        rows_out += line.dump();
        rows_out += '\n';
    }
    write_file(dir + "/rows.jsonl", rows_out);

    std::string labels_out;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        json line;
        line["vuln_id"] = rows_[i].vuln_id;
        line["label"] = labels_[i];
        labels_out += line.dump();
        labels_out += '\n';
    }
    write_file(dir + "/labels.jsonl", labels_out);

    json meta;
    meta["split"] = split_id_;
    for (const auto& [k, v] : metadata_) meta[k] = v;
    write_file(dir + "/meta.json", meta.dump(2));
}

DesignMatrix DesignMatrix::load(const std::string& dir) {
    DesignMatrix m;
    json index = json::parse(read_file(dir + "/index.json"));
    if (index.value("version", 0) != 1)
        throw Error(Errc::version_mismatch, "design matrix: unsupported version");
    m.feature_ids_ = index.at("features").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < m.feature_ids_.size(); ++i) {
        m.index_[m.feature_ids_[i]] = static_cast<std::uint32_t>(i);
    }

    std::ifstream rows_in(dir + "/rows.jsonl");
    if (!rows_in) throw Error(Errc::io, "cannot open " + dir + "/rows.jsonl");
    std::string line;
    while (std::getline(rows_in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        MatrixRow row;
        row.vuln_id = j.at("vuln_id").get<std::string>();
        row.z = Date::parse(j.at("z").get<std::string>());
        SparseVector v;
        for (auto& [feature, value] : j.at("features").items()) {
            v.set(feature, value.get<double>());
        }
        m.rows_.push_back(std::move(row));
        m.sparse_rows_.push_back(std::move(v));
    }

    std::ifstream labels_in(dir + "/labels.jsonl");
    if (!labels_in) throw Error(Errc::io, "cannot open " + dir + "/labels.jsonl");
    while (std::getline(labels_in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        m.labels_.push_back(j.at("label").get<int>());
    }
    if (m.labels_.size() != m.rows_.size()) {
        throw Error(Errc::parse, "design matrix: labels and rows disagree");
    }

    json meta = json::parse(read_file(dir + "/meta.json"));
    m.split_id_ = meta.value("split", "");
    for (auto& [k, v] : meta.items()) {
        if (v.is_string()) m.metadata_[k] = v.get<std::string>();
    }
    return m;
}

namespace {

std::map<std::string, std::uint32_t> build_column_map(const std::vector<std::string>& ids) {
    std::map<std::string, std::uint32_t> out;
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = static_cast<std::uint32_t>(i);
    return out;
}

IndexedRow project_row(const SparseVector& v,
                       const std::map<std::string, std::uint32_t>& columns) {
    IndexedRow row;
    for (const auto& [feature, value] : v) {
        auto it = columns.find(feature);
        if (it != columns.end()) row.features.emplace_back(it->second, value);
    }
    return row;
}

}  // namespace

double score_instance(const CorpusStore& store, const FeatureSpace& space,
                      const MlpParams& params, const std::vector<std::string>& feature_ids,
                      const std::string& vuln_id, Date z) {
    auto columns = build_column_map(feature_ids);
    return forward(params, project_row(space.featurize(store, vuln_id, z), columns));
}

ScoredSet score_test_instances(const CorpusStore& store, const FeatureSpace& space,
                               const MlpParams& params,
                               const std::vector<std::string>& feature_ids,
                               const std::vector<std::string>& test_ids, int z_offset_days,
                               int label_horizon_days) {
    auto columns = build_column_map(feature_ids);
    ScoredSet out;
    for (const auto& id : test_ids) {
        Date disclosure = store.estimate_disclosure(id);
        Date z = disclosure.plus_days(z_offset_days);
        IndexedRow row = project_row(space.featurize(store, id, z), columns);
        ScoredInstance inst;
        inst.vuln_id = id;
        inst.score = forward(params, row);
        inst.label = store.label(id, label_horizon_days);
        inst.disclosure = disclosure;
        auto exploit = store.estimate_exploit_date(id);
        if (exploit.date) inst.exploit_delay = *exploit.date - disclosure;
        std::optional<Date> first_poc;
        for (const auto& a : store.artifacts_of(id)) {
            if (a.kind != ArtifactKind::poc) continue;
            if (!first_poc || a.date < *first_poc) first_poc = a.date;
        }
        if (first_poc) inst.poc_delay = *first_poc - disclosure;
        out.push_back(std::move(inst));
    }
    return out;
}

std::string EEScore::to_json_line() const {
    json j;
    j["vuln_id"] = vuln_id;
    j["date"] = z.to_string();
    j["ee"] = value;
    j["model_id"] = model_id;
    return j.dump();
}

}  // namespace ee
