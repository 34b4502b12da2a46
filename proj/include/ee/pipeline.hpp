#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ee/astfeat.hpp"
#include "ee/corpus.hpp"
#include "ee/eval.hpp"
#include "ee/langid.hpp"
#include "ee/model.hpp"
#include "ee/sparse.hpp"
#include "ee/textfeat.hpp"
#include "ee/vulnfeat.hpp"

namespace ee {

struct PipelineParams {
    int cadence_days = 182;
    int blackout_days = 365;
    int label_horizon_days = 365;
    std::vector<int> score_offsets = {0, 10, 30, 365};

    // Vocabulary pruning thresholds (document frequency).
    std::size_t writeup_min_count = 100;
    std::size_t nvd_min_count = 100;
    std::size_t pocinfo_min_count = 100;
    std::size_t poctok_min_count = 10;
    bool vocab_count_occurrences = false;  // alternative reading of the threshold

    std::size_t top_k_products = 10;
    std::size_t min_cwe_count = 5;
};

// Everything learned from one training split that featurization needs:
// the language model, the four vocabularies, structured whitelists and the
// numeric scaling ranges. Immutable once built.
class FeatureSpace {
public:
    FeatureSpace() = default;

    // Builds from training vulnerabilities only, seeing artifacts dated <= T.
    // The language model is trained on training-split PoCs that carry a
    // usable file extension; without any, prose-only fallback classes keep
    // identify() total.
    static FeatureSpace build(const CorpusStore& store,
                              const std::vector<std::string>& training_ids, Date train_time,
                              const PipelineParams& params);

    // Featurization of one vulnerability as of date z: unigram namespaces
    // (writeup/nvd/pocinfo), code-token namespace, per-language complexity
    // blocks from the most complex PoC, language flags and structured
    // features. Numeric features are min-max scaled by training ranges.
    SparseVector featurize(const CorpusStore& store, const std::string& vuln_id, Date z) const;

    const TokenModel& language_model() const { return langid_model_; }
    const Vocabulary& vocabulary(const std::string& ns) const;
    const StructuredWhitelists& whitelists() const { return whitelists_; }
    const std::map<std::string, std::pair<double, double>>& scaler() const { return scaler_; }
    std::string fingerprint() const;

    std::string to_json() const;
    static FeatureSpace from_json(const std::string& text);

private:
    SparseVector featurize_raw(const CorpusStore& store, const std::string& vuln_id,
                               Date z) const;
    void fit_scaler(const CorpusStore& store, const std::vector<std::string>& training_ids,
                    Date train_time);

    TokenModel langid_model_;
    Vocabulary writeup_vocab_, nvd_vocab_, pocinfo_vocab_, poctok_vocab_;
    StructuredWhitelists whitelists_;
    std::map<std::string, std::pair<double, double>> scaler_;  // feature -> (min, max)
    PipelineParams params_;

    friend FeatureSpace build_feature_space_for_tests(const CorpusStore&, FeatureSpace);
};

struct TemporalSplit {
    Date train_time;
    std::vector<std::string> train_ids;  // disclosure <= T - blackout
    std::vector<std::string> test_ids;   // T <= disclosure < T + cadence
    std::size_t undatable = 0;
};

std::vector<TemporalSplit> build_splits(const CorpusStore& store, Date start, Date end,
                                        const PipelineParams& params);

struct MatrixRow {
    std::string vuln_id;
    Date z;
};

// Sparse design matrix with a frozen feature index. The index always comes
// from training rows; projecting a test row drops features outside it.
class DesignMatrix {
public:
    static DesignMatrix assemble(const CorpusStore& store, const FeatureSpace& space,
                                 const std::vector<std::string>& ids,
                                 const std::vector<Date>& snapshot_dates,
                                 const PipelineParams& params, const std::string& split_id);

    // Projection onto an existing index (for test rows).
    static DesignMatrix project(const CorpusStore& store, const FeatureSpace& space,
                                const std::vector<std::string>& ids,
                                const std::vector<Date>& snapshot_dates,
                                const PipelineParams& params, const DesignMatrix& reference,
                                const std::string& split_id);

    IndexedRow indexed_row(std::size_t i) const;
    std::vector<IndexedRow> indexed_rows() const;

    std::size_t dim() const { return feature_ids_.size(); }
    std::size_t row_count() const { return rows_.size(); }
    const std::vector<MatrixRow>& rows() const { return rows_; }
    const std::vector<SparseVector>& sparse_rows() const { return sparse_rows_; }
    const std::vector<int>& labels() const { return labels_; }
    std::vector<int>& mutable_labels() { return labels_; }
    const std::vector<std::string>& feature_ids() const { return feature_ids_; }
    std::optional<std::uint32_t> column_of(const std::string& feature) const;
    const std::string& split_id() const { return split_id_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }

    // Directory layout: index.json, rows.jsonl, labels.jsonl, meta.json.
    void save(const std::string& dir) const;
    static DesignMatrix load(const std::string& dir);

private:
    std::vector<std::string> feature_ids_;
    std::map<std::string, std::uint32_t> index_;
    std::vector<MatrixRow> rows_;
    std::vector<SparseVector> sparse_rows_;
    std::vector<int> labels_;
    std::string split_id_;
    std::map<std::string, std::string> metadata_;
};

// Scores for evaluation: one ScoredInstance per test id, with the score
// computed at z = disclosure + offset and delays filled from the corpus.
// feature_ids pins the trained column order; features outside it are dropped.
ScoredSet score_test_instances(const CorpusStore& store, const FeatureSpace& space,
                               const MlpParams& params,
                               const std::vector<std::string>& feature_ids,
                               const std::vector<std::string>& test_ids, int z_offset_days,
                               int label_horizon_days);

// Single-vulnerability score at date z with the same projection rule.
double score_instance(const CorpusStore& store, const FeatureSpace& space,
                      const MlpParams& params, const std::vector<std::string>& feature_ids,
                      const std::string& vuln_id, Date z);

struct EEScore {
    std::string vuln_id;
    Date z;
    double value = 0.0;
    std::string model_id;

    std::string to_json_line() const;
};

}  // namespace ee
