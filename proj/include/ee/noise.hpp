#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ee/corpus.hpp"
#include "ee/sparse.hpp"

namespace ee {

struct NoiseSpec {
    std::string feature;
    std::string scope;            // split identifier, free-form
    std::size_t flipped = 0;      // positives turned negative
    // The "% noise" denominator is ambiguous in the wild; both readings kept.
    double fraction_of_resulting_negatives = 0.0;
    double fraction_of_original_negatives = 0.0;
};

// Every row carrying the feature gets label 0. Never flips negatives and
// never leaves {0,1}. The feature must belong to the training feature space
// (error otherwise); a feature no row carries is a valid no-op. A flip that
// leaves no positives at all is reported via the degenerate flag.
struct NoiseInjection {
    std::vector<int> labels;
    NoiseSpec spec;
    bool degenerate = false;  // no positives survived
};

NoiseInjection inject_feature_noise(const std::vector<int>& labels,
                                    const std::vector<SparseVector>& rows,
                                    const std::string& feature,
                                    const std::vector<std::string>& feature_space,
                                    const std::string& scope = "");

struct PriorEstimate {
    std::string feature;
    double prior = 0.0;      // share of feature-carrying window instances truly exploited
    std::size_t n_instances = 0;
    Date window_start;
    Date window_end;
};

// Estimates the feature prior from the correctly-labeled vulnerabilities
// disclosed in [window_start, window_end). `has_feature` decides membership;
// pass e.g. a structured-feature lookup for cwe:/cpe: ids. Labels use the
// given horizon. Throws when no window instance carries the feature.
PriorEstimate estimate_feature_prior(const CorpusStore& store, const std::string& feature,
                                     Date window_start, Date window_end,
                                     const std::function<bool(const std::string&)>& has_feature,
                                     int label_horizon_days = 365);

// Default membership test for structured namespaces (cwe:, cpe:), straight
// from the vulnerability record.
std::function<bool(const std::string&)> structured_feature_test(const CorpusStore& store,
                                                                const std::string& feature);

enum class Chi2Outcome { tested, untestable };

struct Chi2Result {
    Chi2Outcome outcome = Chi2Outcome::untestable;
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject = false;  // at alpha / m with Bonferroni correction
    std::size_t table[2][2] = {{0, 0}, {0, 0}};
};

// Pearson chi-squared independence test on the 2x2 table
// {has feature} x {has evidence in source}, alpha 0.01, Bonferroni-corrected
// for m tests. Yates continuity correction is off by default.
Chi2Result chi2_independence(const CorpusStore& store, const std::string& evidence_source,
                             const std::string& feature, std::size_t bonferroni_m = 1,
                             double alpha = 0.01, bool yates = false);

// The same test on a prebuilt table; exposed for fixtures.
Chi2Result chi2_from_table(const std::size_t table[2][2], std::size_t bonferroni_m = 1,
                           double alpha = 0.01, bool yates = false);

}  // namespace ee
