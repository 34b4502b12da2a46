#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ee/dates.hpp"

namespace ee {

struct ScoredInstance {
    std::string vuln_id;
    std::optional<double> score;  // absent for unscored static baselines
    int label = 0;                // 1 = exploited within the horizon
    Date disclosure;
    std::optional<int> exploit_delay;       // days from disclosure to exploit
    std::optional<int> poc_delay;           // days from disclosure to first PoC
};

using ScoredSet = std::vector<ScoredInstance>;

struct ThresholdPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// One (precision, recall) point per distinct score, descending. Instances
// without a score are never predicted positive: they cannot enter precision
// but still count toward total positives, depressing recall. Throws when the
// set has no positives.
std::vector<ThresholdPoint> threshold_sweep(const ScoredSet& scored);

// ROC-AUC as the Mann-Whitney statistic P(s+ > s-) + P(tie)/2.
// Requires both classes among the scored instances.
double auc_roc(const ScoredSet& scored);

// PR-AUC with step-wise interpolated precision over recall steps.
double auc_pr(const ScoredSet& scored);

// Prioritization error for instance i against contemporaneous set S:
// the fraction of opposite-label instances of S mis-ranked relative to i
// (ties count as errors, per the >= / <= in the definition).
// Returns nullopt when S is empty.
std::optional<double> prioritization_error(double score_i, int label_i,
                                           const std::vector<std::pair<double, int>>& s_scores);

struct PrioritizationPoint {
    int window_days = 0;
    std::optional<double> mean_exploited;      // mean error over exploited instances
    std::optional<double> mean_non_exploited;  // and over non-exploited ones
    std::size_t n_exploited = 0;
    std::size_t n_non_exploited = 0;
    std::size_t skipped_empty_s = 0;  // instances with no contemporaries
};

// Mean prioritization error for every window size t in [0, max_window_days]:
// S_i(t) = instances disclosed in (d_i, d_i + t]. Instances with empty S are
// skipped and counted.
std::vector<PrioritizationPoint> prioritization_curve(const ScoredSet& scored,
                                                      int max_window_days);

struct PrioritizationStats {
    double mean = 0.0;
    double stddev = 0.0;
    double median = 0.0;
    std::size_t n = 0;
};

PrioritizationStats prioritization_stats(const std::vector<double>& errors);

// AUC at horizon t over instances with known exploit delays: positives are
// exploited within t days of disclosure, negatives later. Undefined (absent)
// when either side is empty.
std::optional<double> time_varying_auc(const ScoredSet& scored, int horizon_days);

struct TimeVaryingSeries {
    std::vector<int> horizons;
    std::vector<std::optional<double>> auc;  // aligned with horizons
};

TimeVaryingSeries time_varying_auc_series(const ScoredSet& scored,
                                          const std::vector<int>& horizons);

// Timestamp-noise robustness: for a seeded rho-fraction of instances with a
// PoC date, the exploit delay is replaced by the PoC delay, the horizon
// series recomputed, and the result averaged over `repetitions` draws.
TimeVaryingSeries timestamp_noise_protocol(const ScoredSet& scored,
                                           const std::vector<int>& horizons, double rho,
                                           std::uint64_t seed, int repetitions = 5);

struct EvalReport {
    std::vector<ThresholdPoint> pr_points;
    std::vector<std::pair<double, double>> roc_points;  // (fpr, tpr)
    double pr_auc = 0.0;
    double roc_auc = 0.0;
    std::vector<PrioritizationPoint> prioritization;
    PrioritizationStats prioritization_exploited;
    TimeVaryingSeries time_varying;

    std::string to_json() const;
    std::string pr_csv() const;
    std::string roc_csv() const;
};

// ROC curve points (FPR, TPR) for the report; includes both endpoints.
std::vector<std::pair<double, double>> roc_points(const ScoredSet& scored);

}  // namespace ee
