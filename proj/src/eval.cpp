#include "ee/eval.hpp"

#include <algorithm>
#include <cmath>

#include "ee/common.hpp"
#include "ee/rng.hpp"
#include "json.hpp"

namespace ee {

using nlohmann::json;

namespace {

struct Counts {
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::size_t scored_positives = 0;
    std::size_t scored_negatives = 0;
};

Counts count_classes(const ScoredSet& scored) {
    Counts c;
    for (const auto& s : scored) {
        if (s.label == 1) {
            ++c.positives;
            if (s.score) ++c.scored_positives;
        } else {
            ++c.negatives;
            if (s.score) ++c.scored_negatives;
        }
    }
    return c;
}

}  // namespace

std::vector<ThresholdPoint> threshold_sweep(const ScoredSet& scored) {
    Counts c = count_classes(scored);
    if (c.positives == 0) throw Error(Errc::invalid_argument, "threshold sweep needs positives");

    std::vector<std::pair<double, int>> rows;  // (score, label), scored only
    for (const auto& s : scored) {
        if (s.score) rows.emplace_back(*s.score, s.label);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<ThresholdPoint> out;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < rows.size()) {
        double threshold = rows[i].first;
        while (i < rows.size() && rows[i].first == threshold) {  // tie group
            if (rows[i].second == 1) ++tp;
            else ++fp;
            ++i;
        }
        ThresholdPoint p;
        p.threshold = threshold;
        p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        p.recall = static_cast<double>(tp) / static_cast<double>(c.positives);
        out.push_back(p);
    }
    return out;
}

double auc_roc(const ScoredSet& scored) {
    Counts c = count_classes(scored);
    if (c.scored_positives == 0 || c.scored_negatives == 0) {
        throw Error(Errc::invalid_argument, "ROC-AUC needs both classes scored");
    }
    // Rank-sum with midranks for ties.
    std::vector<std::pair<double, int>> rows;
    for (const auto& s : scored) {
        if (s.score) rows.emplace_back(*s.score, s.label);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        while (j < rows.size() && rows[j].first == rows[i].first) ++j;
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (rows[k].second == 1) rank_sum_pos += midrank;
        }
        i = j;
    }
    double np = static_cast<double>(c.scored_positives);
    double nn = static_cast<double>(c.scored_negatives);
    double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * nn);
}

double auc_pr(const ScoredSet& scored) {
    auto points = threshold_sweep(scored);
    double auc = 0.0;
    double prev_recall = 0.0;
    for (const auto& p : points) {  // already in increasing-recall order
        auc += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    return auc;
}

std::vector<std::pair<double, double>> roc_points(const ScoredSet& scored) {
    Counts c = count_classes(scored);
    std::vector<std::pair<double, int>> rows;
    for (const auto& s : scored) {
        if (s.score) rows.emplace_back(*s.score, s.label);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::pair<double, double>> out;
    out.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < rows.size()) {
        double t = rows[i].first;
        while (i < rows.size() && rows[i].first == t) {
            if (rows[i].second == 1) ++tp;
            else ++fp;
            ++i;
        }
        out.emplace_back(
            c.scored_negatives ? static_cast<double>(fp) / static_cast<double>(c.scored_negatives) : 0.0,
            c.positives ? static_cast<double>(tp) / static_cast<double>(c.positives) : 0.0);
    }
    return out;
}

std::optional<double> prioritization_error(double score_i, int label_i,
                                           const std::vector<std::pair<double, int>>& s_scores) {
    if (s_scores.empty()) return std::nullopt;
    std::size_t bad = 0;
    for (const auto& [score_j, label_j] : s_scores) {
        if (label_i == 1) {
            if (label_j == 0 && score_j >= score_i) ++bad;
        } else {
            if (label_j == 1 && score_j <= score_i) ++bad;
        }
    }
    return static_cast<double>(bad) / static_cast<double>(s_scores.size());
}

std::vector<PrioritizationPoint> prioritization_curve(const ScoredSet& scored,
                                                      int max_window_days) {
    std::vector<PrioritizationPoint> out;
    for (int t = 0; t <= max_window_days; ++t) {
        PrioritizationPoint point;
        point.window_days = t;
        double sum_pos = 0.0, sum_neg = 0.0;
        for (const auto& inst : scored) {
            if (!inst.score) continue;
            std::vector<std::pair<double, int>> contemporaries;
            for (const auto& other : scored) {
                if (&other == &inst || !other.score) continue;
                int gap = other.disclosure - inst.disclosure;
                if (gap > 0 && gap <= t) contemporaries.emplace_back(*other.score, other.label);
            }
            auto err = prioritization_error(*inst.score, inst.label, contemporaries);
            if (!err) {
                ++point.skipped_empty_s;
                continue;
            }
            if (inst.label == 1) {
                sum_pos += *err;
                ++point.n_exploited;
            } else {
                sum_neg += *err;
                ++point.n_non_exploited;
            }
        }
        if (point.n_exploited) point.mean_exploited = sum_pos / static_cast<double>(point.n_exploited);
        if (point.n_non_exploited)
            point.mean_non_exploited = sum_neg / static_cast<double>(point.n_non_exploited);
        out.push_back(std::move(point));
    }
    return out;
}

PrioritizationStats prioritization_stats(const std::vector<double>& errors) {
    PrioritizationStats s;
    s.n = errors.size();
    if (errors.empty()) return s;
    double sum = 0.0;
    for (double e : errors) sum += e;
    s.mean = sum / static_cast<double>(errors.size());
    double var = 0.0;
    for (double e : errors) var += (e - s.mean) * (e - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(errors.size()));
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    s.median = sorted[(sorted.size() - 1) / 2];
    return s;
}

std::optional<double> time_varying_auc(const ScoredSet& scored, int horizon_days) {
    ScoredSet relabeled;
    for (const auto& s : scored) {
        if (!s.exploit_delay || !s.score) continue;
        ScoredInstance r = s;
        r.label = *s.exploit_delay <= horizon_days ? 1 : 0;
        relabeled.push_back(std::move(r));
    }
    Counts c = count_classes(relabeled);
    if (c.scored_positives == 0 || c.scored_negatives == 0) return std::nullopt;
    return auc_roc(relabeled);
}

TimeVaryingSeries time_varying_auc_series(const ScoredSet& scored,
                                          const std::vector<int>& horizons) {
    TimeVaryingSeries out;
    out.horizons = horizons;
    for (int t : horizons) out.auc.push_back(time_varying_auc(scored, t));
    return out;
}

TimeVaryingSeries timestamp_noise_protocol(const ScoredSet& scored,
                                           const std::vector<int>& horizons, double rho,
                                           std::uint64_t seed, int repetitions) {
    std::vector<std::size_t> with_poc;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (scored[i].poc_delay && scored[i].exploit_delay) with_poc.push_back(i);
    }
    if (with_poc.empty()) {
        throw Error(Errc::invalid_argument, "timestamp noise protocol needs PoC dates");
    }

    std::vector<std::vector<double>> sums(horizons.size());
    std::vector<std::vector<int>> defined(horizons.size());
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        sums[h].assign(1, 0.0);
        defined[h].assign(1, 0);
    }

    Rng rng(seed);
    for (int rep = 0; rep < repetitions; ++rep) {
        ScoredSet perturbed = scored;
        std::vector<std::size_t> pool = with_poc;
        rng.shuffle(pool);
        std::size_t k = static_cast<std::size_t>(std::llround(rho * static_cast<double>(pool.size())));
        for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
            perturbed[pool[i]].exploit_delay = perturbed[pool[i]].poc_delay;
        }
        auto series = time_varying_auc_series(perturbed, horizons);
        for (std::size_t h = 0; h < horizons.size(); ++h) {
            if (series.auc[h]) {
                sums[h][0] += *series.auc[h];
                defined[h][0] += 1;
            }
        }
    }

    TimeVaryingSeries out;
    out.horizons = horizons;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        if (defined[h][0] > 0) {
            out.auc.push_back(sums[h][0] / defined[h][0]);
        } else {
            out.auc.push_back(std::nullopt);
        }
    }
    return out;
}

std::string EvalReport::to_json() const {
    json j;
    j["format"] = "ee.eval-report";
    j["version"] = 1;
    j["roc_auc"] = roc_auc;
    j["pr_auc"] = pr_auc;
    json pr = json::array();
    for (const auto& p : pr_points) {
        pr.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
    }
    j["pr_points"] = std::move(pr);
    json roc = json::array();
    for (const auto& [fpr, tpr] : roc_points) roc.push_back({{"fpr", fpr}, {"tpr", tpr}});
    j["roc_points"] = std::move(roc);
    json prio = json::array();
    for (const auto& p : prioritization) {
        json e;
        e["t"] = p.window_days;
        if (p.mean_exploited) e["mean_exploited"] = *p.mean_exploited;
        if (p.mean_non_exploited) e["mean_non_exploited"] = *p.mean_non_exploited;
        e["n_exploited"] = p.n_exploited;
        e["n_non_exploited"] = p.n_non_exploited;
        e["skipped_empty_s"] = p.skipped_empty_s;
        prio.push_back(std::move(e));
    }
    j["prioritization"] = std::move(prio);
    j["prioritization_exploited"] = {{"mean", prioritization_exploited.mean},
                                     {"stddev", prioritization_exploited.stddev},
                                     {"median", prioritization_exploited.median},
                                     {"n", prioritization_exploited.n}};
    json tv = json::array();
    for (std::size_t i = 0; i < time_varying.horizons.size(); ++i) {
        json e;
        e["t"] = time_varying.horizons[i];
        if (time_varying.auc[i]) {
            e["auc"] = *time_varying.auc[i];
        } else {
            e["auc"] = nullptr;
        }
        tv.push_back(std::move(e));
    }
    j["time_varying_auc"] = std::move(tv);
    return j.dump(2);
}

std::string EvalReport::pr_csv() const {
    std::string out = "threshold,precision,recall\n";
    for (const auto& p : pr_points) {
        out += std::to_string(p.threshold) + "," + std::to_string(p.precision) + "," +
               std::to_string(p.recall) + "\n";
    }
    return out;
}

std::string EvalReport::roc_csv() const {
    std::string out = "fpr,tpr\n";
    for (const auto& [fpr, tpr] : roc_points) {
        out += std::to_string(fpr) + "," + std::to_string(tpr) + "\n";
    }
    return out;
}

}  // namespace ee
