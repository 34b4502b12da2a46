#include "ee/noise.hpp"

#include <algorithm>
#include <cmath>

#include "ee/common.hpp"

namespace ee {

NoiseInjection inject_feature_noise(const std::vector<int>& labels,
                                    const std::vector<SparseVector>& rows,
                                    const std::string& feature,
                                    const std::vector<std::string>& feature_space,
                                    const std::string& scope) {
    if (labels.size() != rows.size()) {
        throw Error(Errc::invalid_argument, "labels and rows disagree in length");
    }
    if (std::find(feature_space.begin(), feature_space.end(), feature) == feature_space.end()) {
        throw Error(Errc::not_found, "feature absent from the feature space: " + feature);
    }
    NoiseInjection out;
    out.labels = labels;
    out.spec.feature = feature;
    out.spec.scope = scope;

    std::size_t original_negatives = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (labels[i] == 0) ++original_negatives;
        if (rows[i].has(feature) && out.labels[i] == 1) {
            out.labels[i] = 0;
            ++out.spec.flipped;
        }
    }

    std::size_t resulting_negatives = original_negatives + out.spec.flipped;
    out.spec.fraction_of_resulting_negatives =
        resulting_negatives ? static_cast<double>(out.spec.flipped) /
                                  static_cast<double>(resulting_negatives)
                            : 0.0;
    out.spec.fraction_of_original_negatives =
        original_negatives ? static_cast<double>(out.spec.flipped) /
                                 static_cast<double>(original_negatives)
                           : 0.0;
    out.degenerate =
        std::none_of(out.labels.begin(), out.labels.end(), [](int l) { return l == 1; });
    return out;
}

PriorEstimate estimate_feature_prior(const CorpusStore& store, const std::string& feature,
                                     Date window_start, Date window_end,
                                     const std::function<bool(const std::string&)>& has_feature,
                                     int label_horizon_days) {
    PriorEstimate est;
    est.feature = feature;
    est.window_start = window_start;
    est.window_end = window_end;
    std::size_t exploited = 0;
    for (const auto& id : store.vuln_ids()) {
        Date disclosure;
        try {
            disclosure = store.estimate_disclosure(id);
        } catch (const Error&) {
            continue;  // undatable: cannot be assigned to the window
        }
        if (disclosure < window_start || disclosure >= window_end) continue;
        if (!has_feature(id)) continue;
        ++est.n_instances;
        if (store.label(id, label_horizon_days) == 1) ++exploited;
    }
    if (est.n_instances == 0) {
        throw Error(Errc::bad_state,
                    "no vulnerability with feature " + feature + " in the estimation window");
    }
    est.prior = static_cast<double>(exploited) / static_cast<double>(est.n_instances);
    return est;
}

std::function<bool(const std::string&)> structured_feature_test(const CorpusStore& store,
                                                                const std::string& feature) {
    if (feature.rfind("cwe:", 0) == 0) {
        std::string cwe = feature.substr(4);
        return [&store, cwe](const std::string& id) {
            const VulnRecord* v = store.find_vuln(id);
            return v && std::find(v->cwe_ids.begin(), v->cwe_ids.end(), cwe) != v->cwe_ids.end();
        };
    }
    if (feature.rfind("cpe:", 0) == 0) {
        std::string product = feature.substr(4);
        return [&store, product](const std::string& id) {
            const VulnRecord* v = store.find_vuln(id);
            return v &&
                   std::find(v->products.begin(), v->products.end(), product) != v->products.end();
        };
    }
    throw Error(Errc::invalid_argument,
                "no structured membership test for feature namespace: " + feature);
}

Chi2Result chi2_from_table(const std::size_t table[2][2], std::size_t bonferroni_m, double alpha,
                           bool yates) {
    Chi2Result r;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) r.table[i][j] = table[i][j];
    }
    double a = static_cast<double>(table[0][0]);
    double b = static_cast<double>(table[0][1]);
    double c = static_cast<double>(table[1][0]);
    double d = static_cast<double>(table[1][1]);
    double row0 = a + b, row1 = c + d, col0 = a + c, col1 = b + d;
    double n = row0 + row1;
    if (row0 == 0.0 || row1 == 0.0 || col0 == 0.0 || col1 == 0.0) {
        r.outcome = Chi2Outcome::untestable;
        return r;
    }
    double det = a * d - b * c;
    if (yates) {
        double adj = std::max(0.0, std::abs(det) - n / 2.0);
        r.statistic = n * adj * adj / (row0 * row1 * col0 * col1);
    } else {
        r.statistic = n * det * det / (row0 * row1 * col0 * col1);
    }
    // Survival function of chi-squared with one degree of freedom.
    r.p_value = std::erfc(std::sqrt(r.statistic / 2.0));
    r.reject = r.p_value < alpha / static_cast<double>(std::max<std::size_t>(1, bonferroni_m));
    r.outcome = Chi2Outcome::tested;
    return r;
}

Chi2Result chi2_independence(const CorpusStore& store, const std::string& evidence_source,
                             const std::string& feature, std::size_t bonferroni_m, double alpha,
                             bool yates) {
    auto has_feature = structured_feature_test(store, feature);
    std::size_t table[2][2] = {{0, 0}, {0, 0}};
    for (const auto& id : store.vuln_ids()) {
        bool f = has_feature(id);
        bool in_source = false;
        for (const auto& e : store.evidence_of(id)) {
            if (e.source == evidence_source) {
                in_source = true;
                break;
            }
        }
        ++table[f ? 1 : 0][in_source ? 1 : 0];
    }
    return chi2_from_table(table, bonferroni_m, alpha, yates);
}

}  // namespace ee
