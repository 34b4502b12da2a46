#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "ee/common.hpp"
#include "ee/eval.hpp"
#include "ee/rng.hpp"

using namespace ee;

namespace {

ScoredInstance inst(const std::string& id, double score, int label, int day = 0,
                    std::optional<int> delay = std::nullopt) {
    ScoredInstance s;
    s.vuln_id = id;
    s.score = score;
    s.label = label;
    s.disclosure = Date::parse("2015-01-01").plus_days(day);
    s.exploit_delay = delay;
    return s;
}

// O(n^2) Mann-Whitney oracle, written independently of the rank-based path.
double roc_auc_oracle(const ScoredSet& scored) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (const auto& pos : scored) {
        if (pos.label != 1 || !pos.score) continue;
        for (const auto& neg : scored) {
            if (neg.label != 0 || !neg.score) continue;
            ++pairs;
            if (*pos.score > *neg.score) wins += 1.0;
            else if (*pos.score == *neg.score) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Recount-based threshold table oracle.
std::vector<ThresholdPoint> sweep_oracle(const ScoredSet& scored) {
    std::set<double, std::greater<double>> thresholds;
    std::size_t total_pos = 0;
    for (const auto& s : scored) {
        if (s.score) thresholds.insert(*s.score);
        total_pos += s.label == 1;
    }
    std::vector<ThresholdPoint> out;
    for (double t : thresholds) {
        std::size_t tp = 0, fp = 0;
        for (const auto& s : scored) {
            if (!s.score || *s.score < t) continue;
            if (s.label == 1) ++tp;
            else ++fp;
        }
        if (tp + fp == 0) continue;
        out.push_back({t, static_cast<double>(tp) / static_cast<double>(tp + fp),
                       static_cast<double>(tp) / static_cast<double>(total_pos)});
    }
    return out;
}

double pr_auc_oracle(const ScoredSet& scored) {
    auto pts = sweep_oracle(scored);
    double auc = 0.0, prev = 0.0;
    for (const auto& p : pts) {
        auc += (p.recall - prev) * p.precision;
        prev = p.recall;
    }
    return auc;
}

ScoredSet random_scored(Rng& rng, std::size_t n, int max_score_bucket = 0) {
    ScoredSet out;
    for (std::size_t i = 0; i < n; ++i) {
        double score = max_score_bucket > 0
                           ? static_cast<double>(rng.next_int(0, max_score_bucket)) /
                                 max_score_bucket
                           : rng.next_double();
        out.push_back(inst("V" + std::to_string(i), score, rng.next_bernoulli(0.4) ? 1 : 0,
                           rng.next_int(0, 60)));
    }
    bool has_pos = false, has_neg = false;
    for (const auto& s : out) (s.label ? has_pos : has_neg) = true;
    if (!has_pos) out[0].label = 1;
    if (!has_neg) out[1].label = 0;
    return out;
}

}  // namespace

TEST_CASE("threshold sweep endpoints") {
    ScoredSet s = {inst("a", 0.9, 1), inst("b", 0.5, 0), inst("c", 0.2, 1)};
    auto pts = threshold_sweep(s);
    CHECK(pts.back().recall == 1.0);

    ScoredSet perfect = {inst("a", 0.9, 1), inst("b", 0.8, 1), inst("c", 0.2, 0)};
    auto ppts = threshold_sweep(perfect);
    bool found = false;
    for (const auto& p : ppts) {
        if (p.recall == 1.0 && p.precision == 1.0) found = true;
    }
    CHECK(found);
}

TEST_CASE("threshold sweep hand-counted point") {
    ScoredSet s = {inst("a", 0.9, 1), inst("b", 0.8, 0), inst("c", 0.7, 1)};
    auto pts = threshold_sweep(s);
    REQUIRE(pts.size() == 3);
    CHECK(pts[1].threshold == 0.8);
    CHECK(pts[1].precision == 0.5);
    CHECK(pts[1].recall == 0.5);
}

TEST_CASE("threshold sweep requires positives") {
    ScoredSet s = {inst("a", 0.9, 0)};
    CHECK_THROWS_AS(threshold_sweep(s), Error);
}

TEST_CASE("unscored instances depress recall but never precision") {
    ScoredSet s = {inst("a", 0.9, 1), inst("b", 0.8, 0), inst("c", 0.0, 1)};
    s[2].score = std::nullopt;
    auto pts = threshold_sweep(s);
    CHECK(pts.back().recall == doctest::Approx(0.5));
    for (const auto& p : pts) CHECK(p.precision <= 1.0);
}

TEST_CASE("ROC-AUC: all-tied scores give exactly one half") {
    ScoredSet s;
    for (int i = 0; i < 20; ++i) s.push_back(inst("v" + std::to_string(i), 0.7, i % 2));
    CHECK(auc_roc(s) == 0.5);
}

TEST_CASE("perfect ranking gives AUC 1 on both curves") {
    ScoredSet s = {inst("a", 0.9, 1), inst("b", 0.8, 1), inst("c", 0.3, 0), inst("d", 0.2, 0)};
    CHECK(auc_roc(s) == 1.0);
    CHECK(auc_pr(s) == 1.0);
}

TEST_CASE("single-class input is an error for AUC") {
    ScoredSet s = {inst("a", 0.9, 1), inst("b", 0.8, 1)};
    CHECK_THROWS_AS(auc_roc(s), Error);
}

TEST_CASE("rank-based ROC-AUC equals the pairwise oracle on random fixtures") {
    Rng rng(71);
    for (int rep = 0; rep < 30; ++rep) {
        ScoredSet s = random_scored(rng, 300, rep % 3 == 0 ? 7 : 0);
        CHECK(std::abs(auc_roc(s) - roc_auc_oracle(s)) <= 1e-9);
    }
}

TEST_CASE("threshold table and PR-AUC match the recount oracle") {
    Rng rng(73);
    for (int rep = 0; rep < 20; ++rep) {
        ScoredSet s = random_scored(rng, 200, rep % 2 ? 9 : 0);
        auto fast = threshold_sweep(s);
        auto slow = sweep_oracle(s);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(fast[i].threshold == slow[i].threshold);
            CHECK(fast[i].precision == doctest::Approx(slow[i].precision).epsilon(1e-12));
            CHECK(fast[i].recall == doctest::Approx(slow[i].recall).epsilon(1e-12));
        }
        CHECK(std::abs(auc_pr(s) - pr_auc_oracle(s)) <= 1e-9);
    }
}

TEST_CASE("ROC-AUC is invariant under strictly monotone score transforms") {
    Rng rng(79);
    ScoredSet s = random_scored(rng, 150);
    double base = auc_roc(s);
    ScoredSet warped = s;
    for (auto& w : warped) w.score = std::exp(3.0 * *w.score) + 7.0;
    CHECK(auc_roc(warped) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("prioritization error: corner cases and ties") {
    CHECK(*prioritization_error(0.9, 1, {{0.5, 0}, {0.4, 0}}) == 0.0);
    CHECK(*prioritization_error(0.1, 1, {{0.5, 0}, {0.6, 0}, {0.7, 0}, {0.8, 0}}) == 1.0);
    CHECK(*prioritization_error(0.5, 1, {{0.5, 0}}) == 1.0);
    CHECK(*prioritization_error(0.5, 0, {{0.5, 1}}) == 1.0);
    CHECK_FALSE(prioritization_error(0.5, 1, {}).has_value());
}

TEST_CASE("prioritization error equals a brute-force loop on a mixed set") {
    Rng rng(83);
    for (int rep = 0; rep < 50; ++rep) {
        double si = rng.next_double();
        int li = rng.next_bernoulli(0.5) ? 1 : 0;
        std::vector<std::pair<double, int>> s;
        for (int k = 0; k < 10; ++k) {
            s.emplace_back(static_cast<double>(rng.next_int(0, 4)) / 4.0,
                           rng.next_bernoulli(0.5) ? 1 : 0);
        }
        std::size_t bad = 0;
        for (auto& [sj, lj] : s) {
            if (li == 1 && lj == 0 && sj >= si) ++bad;
            if (li == 0 && lj == 1 && sj <= si) ++bad;
        }
        CHECK(*prioritization_error(si, li, s) ==
              doctest::Approx(static_cast<double>(bad) / s.size()));
    }
}

TEST_CASE("raising an exploited instance's score never increases its error") {
    Rng rng(89);
    std::vector<std::pair<double, int>> s;
    for (int k = 0; k < 40; ++k) {
        s.emplace_back(rng.next_double(), rng.next_bernoulli(0.5) ? 1 : 0);
    }
    double prev = 1.0;
    for (double score = 0.0; score <= 1.0; score += 0.05) {
        double err = *prioritization_error(score, 1, s);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
}

TEST_CASE("prioritization curve: t=0 has empty windows; basic pair works") {
    ScoredSet pair = {inst("early", 0.3, 1, 0), inst("late", 0.1, 0, 3)};
    auto curve = prioritization_curve(pair, 5);
    REQUIRE(curve.size() == 6);
    CHECK(curve[0].n_exploited == 0);
    CHECK(curve[0].skipped_empty_s == 2);

    CHECK(curve[3].n_exploited == 1);
    CHECK(*curve[3].mean_exploited == 0.0);
    CHECK(curve[3].skipped_empty_s == 1);
}

TEST_CASE("prioritization curve equals brute-force recomputation") {
    Rng rng(97);
    ScoredSet s = random_scored(rng, 50);
    auto curve = prioritization_curve(s, 10);
    for (const auto& point : curve) {
        double sum_pos = 0.0, sum_neg = 0.0;
        std::size_t n_pos = 0, n_neg = 0, skipped = 0;
        for (const auto& i : s) {
            std::vector<std::pair<double, int>> window;
            for (const auto& j : s) {
                if (&i == &j) continue;
                int gap = j.disclosure - i.disclosure;
                if (gap > 0 && gap <= point.window_days) window.emplace_back(*j.score, j.label);
            }
            if (window.empty()) {
                ++skipped;
                continue;
            }
            double err = *prioritization_error(*i.score, i.label, window);
            if (i.label == 1) {
                sum_pos += err;
                ++n_pos;
            } else {
                sum_neg += err;
                ++n_neg;
            }
        }
        CHECK(point.n_exploited == n_pos);
        CHECK(point.n_non_exploited == n_neg);
        CHECK(point.skipped_empty_s == skipped);
        if (n_pos) CHECK(*point.mean_exploited == doctest::Approx(sum_pos / n_pos));
        if (n_neg) CHECK(*point.mean_non_exploited == doctest::Approx(sum_neg / n_neg));
    }
}

TEST_CASE("prioritization stats") {
    auto stats = prioritization_stats({0.0, 0.5, 1.0, 0.5});
    CHECK(stats.mean == doctest::Approx(0.5));
    CHECK(stats.median == 0.5);
    CHECK(stats.n == 4);
}

TEST_CASE("time-varying AUC: degenerate horizons are undefined") {
    ScoredSet s = {inst("a", 0.9, 1, 0, 3), inst("b", 0.4, 1, 0, 5)};
    CHECK_FALSE(time_varying_auc(s, 10).has_value());
    CHECK_FALSE(time_varying_auc(s, 1).has_value());
}

TEST_CASE("time-varying AUC: scores aligned with delays give 1") {
    ScoredSet s;
    for (int i = 0; i < 10; ++i) {
        s.push_back(inst("v" + std::to_string(i), 1.0 - 0.05 * i, 1, 0, 2 + 3 * i));
    }
    auto auc = time_varying_auc(s, 15);
    REQUIRE(auc.has_value());
    CHECK(*auc == 1.0);
}

TEST_CASE("time-varying AUC equals brute-force pairwise computation on a sweep") {
    Rng rng(101);
    ScoredSet s;
    for (int i = 0; i < 20; ++i) {
        s.push_back(inst("v" + std::to_string(i), rng.next_double(), 1, 0, rng.next_int(1, 40)));
    }
    for (int t = 1; t <= 40; ++t) {
        std::vector<double> pos, neg;
        for (const auto& i : s) {
            (*i.exploit_delay <= t ? pos : neg).push_back(*i.score);
        }
        auto fast = time_varying_auc(s, t);
        if (pos.empty() || neg.empty()) {
            CHECK_FALSE(fast.has_value());
            continue;
        }
        double wins = 0.0;
        for (double p : pos) {
            for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
        }
        double oracle = wins / (static_cast<double>(pos.size()) * neg.size());
        REQUIRE(fast.has_value());
        CHECK(std::abs(*fast - oracle) <= 1e-9);
    }
}

TEST_CASE("when the horizon reproduces the labels, tv-AUC equals plain ROC-AUC") {
    Rng rng(103);
    ScoredSet s;
    for (int i = 0; i < 60; ++i) {
        int label = rng.next_bernoulli(0.5) ? 1 : 0;
        s.push_back(inst("v" + std::to_string(i), rng.next_double(), label, 0,
                         label ? rng.next_int(1, 30) : rng.next_int(31, 90)));
    }
    auto tv = time_varying_auc(s, 30);
    REQUIRE(tv.has_value());
    CHECK(*tv == doctest::Approx(auc_roc(s)).epsilon(1e-12));
}

TEST_CASE("timestamp noise protocol: rho 0 and the no-op substitution are identities") {
    Rng rng(107);
    ScoredSet s;
    for (int i = 0; i < 30; ++i) {
        int delay = rng.next_int(1, 40);
        auto x = inst("v" + std::to_string(i), rng.next_double(), 1, 0, delay);
        x.poc_delay = delay;  // PoC dates equal exploit dates
        s.push_back(x);
    }
    std::vector<int> horizons = {5, 10, 20, 30, 40};
    auto base = time_varying_auc_series(s, horizons);

    auto rho0 = timestamp_noise_protocol(s, horizons, 0.0, 42);
    auto rho1 = timestamp_noise_protocol(s, horizons, 1.0, 42);
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        CHECK(rho0.auc[i].has_value() == base.auc[i].has_value());
        if (base.auc[i]) {
            CHECK(*rho0.auc[i] == doctest::Approx(*base.auc[i]).epsilon(1e-12));
            CHECK(*rho1.auc[i] == doctest::Approx(*base.auc[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("timestamp noise protocol is deterministic per seed and validates input") {
    Rng rng(109);
    ScoredSet s;
    for (int i = 0; i < 40; ++i) {
        auto x = inst("v" + std::to_string(i), rng.next_double(), 1, 0, rng.next_int(20, 60));
        x.poc_delay = rng.next_int(0, 10);
        s.push_back(x);
    }
    std::vector<int> horizons = {5, 15, 30, 45, 60};
    auto a = timestamp_noise_protocol(s, horizons, 0.5, 7);
    auto b = timestamp_noise_protocol(s, horizons, 0.5, 7);
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        CHECK(a.auc[i].has_value() == b.auc[i].has_value());
        if (a.auc[i]) CHECK(*a.auc[i] == *b.auc[i]);
    }
    ScoredSet no_pocs = s;
    for (auto& x : no_pocs) x.poc_delay = std::nullopt;
    CHECK_THROWS_AS(timestamp_noise_protocol(no_pocs, horizons, 0.5, 7), Error);
}

TEST_CASE("curve operations are order-invariant") {
    Rng rng(113);
    ScoredSet s = random_scored(rng, 80);
    ScoredSet shuffled = s;
    std::vector<std::size_t> perm(s.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = s[perm[i]];

    CHECK(auc_roc(s) == auc_roc(shuffled));
    CHECK(auc_pr(s) == doctest::Approx(auc_pr(shuffled)).epsilon(1e-12));
    auto a = threshold_sweep(s);
    auto b = threshold_sweep(shuffled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].threshold == b[i].threshold);
        CHECK(a[i].precision == b[i].precision);
        CHECK(a[i].recall == b[i].recall);
    }
}

TEST_CASE("report serialization includes curves and AUCs") {
    Rng rng(127);
    ScoredSet s = random_scored(rng, 40);
    EvalReport report;
    report.pr_points = threshold_sweep(s);
    report.roc_points = roc_points(s);
    report.pr_auc = auc_pr(s);
    report.roc_auc = auc_roc(s);
    std::string js = report.to_json();
    CHECK(js.find("\"roc_auc\"") != std::string::npos);
    CHECK(js.find("\"pr_points\"") != std::string::npos);
    CHECK(report.pr_csv().find("threshold,precision,recall") == 0);
    CHECK(report.roc_csv().find("fpr,tpr") == 0);
}
