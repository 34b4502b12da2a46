#include <cmath>
#include <functional>

#include "doctest.h"
#include "ee/common.hpp"
#include "ee/model.hpp"
#include "ee/rng.hpp"

using namespace ee;

namespace {

MlpParams zero_params(std::size_t d, std::size_t h1, std::size_t h2) {
    MlpParams p;
    p.shape = {d, h1, h2};
    p.w1.assign(h1 * d, 0.0);
    p.b1.assign(h1, 0.0);
    p.w2.assign(h2 * h1, 0.0);
    p.b2.assign(h2, 0.0);
    p.w3.assign(h2, 0.0);
    p.b3 = 0.0;
    return p;
}

IndexedRow row_of(std::initializer_list<std::pair<std::uint32_t, double>> feats, int label) {
    IndexedRow r;
    r.label = label;
    for (auto& f : feats) r.features.push_back(f);
    return r;
}

std::vector<IndexedRow> random_batch(Rng& rng, std::size_t n, std::size_t d,
                                     bool both_classes = true) {
    std::vector<IndexedRow> batch;
    for (std::size_t i = 0; i < n; ++i) {
        IndexedRow r;
        r.label = both_classes ? static_cast<int>(i % 2) : 1;
        for (std::uint32_t k = 0; k < d; ++k) {
            if (rng.next_bernoulli(0.6)) {
                r.features.emplace_back(k, rng.next_uniform(-1.0, 1.0));
            }
        }
        batch.push_back(std::move(r));
    }
    return batch;
}

// Flat read/write access to every parameter, for finite differences.
std::vector<double*> flatten(MlpParams& p) {
    std::vector<double*> out;
    for (auto* vec : {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3}) {
        for (double& x : *vec) out.push_back(&x);
    }
    out.push_back(&p.b3);
    return out;
}

std::vector<double> flatten_grad(const Gradients& g) {
    std::vector<double> out;
    for (const auto* vec : {&g.w1, &g.b1, &g.w2, &g.b2, &g.w3}) {
        out.insert(out.end(), vec->begin(), vec->end());
    }
    out.push_back(g.b3);
    return out;
}

}  // namespace

TEST_CASE("init_params is deterministic per seed and shaped correctly") {
    MlpParams a = init_params({3, 500, 100}, 42);
    MlpParams b = init_params({3, 500, 100}, 42);
    MlpParams c = init_params({3, 500, 100}, 43);
    CHECK(a.w1.size() == 500 * 3);
    CHECK(a.w2.size() == 100 * 500);
    CHECK(a.w3.size() == 100);
    CHECK(a.content_hash() == b.content_hash());
    CHECK(a.content_hash() != c.content_hash());
    for (double x : a.b1) CHECK(x == 0.0);
    CHECK_THROWS_AS(init_params({0, 5, 3}, 1), Error);
}

TEST_CASE("forward: zero parameters give exactly 0.5") {
    MlpParams p = zero_params(4, 3, 2);
    CHECK(forward(p, row_of({{0, 1.0}, {3, 2.0}}, 1)) == 0.5);

    MlpParams q = init_params({4, 3, 2}, 7);
    std::fill(q.w3.begin(), q.w3.end(), 0.0);
    q.b3 = 0.0;
    CHECK(forward(q, row_of({{1, 5.0}}, 0)) == 0.5);
}

TEST_CASE("forward matches a hand-rolled dense evaluation") {
    MlpParams p = zero_params(2, 2, 2);
    p.w1 = {0.5, -0.25, 0.75, 1.0};
    p.b1 = {0.1, -0.2};
    p.w2 = {1.0, -1.0, 0.5, 0.25};
    p.b2 = {0.0, 0.3};
    p.w3 = {2.0, -1.5};
    p.b3 = 0.05;

    double x0 = 0.8, x1 = -0.4;
    double z10 = 0.5 * x0 - 0.25 * x1 + 0.1;
    double z11 = 0.75 * x0 + 1.0 * x1 - 0.2;
    double h10 = std::max(0.0, z10), h11 = std::max(0.0, z11);
    double z20 = 1.0 * h10 - 1.0 * h11 + 0.0;
    double z21 = 0.5 * h10 + 0.25 * h11 + 0.3;
    double h20 = std::max(0.0, z20), h21 = std::max(0.0, z21);
    double z3 = 2.0 * h20 - 1.5 * h21 + 0.05;
    double expected = 1.0 / (1.0 + std::exp(-z3));

    CHECK(forward(p, row_of({{0, x0}, {1, x1}}, 1)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("forward rejects out-of-range feature indices") {
    MlpParams p = zero_params(2, 2, 2);
    CHECK_THROWS_AS(forward(p, row_of({{5, 1.0}}, 0)), Error);
}

TEST_CASE("BCE at p=0.5 is ln 2") {
    MlpParams p = zero_params(2, 2, 2);
    LossSpec spec;
    spec.kind = LossKind::BCE;
    double l = loss({row_of({{0, 1.0}}, 1)}, p, spec);
    CHECK(l == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("FC with zero prior equals BCE bitwise, loss and gradients") {
    Rng rng(3);
    MlpParams p = init_params({7, 5, 3}, 11);
    auto batch = random_batch(rng, 32, 7);

    LossSpec bce{LossKind::BCE, 1.0, 0.0, {}};
    LossSpec fc{LossKind::FC, 1.0, 0.0, {}};
    CHECK(loss(batch, p, bce) == loss(batch, p, fc));

    auto gb = flatten_grad(loss_grad(batch, p, bce));
    auto gf = flatten_grad(loss_grad(batch, p, fc));
    REQUIRE(gb.size() == gf.size());
    for (std::size_t i = 0; i < gb.size(); ++i) CHECK(gb[i] == gf[i]);
}

TEST_CASE("FFC with an empty prior table equals BCE bitwise") {
    Rng rng(5);
    MlpParams p = init_params({7, 5, 3}, 13);
    auto batch = random_batch(rng, 32, 7);
    LossSpec bce{LossKind::BCE, 1.0, 0.0, {}};
    LossSpec ffc{LossKind::FFC, 1.0, 0.0, {}};
    CHECK(loss(batch, p, bce) == loss(batch, p, ffc));
    auto gb = flatten_grad(loss_grad(batch, p, bce));
    auto gf = flatten_grad(loss_grad(batch, p, ffc));
    for (std::size_t i = 0; i < gb.size(); ++i) CHECK(gb[i] == gf[i]);
}

TEST_CASE("FC negative-class term matches the direct formula") {
    // y=0, prior 0.3, p=0.8: -log(1 - 0.7*0.8) = -log 0.44.
    MlpParams p = zero_params(1, 2, 2);
    p.b3 = std::log(0.8 / 0.2);
    LossSpec fc{LossKind::FC, 1.0, 0.3, {}};
    double l = loss({row_of({{0, 1.0}}, 0)}, p, fc);
    CHECK(l == doctest::Approx(-std::log(0.44)).epsilon(1e-9));
    CHECK(l == doctest::Approx(0.8209805520698302).epsilon(1e-9));
}

TEST_CASE("FFC instance without prior-bearing features reduces to the BCE term") {
    MlpParams p = zero_params(2, 2, 2);
    p.b3 = 0.4;
    LossSpec ffc{LossKind::FFC, 1.0, 0.0, {{1u, 0.9}}};
    LossSpec bce{LossKind::BCE, 1.0, 0.0, {}};
    auto batch_without = {row_of({{0, 1.0}}, 0)};  // feature 1 absent
    CHECK(loss(batch_without, p, ffc) == loss(batch_without, p, bce));
    auto batch_with = {row_of({{1, 1.0}}, 0)};
    CHECK(loss(batch_with, p, ffc) < loss(batch_with, p, bce));
}

TEST_CASE("FC loss shape: rises in p and falls in the prior on negatives") {
    MlpParams p = zero_params(1, 2, 2);
    auto at = [&](double prob, double prior) {
        MlpParams q = p;
        q.b3 = std::log(prob / (1.0 - prob));
        LossSpec s{LossKind::FC, 1.0, prior, {}};
        return loss({row_of({{0, 1.0}}, 0)}, q, s);
    };
    CHECK(at(0.3, 0.4) < at(0.5, 0.4));
    CHECK(at(0.5, 0.4) < at(0.8, 0.4));
    CHECK(at(0.8, 0.0) >= at(0.8, 0.3));
    CHECK(at(0.8, 0.3) >= at(0.8, 0.7));
}

TEST_CASE("FC stays finite at prior 1 on a positive example") {
    MlpParams p = zero_params(1, 2, 2);
    LossSpec fc{LossKind::FC, 1.0, 1.0, {}};
    double l = loss({row_of({{0, 1.0}}, 1)}, p, fc);
    CHECK(std::isfinite(l));
}

TEST_CASE("analytic gradients agree with central finite differences") {
    Rng rng(17);
    const double h = 1e-6;
    const std::vector<LossSpec> specs = {
        {LossKind::BCE, 1.0, 0.0, {}},
        {LossKind::FC, 1.0, 0.35, {}},
        {LossKind::FFC, 1.0, 0.0, {{2u, 0.8}, {5u, 0.4}}},
        {LossKind::LR, 0.7, 0.25, {}},
    };
    for (const auto& spec : specs) {
        CAPTURE(to_string(spec.kind));
        MlpParams p = init_params({7, 5, 3}, 19 + static_cast<int>(spec.kind));
        // A generic point: zero biases would park dead units exactly on the
        // ReLU kink, where two-sided differences measure the wrong slope.
        for (double& b : p.b1) b = rng.next_uniform(-0.1, 0.1);
        for (double& b : p.b2) b = rng.next_uniform(-0.1, 0.1);
        p.b3 = rng.next_uniform(-0.1, 0.1);
        auto batch = random_batch(rng, 24, 7);
        Gradients g = loss_grad(batch, p, spec);
        auto grad_flat = flatten_grad(g);
        auto param_ptrs = flatten(p);
        REQUIRE(grad_flat.size() == param_ptrs.size());

        for (std::size_t trial = 0; trial < 40; ++trial) {
            std::size_t i = rng.next_below(param_ptrs.size());
            double orig = *param_ptrs[i];
            *param_ptrs[i] = orig + h;
            double up = loss(batch, p, spec);
            *param_ptrs[i] = orig - h;
            double down = loss(batch, p, spec);
            *param_ptrs[i] = orig;
            double fd = (up - down) / (2.0 * h);
            double denom = std::max({1e-8, std::abs(fd), std::abs(grad_flat[i])});
            CHECK(std::abs(fd - grad_flat[i]) / denom <= 1e-4);
        }
    }
}

TEST_CASE("BCE output-bias gradient is mean(p - y)") {
    Rng rng(23);
    MlpParams p = init_params({7, 5, 3}, 29);
    auto batch = random_batch(rng, 16, 7);
    double expected = 0.0;
    for (const auto& row : batch) expected += forward(p, row) - row.label;
    expected /= static_cast<double>(batch.size());
    Gradients g = loss_grad(batch, p, {LossKind::BCE, 1.0, 0.0, {}});
    CHECK(g.b3 == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("LR rejects single-class data; others warn") {
    std::vector<IndexedRow> ones = {row_of({{0, 1.0}}, 1), row_of({{1, 1.0}}, 1)};
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.shape = {0, 4, 2};
    CHECK_THROWS_AS(train(ones, 2, {LossKind::LR, 1.0, 0.2, {}}, cfg), Error);
    auto report = train(ones, 2, {LossKind::BCE, 1.0, 0.0, {}}, cfg);
    REQUIRE(report.warnings.size() == 1);
}

TEST_CASE("training separates a linearly separable fixture") {
    std::vector<IndexedRow> rows;
    for (int i = 0; i < 200; ++i) {
        int label = i % 2;
        rows.push_back(row_of({{label ? 0u : 1u, 1.0}}, label));
    }
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.learning_rate = 1e-3;
    cfg.seed = 5;
    cfg.shape = {0, 16, 8};
    auto report = train(rows, 2, {LossKind::BCE, 1.0, 0.0, {}}, cfg);

    int correct = 0;
    for (const auto& row : rows) {
        double p = forward(report.params, row);
        correct += (p >= 0.5) == (row.label == 1);
    }
    CHECK(static_cast<double>(correct) / rows.size() >= 0.95);

    int non_increasing = 0;
    for (std::size_t e = 1; e < report.epoch_losses.size(); ++e) {
        non_increasing += report.epoch_losses[e] <= report.epoch_losses[e - 1];
    }
    CHECK(non_increasing >= static_cast<int>(0.8 * (report.epoch_losses.size() - 1)));
}

TEST_CASE("training is deterministic per seed") {
    Rng rng(37);
    auto rows = random_batch(rng, 64, 7);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.learning_rate = 1e-3;
    cfg.seed = 99;
    cfg.shape = {0, 6, 4};
    auto a = train(rows, 7, {LossKind::FC, 1.0, 0.2, {}}, cfg);
    auto b = train(rows, 7, {LossKind::FC, 1.0, 0.2, {}}, cfg);
    CHECK(a.params.content_hash() == b.params.content_hash());
    cfg.seed = 100;
    auto c = train(rows, 7, {LossKind::FC, 1.0, 0.2, {}}, cfg);
    CHECK(a.params.content_hash() != c.params.content_hash());
}

TEST_CASE("model serialization round-trips bitwise and validates versions") {
    MlpParams p = init_params({5, 4, 3}, 41);
    LossSpec spec{LossKind::FFC, 1.5, 0.1, {{3u, 0.75}}};
    std::string js = model_to_json(p, spec, 41, {{"note", "fixture"}});
    LoadedModel back = model_from_json(js);
    CHECK(back.params.content_hash() == p.content_hash());
    CHECK(back.spec.kind == LossKind::FFC);
    CHECK(back.spec.feature_priors.at(3) == 0.75);
    CHECK(back.metadata.at("note") == "fixture");

    IndexedRow x = row_of({{0, 0.3}, {4, -0.7}}, 1);
    CHECK(forward(back.params, x) == forward(p, x));

    CHECK_THROWS_AS(model_from_json("{broken"), Error);
    std::string wrong_version = js;
    auto pos = wrong_version.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    wrong_version.replace(pos, 11, "\"version\":2");
    CHECK_THROWS_AS(model_from_json(wrong_version), Error);
}

TEST_CASE("scores live strictly inside (0,1)") {
    MlpParams p = init_params({6, 8, 4}, 47);
    Rng rng(53);
    for (int i = 0; i < 50; ++i) {
        IndexedRow r;
        for (std::uint32_t k = 0; k < 6; ++k) {
            r.features.emplace_back(k, rng.next_uniform(-100.0, 100.0));
        }
        double s = forward(p, r);
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
}
