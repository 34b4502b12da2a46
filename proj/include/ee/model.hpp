#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ee/rng.hpp"

namespace ee {

// A row of the design matrix in index/value form, ready for the network.
struct IndexedRow {
    std::vector<std::pair<std::uint32_t, double>> features;
    int label = 0;
};

enum class LossKind { BCE, LR, FC, FFC };

const char* to_string(LossKind k);
std::optional<LossKind> loss_kind_from_string(const std::string& s);

// Which loss to train with, plus its noise priors. FC and FFC realize the
// transition matrix [[1, 0], [p, 1-p]]: negatives may hide positives, the
// reverse never happens. FFC looks the prior up from the instance's
// features; an instance carrying several prior-bearing features uses the
// largest prior.
struct LossSpec {
    LossKind kind = LossKind::BCE;
    double lambda = 1.0;        // LR regularization strength
    double class_prior = 0.0;   // p for LR and FC
    std::map<std::uint32_t, double> feature_priors;  // feature index -> p_f (FFC)

    std::optional<double> prior_of(const IndexedRow& row) const;
};

struct MlpShape {
    std::size_t input_dim = 0;
    std::size_t hidden1 = 500;
    std::size_t hidden2 = 100;
};

// Two ReLU hidden layers and a logistic output unit. Weights are stored
// row-major; the first layer multiply is sparse-aware.
struct MlpParams {
    MlpShape shape;
    std::vector<double> w1, b1;  // hidden1 x input_dim, hidden1
    std::vector<double> w2, b2;  // hidden2 x hidden1, hidden2
    std::vector<double> w3;      // hidden2
    double b3 = 0.0;

    std::size_t parameter_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + 1;
    }
    std::uint64_t content_hash() const;
};

// He-uniform weights, zero biases; deterministic per seed.
MlpParams init_params(MlpShape shape, std::uint64_t seed);

// Output probability in (0,1).
double forward(const MlpParams& params, const IndexedRow& row);

// Mean loss over the batch. Probabilities are clamped to
// [1e-7, 1 - 1e-7] (and so are the corrected log arguments), which keeps
// FC/FFC finite even at prior 1.
double loss(const std::vector<IndexedRow>& batch, const MlpParams& params, const LossSpec& spec);

struct Gradients {
    std::vector<double> w1, b1, w2, b2, w3;
    double b3 = 0.0;
};

// Analytic gradient of `loss` with respect to every parameter.
Gradients loss_grad(const std::vector<IndexedRow>& batch, const MlpParams& params,
                    const LossSpec& spec);

struct TrainConfig {
    int epochs = 20;
    int batch_size = 128;
    double learning_rate = 5e-6;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 1;
    bool shuffle = true;
    MlpShape shape;  // input_dim filled by train()
};

struct TrainReport {
    MlpParams params;
    std::vector<double> epoch_losses;
    std::vector<std::string> warnings;
};

// ADAM minimization; single-threaded and deterministic for a given seed.
// The trailing short batch is kept, with its loss averaged over its true
// size. LR refuses single-class data (its regularizer needs negatives);
// other losses train with a warning.
TrainReport train(const std::vector<IndexedRow>& rows, std::size_t input_dim,
                  const LossSpec& spec, const TrainConfig& config);

// Versioned JSON round-trip; byte-exact parameters.
std::string model_to_json(const MlpParams& params, const LossSpec& spec, std::uint64_t seed,
                          const std::map<std::string, std::string>& metadata);
struct LoadedModel {
    MlpParams params;
    LossSpec spec;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> metadata;
};
LoadedModel model_from_json(const std::string& text);

}  // namespace ee
