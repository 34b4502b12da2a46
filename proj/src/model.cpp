#include "ee/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ee/common.hpp"
#include "json.hpp"

namespace ee {

using nlohmann::json;

namespace {

constexpr double kProbEps = 1e-7;

double clamp_prob(double p) { return std::min(1.0 - kProbEps, std::max(kProbEps, p)); }

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

struct Activations {
    std::vector<double> z1, h1;  // pre/post first layer
    std::vector<double> z2, h2;
    double z3 = 0.0;
    double p = 0.0;
};

void forward_pass(const MlpParams& params, const IndexedRow& row, Activations& act) {
    const auto& s = params.shape;
    act.z1.assign(s.hidden1, 0.0);
    for (std::size_t i = 0; i < s.hidden1; ++i) act.z1[i] = params.b1[i];
    for (const auto& [idx, val] : row.features) {
        if (idx >= s.input_dim) throw Error(Errc::invalid_argument, "feature index out of range");
        const double* col = params.w1.data() + idx;
        for (std::size_t i = 0; i < s.hidden1; ++i) {
            act.z1[i] += col[i * s.input_dim] * val;
        }
    }
    act.h1 = act.z1;
    for (double& h : act.h1) h = std::max(0.0, h);

    act.z2.assign(s.hidden2, 0.0);
    for (std::size_t i = 0; i < s.hidden2; ++i) {
        double acc = params.b2[i];
        const double* w = params.w2.data() + i * s.hidden1;
        for (std::size_t k = 0; k < s.hidden1; ++k) acc += w[k] * act.h1[k];
        act.z2[i] = acc;
    }
    act.h2 = act.z2;
    for (double& h : act.h2) h = std::max(0.0, h);

    double z3 = params.b3;
    for (std::size_t k = 0; k < s.hidden2; ++k) z3 += params.w3[k] * act.h2[k];
    act.z3 = z3;
    act.p = sigmoid(z3);
}

// Per-instance loss term at clamped probability pc given the effective
// prior (0 means plain BCE; BCE shares this code path so that FC with
// prior 0 is bit-identical to it).
double corrected_term(int label, double pc, double prior) {
    double scale = 1.0 - prior;
    if (label == 1) {
        return -std::log(clamp_prob(scale * pc));
    }
    return -std::log(clamp_prob(1.0 - scale * pc));
}

// d(term)/dp at clamped probability pc.
double corrected_term_dp(int label, double pc, double prior) {
    double scale = 1.0 - prior;
    if (label == 1) {
        double arg = scale * pc;
        if (arg <= kProbEps || arg >= 1.0 - kProbEps) return 0.0;  // clamp active
        return -1.0 / pc;
    }
    double arg = 1.0 - scale * pc;
    if (arg <= kProbEps || arg >= 1.0 - kProbEps) return 0.0;
    return scale / arg;
}

double effective_prior(const LossSpec& spec, const IndexedRow& row) {
    switch (spec.kind) {
        case LossKind::BCE:
            return 0.0;
        case LossKind::FC:
            return row.label == 0 ? spec.class_prior : 0.0;
        case LossKind::FFC: {
            if (row.label != 0) return 0.0;
            auto p = spec.prior_of(row);
            return p ? *p : 0.0;
        }
        case LossKind::LR:
            return 0.0;  // handled separately
    }
    return 0.0;
}

double bernoulli_kl(double p, double q) {
    // KL(p || q) with the 0 log 0 = 0 convention; q is clamped by callers.
    double kl = 0.0;
    if (p > 0.0) kl += p * std::log(p / q);
    if (p < 1.0) kl += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return kl;
}

}  // namespace

const char* to_string(LossKind k) {
    switch (k) {
        case LossKind::BCE: return "bce";
        case LossKind::LR: return "lr";
        case LossKind::FC: return "fc";
        case LossKind::FFC: return "ffc";
    }
    return "?";
}

std::optional<LossKind> loss_kind_from_string(const std::string& s) {
    std::string l = to_lower(s);
    if (l == "bce") return LossKind::BCE;
    if (l == "lr") return LossKind::LR;
    if (l == "fc") return LossKind::FC;
    if (l == "ffc") return LossKind::FFC;
    return std::nullopt;
}

std::optional<double> LossSpec::prior_of(const IndexedRow& row) const {
    std::optional<double> best;
    for (const auto& [idx, _] : row.features) {
        auto it = feature_priors.find(idx);
        if (it != feature_priors.end() && (!best || it->second > *best)) best = it->second;
    }
    return best;
}

MlpParams init_params(MlpShape shape, std::uint64_t seed) {
    if (shape.input_dim == 0) throw Error(Errc::invalid_argument, "input dimension must be >= 1");
    MlpParams p;
    p.shape = shape;
    Rng rng(seed);
    auto he_uniform = [&](std::vector<double>& w, std::size_t rows, std::size_t cols) {
        w.resize(rows * cols);
        double limit = std::sqrt(6.0 / static_cast<double>(cols));
        for (double& x : w) x = rng.next_uniform(-limit, limit);
    };
    he_uniform(p.w1, shape.hidden1, shape.input_dim);
    he_uniform(p.w2, shape.hidden2, shape.hidden1);
    he_uniform(p.w3, 1, shape.hidden2);
    p.b1.assign(shape.hidden1, 0.0);
    p.b2.assign(shape.hidden2, 0.0);
    p.b3 = 0.0;
    return p;
}

std::uint64_t MlpParams::content_hash() const {
    auto hash_span = [](std::uint64_t h, const std::vector<double>& v) {
        return fnv1a64(std::string_view(reinterpret_cast<const char*>(v.data()),
                                        v.size() * sizeof(double)),
                       h);
    };
    std::uint64_t h = fnv1a64("mlp");
    h = hash_span(h, w1);
    h = hash_span(h, b1);
    h = hash_span(h, w2);
    h = hash_span(h, b2);
    h = hash_span(h, w3);
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&b3), sizeof(double)), h);
    return h;
}

double forward(const MlpParams& params, const IndexedRow& row) {
    Activations act;
    forward_pass(params, row, act);
    return act.p;
}

double loss(const std::vector<IndexedRow>& batch, const MlpParams& params, const LossSpec& spec) {
    if (batch.empty()) throw Error(Errc::invalid_argument, "empty batch");
    const double n = static_cast<double>(batch.size());
    Activations act;

    if (spec.kind == LossKind::LR) {
        double positive_ll = 0.0;
        double neg_sum = 0.0;
        std::size_t neg_count = 0;
        for (const auto& row : batch) {
            forward_pass(params, row, act);
            double pc = clamp_prob(act.p);
            if (row.label == 1) {
                positive_ll += -std::log(pc);
            } else {
                neg_sum += pc;
                ++neg_count;
            }
        }
        double total = positive_ll / n;
        if (neg_count > 0) {
            double p_hat = clamp_prob(neg_sum / static_cast<double>(neg_count));
            total += spec.lambda * bernoulli_kl(spec.class_prior, p_hat);
        }
        return total;
    }

    double total = 0.0;
    for (const auto& row : batch) {
        forward_pass(params, row, act);
        total += corrected_term(row.label, clamp_prob(act.p), effective_prior(spec, row));
    }
    return total / n;
}

Gradients loss_grad(const std::vector<IndexedRow>& batch, const MlpParams& params,
                    const LossSpec& spec) {
    if (batch.empty()) throw Error(Errc::invalid_argument, "empty batch");
    const auto& s = params.shape;
    Gradients g;
    g.w1.assign(params.w1.size(), 0.0);
    g.b1.assign(params.b1.size(), 0.0);
    g.w2.assign(params.w2.size(), 0.0);
    g.b2.assign(params.b2.size(), 0.0);
    g.w3.assign(params.w3.size(), 0.0);

    const double n = static_cast<double>(batch.size());

    // For LR the KL term couples instances through the mean negative
    // probability; precompute it.
    double p_hat = 0.0, dkl_dphat = 0.0;
    std::size_t neg_count = 0;
    bool p_hat_clamped = false;
    if (spec.kind == LossKind::LR) {
        Activations act;
        double neg_sum = 0.0;
        for (const auto& row : batch) {
            if (row.label != 0) continue;
            forward_pass(params, row, act);
            neg_sum += clamp_prob(act.p);
            ++neg_count;
        }
        if (neg_count > 0) {
            double raw = neg_sum / static_cast<double>(neg_count);
            p_hat = clamp_prob(raw);
            p_hat_clamped = raw != p_hat;
            // d KL(prior || p_hat) / d p_hat
            dkl_dphat = -spec.class_prior / p_hat + (1.0 - spec.class_prior) / (1.0 - p_hat);
        }
    }

    Activations act;
    for (const auto& row : batch) {
        forward_pass(params, row, act);
        double pc = clamp_prob(act.p);
        bool out_clamped = act.p != pc;

        double dl_dp;
        if (spec.kind == LossKind::LR) {
            dl_dp = 0.0;
            if (row.label == 1) {
                dl_dp = -1.0 / pc / n;
            } else if (neg_count > 0 && !p_hat_clamped) {
                dl_dp = spec.lambda * dkl_dphat / static_cast<double>(neg_count);
            }
        } else {
            dl_dp = corrected_term_dp(row.label, pc, effective_prior(spec, row)) / n;
        }
        if (out_clamped) dl_dp = 0.0;

        double delta3 = dl_dp * act.p * (1.0 - act.p);
        for (std::size_t k = 0; k < s.hidden2; ++k) g.w3[k] += delta3 * act.h2[k];
        g.b3 += delta3;

        std::vector<double> delta2(s.hidden2, 0.0);
        for (std::size_t i = 0; i < s.hidden2; ++i) {
            if (act.z2[i] > 0.0) delta2[i] = params.w3[i] * delta3;
        }
        for (std::size_t i = 0; i < s.hidden2; ++i) {
            if (delta2[i] == 0.0) continue;
            double* gw = g.w2.data() + i * s.hidden1;
            for (std::size_t k = 0; k < s.hidden1; ++k) gw[k] += delta2[i] * act.h1[k];
            g.b2[i] += delta2[i];
        }

        std::vector<double> delta1(s.hidden1, 0.0);
        for (std::size_t k = 0; k < s.hidden1; ++k) {
            if (act.z1[k] <= 0.0) continue;
            double acc = 0.0;
            for (std::size_t i = 0; i < s.hidden2; ++i) {
                if (delta2[i] != 0.0) acc += params.w2[i * s.hidden1 + k] * delta2[i];
            }
            delta1[k] = acc;
        }
        for (std::size_t k = 0; k < s.hidden1; ++k) {
            if (delta1[k] == 0.0) continue;
            g.b1[k] += delta1[k];
            double* gw = g.w1.data() + k * s.input_dim;
            for (const auto& [idx, val] : row.features) gw[idx] += delta1[k] * val;
        }
    }
    return g;
}

TrainReport train(const std::vector<IndexedRow>& rows, std::size_t input_dim,
                  const LossSpec& spec, const TrainConfig& config) {
    if (rows.empty()) throw Error(Errc::invalid_argument, "empty training set");
    std::size_t positives = 0;
    for (const auto& r : rows) positives += r.label == 1;
    TrainReport report;
    if (positives == 0 || positives == rows.size()) {
        if (spec.kind == LossKind::LR) {
            throw Error(Errc::invalid_argument,
                        "LR loss needs both classes: its regularizer is undefined otherwise");
        }
        report.warnings.push_back("training data contains a single class");
    }

    MlpShape shape = config.shape;
    shape.input_dim = input_dim;
    MlpParams params = init_params(shape, config.seed);

    struct AdamState {
        std::vector<double> m, v;
    };
    auto make_state = [](std::size_t size) {
        AdamState s;
        s.m.assign(size, 0.0);
        s.v.assign(size, 0.0);
        return s;
    };
    AdamState sw1 = make_state(params.w1.size()), sb1 = make_state(params.b1.size());
    AdamState sw2 = make_state(params.w2.size()), sb2 = make_state(params.b2.size());
    AdamState sw3 = make_state(params.w3.size()), sb3 = make_state(1);

    Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);

    long long step = 0;
    auto adam_update = [&](std::vector<double>& w, const std::vector<double>& grad,
                           AdamState& st) {
        double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
        double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < w.size(); ++i) {
            st.m[i] = config.adam_beta1 * st.m[i] + (1.0 - config.adam_beta1) * grad[i];
            st.v[i] = config.adam_beta2 * st.v[i] + (1.0 - config.adam_beta2) * grad[i] * grad[i];
            double mhat = st.m[i] / bc1;
            double vhat = st.v[i] / bc2;
            w[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_epsilon);
        }
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < rows.size(); start += config.batch_size) {
            std::size_t end = std::min(rows.size(), start + config.batch_size);
            std::vector<IndexedRow> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(rows[order[i]]);

            epoch_loss += loss(batch, params, spec);
            Gradients g = loss_grad(batch, params, spec);
            ++step;
            adam_update(params.w1, g.w1, sw1);
            adam_update(params.b1, g.b1, sb1);
            adam_update(params.w2, g.w2, sw2);
            adam_update(params.b2, g.b2, sb2);
            adam_update(params.w3, g.w3, sw3);
            std::vector<double> b3v{params.b3}, gb3v{g.b3};
            adam_update(b3v, gb3v, sb3);
            params.b3 = b3v[0];
            ++batches;
        }
        report.epoch_losses.push_back(batches ? epoch_loss / static_cast<double>(batches) : 0.0);
    }
    report.params = std::move(params);
    return report;
}

std::string model_to_json(const MlpParams& params, const LossSpec& spec, std::uint64_t seed,
                          const std::map<std::string, std::string>& metadata) {
    json j;
    j["format"] = "ee.model";
    j["version"] = 1;
    j["arch"] = {{"input_dim", params.shape.input_dim},
                 {"hidden1", params.shape.hidden1},
                 {"hidden2", params.shape.hidden2}};
    j["loss"] = {{"kind", to_string(spec.kind)},
                 {"lambda", spec.lambda},
                 {"class_prior", spec.class_prior}};
    json fp = json::object();
    for (const auto& [idx, p] : spec.feature_priors) fp[std::to_string(idx)] = p;
    j["loss"]["feature_priors"] = std::move(fp);
    j["seed"] = seed;
    j["params"] = {{"w1", params.w1}, {"b1", params.b1}, {"w2", params.w2},
                   {"b2", params.b2}, {"w3", params.w3}, {"b3", params.b3}};
    j["metadata"] = metadata;
    return j.dump();
}

LoadedModel model_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse, "model file: invalid JSON");
    if (j.value("format", "") != "ee.model")
        throw Error(Errc::parse, "model file: unrecognized format");
    if (j.value("version", 0) != 1)
        throw Error(Errc::version_mismatch, "model file: unsupported version");
    LoadedModel out;
    try {
        out.params.shape.input_dim = j.at("arch").at("input_dim").get<std::size_t>();
        out.params.shape.hidden1 = j.at("arch").at("hidden1").get<std::size_t>();
        out.params.shape.hidden2 = j.at("arch").at("hidden2").get<std::size_t>();
        auto kind = loss_kind_from_string(j.at("loss").at("kind").get<std::string>());
        if (!kind) throw Error(Errc::parse, "model file: unknown loss kind");
        out.spec.kind = *kind;
        out.spec.lambda = j.at("loss").value("lambda", 1.0);
        out.spec.class_prior = j.at("loss").value("class_prior", 0.0);
        for (auto& [k, v] : j.at("loss").at("feature_priors").items()) {
            out.spec.feature_priors[static_cast<std::uint32_t>(std::stoul(k))] = v.get<double>();
        }
        out.seed = j.value("seed", 0ull);
        out.params.w1 = j.at("params").at("w1").get<std::vector<double>>();
        out.params.b1 = j.at("params").at("b1").get<std::vector<double>>();
        out.params.w2 = j.at("params").at("w2").get<std::vector<double>>();
        out.params.b2 = j.at("params").at("b2").get<std::vector<double>>();
        out.params.w3 = j.at("params").at("w3").get<std::vector<double>>();
        out.params.b3 = j.at("params").at("b3").get<double>();
        if (j.contains("metadata")) {
            for (auto& [k, v] : j.at("metadata").items()) {
                out.metadata[k] = v.get<std::string>();
            }
        }
    } catch (const json::exception& e) {
        throw Error(Errc::parse, std::string("model file: ") + e.what());
    }
    const auto& s = out.params.shape;
    if (out.params.w1.size() != s.hidden1 * s.input_dim || out.params.b1.size() != s.hidden1 ||
        out.params.w2.size() != s.hidden2 * s.hidden1 || out.params.b2.size() != s.hidden2 ||
        out.params.w3.size() != s.hidden2) {
        throw Error(Errc::parse, "model file: parameter shapes are inconsistent");
    }
    return out;
}

}  // namespace ee
