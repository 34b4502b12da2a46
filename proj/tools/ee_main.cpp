// Command-line front end. All functionality lives behind the C API in
// libexploitability; this binary only maps flags onto subcommand configs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ee/ee.h"
#include "json.hpp"

using nlohmann::json;

namespace {

json load_base_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) {
        std::cerr << "ee: cannot open config file: " << path << "\n";
        std::exit(2);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        std::cerr << "ee: config file is not a JSON object: " << path << "\n";
        std::exit(2);
    }
    return j;
}

int run(const std::string& subcommand, const json& config) {
    char* result = nullptr;
    ee_status status = ee_run_json(subcommand.c_str(), config.dump().c_str(), &result);
    if (status != EE_OK) {
        std::cerr << "ee " << subcommand << ": " << ee_last_error() << "\n";
        return 2;
    }
    if (result) {
        std::cout << result << "\n";
        ee_string_free(result);
    }
    return 0;
}

void set_if(json& config, const char* key, const std::string& value) {
    if (!value.empty()) config[key] = value;
}

json& pipeline_section(json& config) {
    if (!config.contains("pipeline")) config["pipeline"] = json::object();
    return config["pipeline"];
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expected-exploitability toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ee_version());

    // Shared option storage. Each subcommand declares the subset it uses.
    std::string config_path, corpus_dir, out_dir, model_dir, train_time, date, cve;
    std::string loss = "bce", feature, input_path, model_path, train_jsonl, report_dir;
    std::vector<std::string> features, sources, losses, baselines, feature_priors,
        estimate_priors;
    double holdout = 0.2, learning_rate = -1.0, class_prior = -1.0, rho = -1.0, alpha = 0.01;
    int epochs = -1, batch_size = -1, hidden1 = -1, hidden2 = -1, cadence = -1, blackout = -1;
    int n_vulns = -1, zoffset_main = -1;
    unsigned long long seed = 1;
    bool no_dedupe = false, plots = false, yates = false, save_matrix = false;
    std::string inject_feature, ext;
    std::vector<int> z_offsets;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file; flags override its keys");
    };
    auto add_pipeline_flags = [&](CLI::App* cmd) {
        cmd->add_option("--cadence-days", cadence, "retraining cadence in days");
        cmd->add_option("--blackout-days", blackout, "training blackout in days");
    };

    auto* ingest = app.add_subcommand("ingest", "Validate and summarize a corpus directory");
    add_common(ingest);
    ingest->add_option("--corpus", corpus_dir, "directory with vulns/artifacts/evidence JSONL")
        ->required();
    ingest->add_option("--out", out_dir, "directory for the run manifest");
    ingest->add_flag("--no-dedupe", no_dedupe, "keep whitespace-duplicate artifacts");

    auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic corpus");
    add_common(synth);
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--n", n_vulns, "number of vulnerabilities");
    synth->add_option("--seed", seed, "generator seed");

    auto* lt = app.add_subcommand("langid-train", "Train the PoC language identifier");
    add_common(lt);
    lt->add_option("--train", train_jsonl, "labeled JSONL ({content, label|ext} per line)");
    lt->add_option("--corpus", corpus_dir, "or: corpus dir, labels from PoC extensions");
    lt->add_option("--model-out", model_path, "where to write the model JSON");
    lt->add_option("--holdout", holdout, "held-out fraction for the accuracy report");
    lt->add_option("--seed", seed, "shuffle seed");
    lt->add_option("--out", out_dir, "directory for the run manifest");

    auto* lp = app.add_subcommand("langid-predict", "Identify the language of one file");
    lp->add_option("--model", model_path, "trained model JSON")->required();
    lp->add_option("--input", input_path, "file to classify")->required();
    lp->add_option("--ext", ext, "declared file extension, if any");

    auto* feat = app.add_subcommand("featurize", "Build feature space and design matrices");
    add_common(feat);
    add_pipeline_flags(feat);
    feat->add_option("--corpus", corpus_dir)->required();
    feat->add_option("--train-time", train_time, "split date (YYYY-MM-DD)")->required();
    feat->add_option("--out", out_dir)->required();

    auto* tr = app.add_subcommand("train", "Train an EE model");
    add_common(tr);
    add_pipeline_flags(tr);
    tr->add_option("--corpus", corpus_dir)->required();
    tr->add_option("--train-time", train_time)->required();
    tr->add_option("--model-dir", model_dir)->required();
    tr->add_option("--loss", loss, "bce | lr | fc | ffc");
    tr->add_option("--epochs", epochs);
    tr->add_option("--batch-size", batch_size);
    tr->add_option("--learning-rate", learning_rate);
    tr->add_option("--hidden1", hidden1);
    tr->add_option("--hidden2", hidden2);
    tr->add_option("--seed", seed);
    tr->add_option("--class-prior", class_prior, "noise prior for LR/FC");
    tr->add_option("--feature-prior", feature_priors,
                   "feature=prior pairs for FFC (repeatable)");
    tr->add_option("--estimate-prior-for", estimate_priors,
                   "estimate the FFC prior for this feature from the post-training window");
    tr->add_option("--inject-noise", inject_feature,
                   "flip training labels of rows carrying this feature");
    tr->add_flag("--save-matrix", save_matrix, "persist the training design matrix");

    auto* sc = app.add_subcommand("score", "Score one vulnerability at a date");
    sc->add_option("--model-dir", model_dir)->required();
    sc->add_option("--corpus", corpus_dir)->required();
    sc->add_option("--cve", cve)->required();
    sc->add_option("--date", date)->required();

    auto* ev = app.add_subcommand("evaluate", "Evaluate a model on its test split");
    add_common(ev);
    add_pipeline_flags(ev);
    ev->add_option("--model-dir", model_dir)->required();
    ev->add_option("--corpus", corpus_dir)->required();
    ev->add_option("--train-time", train_time)->required();
    ev->add_option("--out", out_dir)->required();
    ev->add_option("--z-offsets", z_offsets, "scoring offsets in days");
    ev->add_option("--main-offset", zoffset_main, "offset for curves and tables");
    ev->add_option("--timestamp-noise-rho", rho, "PoC timestamp-noise fraction");
    ev->add_option("--baseline", baselines, "static baseline (repeatable)");
    ev->add_option("--seed", seed);
    ev->add_flag("--plots", plots, "write SVG plots");

    auto* ns = app.add_subcommand("noise-sim", "Feature-dependent label-noise simulation");
    add_common(ns);
    add_pipeline_flags(ns);
    ns->add_option("--corpus", corpus_dir)->required();
    ns->add_option("--train-time", train_time)->required();
    ns->add_option("--feature", feature, "feature to poison, e.g. cwe:CWE-79")->required();
    ns->add_option("--loss", losses, "losses to compare (repeatable)");
    ns->add_option("--out", out_dir);
    ns->add_option("--epochs", epochs);
    ns->add_option("--batch-size", batch_size);
    ns->add_option("--learning-rate", learning_rate);
    ns->add_option("--hidden1", hidden1);
    ns->add_option("--hidden2", hidden2);
    ns->add_option("--seed", seed);

    auto* chi = app.add_subcommand("chi2", "Feature / evidence-source independence tests");
    add_common(chi);
    chi->add_option("--corpus", corpus_dir)->required();
    chi->add_option("--feature", features, "structured feature (repeatable)")->required();
    chi->add_option("--source", sources, "evidence source (repeatable)");
    chi->add_option("--alpha", alpha, "significance level");
    chi->add_flag("--yates", yates, "apply the continuity correction");
    chi->add_option("--out", out_dir);

    auto* rep = app.add_subcommand("report", "Collate manifests and metrics from a directory");
    rep->add_option("--dir", report_dir)->required();

    CLI11_PARSE(app, argc, argv);

    json config = load_base_config(config_path);
    auto fill_pipeline = [&] {
        if (cadence >= 0) pipeline_section(config)["cadence_days"] = cadence;
        if (blackout >= 0) pipeline_section(config)["blackout_days"] = blackout;
    };
    auto fill_train = [&] {
        if (epochs >= 0) config["epochs"] = epochs;
        if (batch_size >= 0) config["batch_size"] = batch_size;
        if (learning_rate >= 0) config["learning_rate"] = learning_rate;
        if (hidden1 >= 0) config["hidden1"] = hidden1;
        if (hidden2 >= 0) config["hidden2"] = hidden2;
        config["seed"] = seed;
    };

    if (*ingest) {
        config["corpus_dir"] = corpus_dir;
        set_if(config, "out_dir", out_dir);
        if (no_dedupe) config["dedupe"] = false;
        return run("ingest", config);
    }
    if (*synth) {
        if (!config.contains("config")) config["config"] = json::object();
        if (n_vulns >= 0) config["config"]["n_vulns"] = n_vulns;
        if (synth->count("--seed")) config["config"]["seed"] = seed;
        config["out_dir"] = out_dir;
        return run("synth-gen", config);
    }
    if (*lt) {
        set_if(config, "train_jsonl", train_jsonl);
        set_if(config, "corpus_dir", corpus_dir);
        set_if(config, "model_out", model_path);
        set_if(config, "out_dir", out_dir);
        config["holdout_fraction"] = holdout;
        config["seed"] = seed;
        return run("langid-train", config);
    }
    if (*lp) {
        config["model"] = model_path;
        config["input"] = input_path;
        set_if(config, "ext", ext);
        return run("langid-predict", config);
    }
    if (*feat) {
        fill_pipeline();
        config["corpus_dir"] = corpus_dir;
        config["train_time"] = train_time;
        config["out_dir"] = out_dir;
        return run("featurize", config);
    }
    if (*tr) {
        fill_pipeline();
        fill_train();
        config["corpus_dir"] = corpus_dir;
        config["train_time"] = train_time;
        config["model_dir"] = model_dir;
        config["loss"] = loss;
        if (class_prior >= 0) config["class_prior"] = class_prior;
        for (const auto& fp : feature_priors) {
            auto eq = fp.rfind('=');
            if (eq == std::string::npos) {
                std::cerr << "ee train: --feature-prior expects feature=value\n";
                return 1;
            }
            config["feature_priors"][fp.substr(0, eq)] = std::stod(fp.substr(eq + 1));
        }
        if (!estimate_priors.empty()) config["estimate_priors_for"] = estimate_priors;
        set_if(config, "inject_noise_feature", inject_feature);
        if (save_matrix) config["save_matrix"] = true;
        return run("train", config);
    }
    if (*sc) {
        config["model_dir"] = model_dir;
        config["corpus_dir"] = corpus_dir;
        config["cve"] = cve;
        config["date"] = date;
        return run("score", config);
    }
    if (*ev) {
        fill_pipeline();
        config["model_dir"] = model_dir;
        config["corpus_dir"] = corpus_dir;
        config["train_time"] = train_time;
        config["out_dir"] = out_dir;
        if (!z_offsets.empty()) config["z_offsets"] = z_offsets;
        if (zoffset_main >= 0) config["main_offset"] = zoffset_main;
        if (rho >= 0) config["timestamp_noise_rho"] = rho;
        if (!baselines.empty()) config["baselines"] = baselines;
        if (plots) config["plots"] = true;
        config["seed"] = seed;
        return run("evaluate", config);
    }
    if (*ns) {
        fill_pipeline();
        fill_train();
        config["corpus_dir"] = corpus_dir;
        config["train_time"] = train_time;
        config["feature"] = feature;
        if (!losses.empty()) config["losses"] = losses;
        set_if(config, "out_dir", out_dir);
        return run("noise-sim", config);
    }
    if (*chi) {
        config["corpus_dir"] = corpus_dir;
        config["features"] = features;
        if (!sources.empty()) config["sources"] = sources;
        config["alpha"] = alpha;
        if (yates) config["yates"] = true;
        set_if(config, "out_dir", out_dir);
        return run("chi2", config);
    }
    if (*rep) {
        config["dir"] = report_dir;
        return run("report", config);
    }
    return 1;
}
