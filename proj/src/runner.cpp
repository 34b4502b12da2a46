#include "ee/runner.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "ee/common.hpp"
#include "ee/eval.hpp"
#include "ee/langid.hpp"
#include "ee/model.hpp"
#include "ee/noise.hpp"
#include "ee/pipeline.hpp"
#include "ee/rng.hpp"
#include "ee/svg_plot.hpp"
#include "ee/synth.hpp"
#include "json.hpp"

namespace ee {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.1.0";

bool log_debug_enabled() {
    const char* lvl = std::getenv("EE_LOG");
    return lvl && std::string(lvl) == "debug";
}

void log_debug(const std::string& msg) {
    if (log_debug_enabled()) std::fprintf(stderr, "[ee] %s\n", msg.c_str());
}

std::string config_hash(const json& config) { return hex64(fnv1a64(config.dump())); }

PipelineParams pipeline_params(const json& config) {
    PipelineParams p;
    if (!config.contains("pipeline")) return p;
    const json& j = config["pipeline"];
    p.cadence_days = j.value("cadence_days", p.cadence_days);
    p.blackout_days = j.value("blackout_days", p.blackout_days);
    p.label_horizon_days = j.value("label_horizon_days", p.label_horizon_days);
    if (j.contains("score_offsets")) p.score_offsets = j["score_offsets"].get<std::vector<int>>();
    p.writeup_min_count = j.value("writeup_min_count", p.writeup_min_count);
    p.nvd_min_count = j.value("nvd_min_count", p.nvd_min_count);
    p.pocinfo_min_count = j.value("pocinfo_min_count", p.pocinfo_min_count);
    p.poctok_min_count = j.value("poctok_min_count", p.poctok_min_count);
    p.vocab_count_occurrences = j.value("vocab_count_occurrences", p.vocab_count_occurrences);
    p.top_k_products = j.value("top_k_products", p.top_k_products);
    p.min_cwe_count = j.value("min_cwe_count", p.min_cwe_count);
    return p;
}

TrainConfig train_config(const json& config) {
    TrainConfig t;
    t.epochs = config.value("epochs", t.epochs);
    t.batch_size = config.value("batch_size", t.batch_size);
    t.learning_rate = config.value("learning_rate", t.learning_rate);
    t.seed = config.value("seed", t.seed);
    t.shape.hidden1 = config.value("hidden1", t.shape.hidden1);
    t.shape.hidden2 = config.value("hidden2", t.shape.hidden2);
    return t;
}

struct LoadedCorpus {
    CorpusStore store;
    json stats;
    std::map<std::string, std::string> input_hashes;
};

LoadedCorpus load_corpus(const std::string& dir, bool dedupe = true) {
    LoadedCorpus out;
    struct FileSpec {
        const char* name;
        RecordSchema schema;
        bool required;
    };
    const FileSpec files[] = {{"vulns.jsonl", RecordSchema::vulns, true},
                              {"artifacts.jsonl", RecordSchema::artifacts, false},
                              {"evidence.jsonl", RecordSchema::evidence, false}};
    for (const auto& f : files) {
        std::string path = dir + "/" + f.name;
        if (!fs::exists(path)) {
            if (f.required) throw Error(Errc::io, "missing corpus file: " + path);
            out.stats[f.name] = {{"added", 0}, {"skipped", 0}, {"missing", true}};
            continue;
        }
        out.input_hashes[path] = hex64(fnv1a64(read_file(path)));
        IngestStats stats = out.store.ingest_jsonl(path, f.schema, dedupe);
        json s;
        s["added"] = stats.added;
        s["skipped"] = stats.skipped;
        s["duplicates"] = stats.duplicates;
        s["diagnostics"] = stats.diagnostics;
        out.stats[f.name] = std::move(s);
        for (const auto& d : stats.diagnostics) log_debug(d);
    }
    return out;
}

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const json& config, const std::map<std::string, std::string>& input_hashes) {
    if (out_dir.empty()) return;
    fs::create_directories(out_dir);
    json m;
    m["subcommand"] = subcommand;
    m["version"] = kToolVersion;
    m["config"] = config;
    m["config_hash"] = config_hash(config);
    m["input_hashes"] = input_hashes;
    write_file(out_dir + "/" + subcommand + "." + config_hash(config) + ".manifest.json",
               m.dump(2));
}

const TemporalSplit& single_split(const std::vector<TemporalSplit>& splits) {
    if (splits.empty()) throw Error(Errc::bad_state, "no temporal split could be built");
    return splits.front();
}

TemporalSplit make_split(const CorpusStore& store, Date train_time,
                         const PipelineParams& params) {
    auto splits =
        build_splits(store, train_time, train_time.plus_days(params.cadence_days), params);
    TemporalSplit split = single_split(splits);
    if (split.train_ids.empty()) {
        throw Error(Errc::bad_state, "empty training split at " + train_time.to_string());
    }
    return split;
}

struct TrainedBundle {
    FeatureSpace space;
    DesignMatrix train_matrix;
    TrainReport report;
    LossSpec spec;
    TemporalSplit split;
    json prior_info;
};

// Shared by train and noise-sim: build the split, feature space and train
// matrix, resolve priors, optionally flip labels, then fit.
TrainedBundle train_on_corpus(const CorpusStore& store, const json& config,
                              const std::string& loss_name,
                              const std::optional<std::string>& inject_feature) {
    PipelineParams params = pipeline_params(config);
    Date train_time = Date::parse(config.at("train_time").get<std::string>());
    TrainedBundle bundle;
    bundle.split = make_split(store, train_time, params);

    bundle.space = FeatureSpace::build(store, bundle.split.train_ids, train_time, params);
    std::vector<Date> snapshots(bundle.split.train_ids.size(), train_time);
    bundle.train_matrix = DesignMatrix::assemble(store, bundle.space, bundle.split.train_ids,
                                                 snapshots, params, "train@" + train_time.to_string());

    auto kind = loss_kind_from_string(loss_name);
    if (!kind) throw Error(Errc::invalid_argument, "unknown loss: " + loss_name);
    bundle.spec.kind = *kind;
    bundle.spec.lambda = config.value("lambda", 1.0);
    bundle.spec.class_prior = config.value("class_prior", 0.0);

    std::vector<int> labels = bundle.train_matrix.labels();
    if (inject_feature) {
        NoiseInjection injection = inject_feature_noise(
            labels, bundle.train_matrix.sparse_rows(), *inject_feature,
            bundle.train_matrix.feature_ids(), bundle.train_matrix.split_id());
        labels = injection.labels;
        bundle.prior_info["injected_feature"] = injection.spec.feature;
        bundle.prior_info["flipped"] = injection.spec.flipped;
        bundle.prior_info["noise_fraction_resulting_negatives"] =
            injection.spec.fraction_of_resulting_negatives;
        bundle.prior_info["noise_fraction_original_negatives"] =
            injection.spec.fraction_of_original_negatives;
        if (injection.degenerate) {
            bundle.prior_info["warning"] = "all positive labels were flipped";
        }
    }

    // Feature priors: explicit values plus window estimates.
    if (config.contains("feature_priors")) {
        for (auto& [feature, p] : config["feature_priors"].items()) {
            auto col = bundle.train_matrix.column_of(feature);
            if (!col) throw Error(Errc::not_found, "feature not in training space: " + feature);
            bundle.spec.feature_priors[*col] = p.get<double>();
            bundle.prior_info["feature_priors"][feature] = p.get<double>();
        }
    }
    if (config.contains("estimate_priors_for")) {
        int window_days = config.value("estimation_window_days", 180);
        for (const auto& f : config["estimate_priors_for"]) {
            std::string feature = f.get<std::string>();
            auto col = bundle.train_matrix.column_of(feature);
            if (!col) throw Error(Errc::not_found, "feature not in training space: " + feature);
            PriorEstimate est = estimate_feature_prior(
                store, feature, train_time, train_time.plus_days(window_days),
                structured_feature_test(store, feature), params.label_horizon_days);
            bundle.spec.feature_priors[*col] = est.prior;
            bundle.prior_info["estimated_priors"][feature] = {
                {"prior", est.prior}, {"n_instances", est.n_instances}};
        }
    }

    TrainConfig tconfig = train_config(config);
    std::vector<IndexedRow> rows = bundle.train_matrix.indexed_rows();
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].label = labels[i];
    bundle.report = train(rows, bundle.train_matrix.dim(), bundle.spec, tconfig);
    return bundle;
}

json metrics_from_scored(const ScoredSet& scored) {
    json out;
    out["roc_auc"] = auc_roc(scored);
    out["pr_auc"] = auc_pr(scored);
    auto sweep = threshold_sweep(scored);
    double p_at_08 = 0.0;
    for (const auto& point : sweep) {
        if (point.recall >= 0.8) p_at_08 = std::max(p_at_08, point.precision);
    }
    out["precision_at_recall_0.8"] = p_at_08;
    return out;
}

json run_ingest(const json& config) {
    std::string dir = config.at("corpus_dir").get<std::string>();
    LoadedCorpus corpus = load_corpus(dir, config.value("dedupe", true));
    json result;
    result["files"] = corpus.stats;
    result["vulns"] = corpus.store.vuln_count();
    result["artifacts"] = corpus.store.artifact_count();
    result["evidence"] = corpus.store.evidence_count();
    result["dangling_references"] = corpus.store.dangling_references();
    write_manifest(config.value("out_dir", ""), "ingest", config, corpus.input_hashes);
    return result;
}

json run_synth_gen(const json& config) {
    SynthConfig sc = config.contains("config")
                         ? SynthConfig::from_json(config["config"].dump())
                         : SynthConfig::from_json(read_file(config.at("config_path")));
    std::string out_dir = config.at("out_dir").get<std::string>();
    SynthResult result = generate_files(sc, out_dir);
    json out;
    out["out_dir"] = out_dir;
    out["vulns"] = result.store.vuln_count();
    out["artifacts"] = result.store.artifact_count();
    out["evidence"] = result.store.evidence_count();
    std::size_t positives = 0;
    for (const auto& [_, label] : result.true_labels) positives += label;
    out["true_positives"] = positives;
    write_manifest(out_dir, "synth-gen", config, {});
    return out;
}

json run_langid_train(const json& config) {
    std::vector<std::pair<std::string, LanguageLabel>> labeled;
    std::map<std::string, std::string> input_hashes;
    if (config.contains("train_jsonl")) {
        std::string path = config.at("train_jsonl").get<std::string>();
        std::string text = read_file(path);
        input_hashes[path] = hex64(fnv1a64(text));
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                throw Error(Errc::parse, path + ":" + std::to_string(lineno) + ": bad JSON");
            }
            std::optional<LanguageLabel> label;
            if (j.contains("label")) label = language_from_string(j["label"].get<std::string>());
            if (!label && j.contains("ext"))
                label = language_from_extension(j["ext"].get<std::string>());
            if (!label) continue;
            labeled.emplace_back(j.value("content", ""), *label);
        }
    } else if (config.contains("corpus_dir")) {
        LoadedCorpus corpus = load_corpus(config.at("corpus_dir").get<std::string>());
        input_hashes = corpus.input_hashes;
        for (const auto& id : corpus.store.vuln_ids()) {
            for (const auto& a : corpus.store.artifacts_of(id)) {
                if (a.kind != ArtifactKind::poc || !a.declared_extension) continue;
                auto label = language_from_extension(*a.declared_extension);
                if (label) labeled.emplace_back(a.content, *label);
            }
        }
    } else {
        throw Error(Errc::invalid_argument, "langid-train needs train_jsonl or corpus_dir");
    }

    double holdout = config.value("holdout_fraction", 0.2);
    Rng rng(config.value("seed", 1ull));
    rng.shuffle(labeled);
    std::size_t n_holdout = static_cast<std::size_t>(holdout * static_cast<double>(labeled.size()));
    std::vector<std::pair<std::string, LanguageLabel>> train_set(labeled.begin(),
                                                                 labeled.end() - n_holdout);
    std::vector<std::pair<std::string, LanguageLabel>> holdout_set(labeled.end() - n_holdout,
                                                                   labeled.end());
    TokenModel model = TokenModel::train(train_set);

    json result;
    result["train_files"] = train_set.size();
    result["holdout_files"] = holdout_set.size();
    if (!holdout_set.empty()) {
        std::size_t correct = 0;
        std::map<std::string, std::size_t> per_class_total, per_class_correct;
        for (const auto& [content, label] : holdout_set) {
            auto r = identify(content, std::nullopt, model);
            ++per_class_total[to_string(label)];
            if (r.language == label) {
                ++correct;
                ++per_class_correct[to_string(label)];
            }
        }
        result["holdout_accuracy"] =
            static_cast<double>(correct) / static_cast<double>(holdout_set.size());
        json per_class = json::object();
        for (const auto& [cls, total] : per_class_total) {
            per_class[cls] = {{"total", total}, {"correct", per_class_correct[cls]}};
        }
        result["per_class"] = std::move(per_class);
    }
    if (config.contains("model_out")) {
        std::string path = config["model_out"].get<std::string>();
        fs::create_directories(fs::path(path).parent_path().empty()
                                   ? "."
                                   : fs::path(path).parent_path().string());
        write_file(path, model.to_json());
        result["model_out"] = path;
    }
    write_manifest(config.value("out_dir", ""), "langid-train", config, input_hashes);
    return result;
}

json run_langid_predict(const json& config) {
    TokenModel model = TokenModel::from_json(read_file(config.at("model").get<std::string>()));
    std::string content = read_file(config.at("input").get<std::string>());
    std::optional<std::string> ext;
    if (config.contains("ext")) ext = config["ext"].get<std::string>();
    auto r = identify(content, ext, model);
    auto sep = separate(content, r.language, r.confidence);
    json out;
    out["language"] = to_string(r.language);
    out["confidence"] = r.confidence;
    out["code_bytes"] = sep.code.size();
    out["comment_bytes"] = sep.comments.size();
    return out;
}

json run_featurize(const json& config) {
    LoadedCorpus corpus = load_corpus(config.at("corpus_dir").get<std::string>());
    PipelineParams params = pipeline_params(config);
    Date train_time = Date::parse(config.at("train_time").get<std::string>());
    TemporalSplit split = make_split(corpus.store, train_time, params);
    FeatureSpace space = FeatureSpace::build(corpus.store, split.train_ids, train_time, params);

    std::string out_dir = config.at("out_dir").get<std::string>();
    fs::create_directories(out_dir);
    write_file(out_dir + "/feature_space.json", space.to_json());

    std::vector<Date> train_snapshots(split.train_ids.size(), train_time);
    DesignMatrix train_matrix =
        DesignMatrix::assemble(corpus.store, space, split.train_ids, train_snapshots, params,
                               "train@" + train_time.to_string());
    train_matrix.save(out_dir + "/train");

    json matrices;
    matrices["train"] = {{"rows", train_matrix.row_count()}, {"dim", train_matrix.dim()}};
    for (int offset : params.score_offsets) {
        std::vector<Date> z;
        z.reserve(split.test_ids.size());
        for (const auto& id : split.test_ids) {
            z.push_back(corpus.store.estimate_disclosure(id).plus_days(offset));
        }
        DesignMatrix test = DesignMatrix::project(corpus.store, space, split.test_ids, z, params,
                                                  train_matrix,
                                                  "test+z" + std::to_string(offset));
        std::string name = "test_z" + std::to_string(offset);
        test.save(out_dir + "/" + name);
        matrices[name] = {{"rows", test.row_count()}};
    }

    json result;
    result["feature_space_fingerprint"] = space.fingerprint();
    result["train_vulns"] = split.train_ids.size();
    result["test_vulns"] = split.test_ids.size();
    result["undatable"] = split.undatable;
    result["matrices"] = std::move(matrices);
    write_manifest(out_dir, "featurize", config, corpus.input_hashes);
    return result;
}

json run_train(const json& config) {
    LoadedCorpus corpus = load_corpus(config.at("corpus_dir").get<std::string>());
    std::optional<std::string> inject;
    if (config.contains("inject_noise_feature")) {
        inject = config["inject_noise_feature"].get<std::string>();
    }
    TrainedBundle bundle =
        train_on_corpus(corpus.store, config, config.value("loss", "bce"), inject);

    std::string model_dir = config.at("model_dir").get<std::string>();
    fs::create_directories(model_dir);
    std::map<std::string, std::string> metadata;
    metadata["feature_space"] = bundle.space.fingerprint();
    metadata["split"] = bundle.train_matrix.split_id();
    metadata["tool_version"] = kToolVersion;
    write_file(model_dir + "/model.json",
               model_to_json(bundle.report.params, bundle.spec, config.value("seed", 1ull),
                             metadata));
    write_file(model_dir + "/feature_space.json", bundle.space.to_json());
    json index;
    index["format"] = "ee.feature-index";
    index["version"] = 1;
    index["features"] = bundle.train_matrix.feature_ids();
    write_file(model_dir + "/index.json", index.dump(2));
    if (config.value("save_matrix", false)) bundle.train_matrix.save(model_dir + "/train_matrix");

    json result;
    result["model_dir"] = model_dir;
    result["model_id"] = hex64(bundle.report.params.content_hash());
    result["input_dim"] = bundle.train_matrix.dim();
    result["rows"] = bundle.train_matrix.row_count();
    std::size_t positives = 0;
    for (int l : bundle.train_matrix.labels()) positives += l;
    result["positives"] = positives;
    result["epoch_losses"] = bundle.report.epoch_losses;
    result["warnings"] = bundle.report.warnings;
    if (!bundle.prior_info.is_null()) result["priors"] = bundle.prior_info;
    write_manifest(model_dir, "train", config, corpus.input_hashes);
    return result;
}

struct BundleOnDisk {
    LoadedModel model;
    FeatureSpace space;
    std::vector<std::string> feature_ids;
};

BundleOnDisk open_bundle(const std::string& dir) {
    BundleOnDisk b;
    b.model = model_from_json(read_file(dir + "/model.json"));
    b.space = FeatureSpace::from_json(read_file(dir + "/feature_space.json"));
    json index = json::parse(read_file(dir + "/index.json"));
    if (index.value("version", 0) != 1)
        throw Error(Errc::version_mismatch, "feature index: unsupported version");
    b.feature_ids = index.at("features").get<std::vector<std::string>>();
    return b;
}

json run_score(const json& config) {
    LoadedCorpus corpus = load_corpus(config.at("corpus_dir").get<std::string>());
    BundleOnDisk bundle = open_bundle(config.at("model_dir").get<std::string>());
    std::string cve = config.at("cve").get<std::string>();
    Date z = Date::parse(config.at("date").get<std::string>());
    EEScore score;
    score.vuln_id = cve;
    score.z = z;
    score.value = score_instance(corpus.store, bundle.space, bundle.model.params,
                                 bundle.feature_ids, cve, z);
    score.model_id = hex64(bundle.model.params.content_hash());
    return json::parse(score.to_json_line());
}

json run_evaluate(const json& config) {
    LoadedCorpus corpus = load_corpus(config.at("corpus_dir").get<std::string>());
    BundleOnDisk bundle = open_bundle(config.at("model_dir").get<std::string>());
    PipelineParams params = pipeline_params(config);
    Date train_time = Date::parse(config.at("train_time").get<std::string>());
    TemporalSplit split = make_split(corpus.store, train_time, params);
    if (split.test_ids.empty()) throw Error(Errc::bad_state, "empty test split");

    std::vector<int> offsets = config.contains("z_offsets")
                                   ? config["z_offsets"].get<std::vector<int>>()
                                   : std::vector<int>{0, 10, 30};
    int main_offset = config.value("main_offset", 30);
    std::vector<int> horizons;
    if (config.contains("horizons")) {
        horizons = config["horizons"].get<std::vector<int>>();
    } else {
        for (int t = 2; t <= 30; t += 2) horizons.push_back(t);
    }

    json per_offset = json::object();
    ScoredSet main_scored;
    for (int offset : offsets) {
        ScoredSet scored =
            score_test_instances(corpus.store, bundle.space, bundle.model.params,
                                 bundle.feature_ids, split.test_ids, offset,
                                 params.label_horizon_days);
        per_offset["z+" + std::to_string(offset)] = metrics_from_scored(scored);
        if (offset == main_offset) main_scored = scored;
    }
    if (main_scored.empty()) {
        main_scored = score_test_instances(corpus.store, bundle.space, bundle.model.params,
                                           bundle.feature_ids, split.test_ids, main_offset,
                                           params.label_horizon_days);
    }

    EvalReport report;
    report.pr_points = threshold_sweep(main_scored);
    report.roc_points = roc_points(main_scored);
    report.pr_auc = auc_pr(main_scored);
    report.roc_auc = auc_roc(main_scored);
    report.prioritization = prioritization_curve(main_scored, config.value("max_window_days", 30));
    std::vector<double> exploited_errors;
    for (const auto& point : report.prioritization) {
        if (point.window_days == config.value("max_window_days", 30) && point.mean_exploited) {
            exploited_errors.push_back(*point.mean_exploited);
        }
    }
    report.prioritization_exploited = prioritization_stats(exploited_errors);
    report.time_varying = time_varying_auc_series(main_scored, horizons);

    std::string out_dir = config.at("out_dir").get<std::string>();
    fs::create_directories(out_dir);
    std::string stem = out_dir + "/evaluate." + config_hash(config);
    json full = json::parse(report.to_json());
    full["per_offset"] = per_offset;
    full["test_vulns"] = split.test_ids.size();
    full["main_offset"] = main_offset;

    if (config.contains("timestamp_noise_rho")) {
        double rho = config["timestamp_noise_rho"].get<double>();
        auto noisy = timestamp_noise_protocol(main_scored, horizons, rho,
                                              config.value("seed", 1ull));
        json series = json::array();
        for (std::size_t i = 0; i < noisy.horizons.size(); ++i) {
            json e;
            e["t"] = noisy.horizons[i];
            e["auc"] = noisy.auc[i] ? json(*noisy.auc[i]) : json(nullptr);
            series.push_back(std::move(e));
        }
        full["timestamp_noise"] = {{"rho", rho}, {"series", series}};
    }

    if (config.contains("baselines")) {
        json baselines = json::object();
        for (const auto& b : config["baselines"]) {
            std::string name = b.get<std::string>();
            ScoredSet scored;
            for (const auto& id : split.test_ids) {
                const VulnRecord* v = corpus.store.find_vuln(id);
                ScoredInstance inst;
                inst.vuln_id = id;
                inst.label = corpus.store.label(id, params.label_horizon_days);
                inst.disclosure = corpus.store.estimate_disclosure(id);
                const CvssComponents* c = nullptr;
                if (name.rfind("cvss_v2", 0) == 0 && v->cvss_v2) c = &*v->cvss_v2;
                if (name.rfind("cvss_v3", 0) == 0 && v->cvss_v3) c = &*v->cvss_v3;
                if (c) {
                    inst.score = name.find("exploitability") != std::string::npos
                                     ? c->exploitability_score
                                     : c->base_score;
                }
                scored.push_back(std::move(inst));
            }
            json entry;
            try {
                auto sweep = threshold_sweep(scored);
                double best_p = 0.0, recall_ceiling = 0.0;
                for (const auto& p : sweep) {
                    best_p = std::max(best_p, p.precision);
                    recall_ceiling = std::max(recall_ceiling, p.recall);
                }
                entry["max_precision"] = best_p;
                entry["max_recall"] = recall_ceiling;  // < 1 when scores are missing
                ScoredSet with_scores;
                for (const auto& inst : scored) {
                    if (inst.score) with_scores.push_back(inst);
                }
                entry["roc_auc_scored_subset"] = auc_roc(with_scores);
            } catch (const Error& e) {
                entry["error"] = e.what();
            }
            baselines[name] = std::move(entry);
        }
        full["baselines"] = std::move(baselines);
    }

    write_file(stem + ".json", full.dump(2));
    write_file(stem + ".pr.csv", report.pr_csv());
    write_file(stem + ".roc.csv", report.roc_csv());

    if (config.value("plots", false)) {
        PlotSeries pr;
        pr.label = "precision-recall";
        for (const auto& p : report.pr_points) pr.points.emplace_back(p.recall, p.precision);
        write_file(stem + ".pr.svg", render_line_svg("Precision / Recall", "recall", "precision",
                                                     {pr}));
        PlotSeries roc;
        roc.label = "roc";
        for (const auto& [fpr, tpr] : report.roc_points) roc.points.emplace_back(fpr, tpr);
        write_file(stem + ".roc.svg", render_line_svg("ROC", "fpr", "tpr", {roc}));
        PlotSeries prio_pos{"exploited", "#b23b1f", {}}, prio_neg{"non-exploited", "#1f6fb2", {}};
        for (const auto& point : report.prioritization) {
            if (point.mean_exploited)
                prio_pos.points.emplace_back(point.window_days, *point.mean_exploited);
            if (point.mean_non_exploited)
                prio_neg.points.emplace_back(point.window_days, *point.mean_non_exploited);
        }
        write_file(stem + ".prioritization.svg",
                   render_line_svg("Prioritization error", "window days", "mean error",
                                   {prio_pos, prio_neg}));
        PlotSeries tv{"auc", "#1f6fb2", {}};
        for (std::size_t i = 0; i < report.time_varying.horizons.size(); ++i) {
            if (report.time_varying.auc[i]) {
                tv.points.emplace_back(report.time_varying.horizons[i],
                                       *report.time_varying.auc[i]);
            }
        }
        write_file(stem + ".tvauc.svg",
                   render_line_svg("Time-varying AUC", "horizon days", "auc", {tv}));
    }

    write_manifest(out_dir, "evaluate", config, corpus.input_hashes);
    json result;
    result["report"] = stem + ".json";
    result["roc_auc"] = report.roc_auc;
    result["pr_auc"] = report.pr_auc;
    result["per_offset"] = per_offset;
    return result;
}

json run_noise_sim(const json& config) {
    LoadedCorpus corpus = load_corpus(config.at("corpus_dir").get<std::string>());
    PipelineParams params = pipeline_params(config);
    std::string feature = config.at("feature").get<std::string>();
    std::vector<std::string> losses = config.contains("losses")
                                          ? config["losses"].get<std::vector<std::string>>()
                                          : std::vector<std::string>{"bce", "lr", "fc", "ffc"};
    int z_offset = config.value("z_offset", 30);

    // Pristine reference: BCE on clean labels.
    json pristine_cfg = config;
    pristine_cfg.erase("feature");
    TrainedBundle pristine = train_on_corpus(corpus.store, pristine_cfg, "bce", std::nullopt);
    ScoredSet pristine_scored = score_test_instances(
        corpus.store, pristine.space, pristine.report.params, pristine.train_matrix.feature_ids(),
        pristine.split.test_ids, z_offset, params.label_horizon_days);

    json result;
    result["feature"] = feature;
    result["pristine_bce"] = metrics_from_scored(pristine_scored);

    // Probe the injection on the pristine matrix to learn the realized noise
    // fraction; FC and LR receive it as their "perfect" class-level prior.
    NoiseInjection probe =
        inject_feature_noise(pristine.train_matrix.labels(), pristine.train_matrix.sparse_rows(),
                             feature, pristine.train_matrix.feature_ids(),
                             pristine.train_matrix.split_id());
    result["noise"] = {
        {"flipped", probe.spec.flipped},
        {"fraction_of_resulting_negatives", probe.spec.fraction_of_resulting_negatives},
        {"fraction_of_original_negatives", probe.spec.fraction_of_original_negatives},
    };

    for (const auto& loss_name : losses) {
        json cfg = config;
        if (loss_name == "ffc") {
            cfg["estimate_priors_for"] = json::array({feature});
        } else if (loss_name == "fc" || loss_name == "lr") {
            cfg["class_prior"] = probe.spec.fraction_of_resulting_negatives;
        }
        TrainedBundle noisy = train_on_corpus(corpus.store, cfg, loss_name, feature);
        ScoredSet scored = score_test_instances(
            corpus.store, noisy.space, noisy.report.params, noisy.train_matrix.feature_ids(),
            noisy.split.test_ids, z_offset, params.label_horizon_days);
        json entry = metrics_from_scored(scored);
        entry["priors"] = noisy.prior_info;
        result["losses"][loss_name] = std::move(entry);
    }

    std::string out_dir = config.value("out_dir", "");
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(out_dir + "/noise-sim." + config_hash(config) + ".json", result.dump(2));
        write_manifest(out_dir, "noise-sim", config, corpus.input_hashes);
    }
    return result;
}

json run_chi2(const json& config) {
    LoadedCorpus corpus = load_corpus(config.at("corpus_dir").get<std::string>());
    std::vector<std::string> features = config.at("features").get<std::vector<std::string>>();
    std::vector<std::string> sources;
    if (config.contains("sources")) {
        sources = config["sources"].get<std::vector<std::string>>();
    } else {
        std::set<std::string> seen;
        for (const auto& id : corpus.store.vuln_ids()) {
            for (const auto& e : corpus.store.evidence_of(id)) seen.insert(e.source);
        }
        sources.assign(seen.begin(), seen.end());
    }
    if (sources.empty()) throw Error(Errc::bad_state, "no evidence sources in the corpus");

    double alpha = config.value("alpha", 0.01);
    bool yates = config.value("yates", false);
    std::size_t m = features.size() * sources.size();

    json table = json::array();
    for (const auto& feature : features) {
        for (const auto& source : sources) {
            Chi2Result r = chi2_independence(corpus.store, source, feature, m, alpha, yates);
            json e;
            e["feature"] = feature;
            e["source"] = source;
            if (r.outcome == Chi2Outcome::untestable) {
                e["untestable"] = true;
            } else {
                e["statistic"] = r.statistic;
                e["p_value"] = r.p_value;
                e["reject"] = r.reject;
            }
            table.push_back(std::move(e));
        }
    }
    json result;
    result["alpha"] = alpha;
    result["bonferroni_m"] = m;
    result["tests"] = std::move(table);
    std::string out_dir = config.value("out_dir", "");
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(out_dir + "/chi2." + config_hash(config) + ".json", result.dump(2));
        write_manifest(out_dir, "chi2", config, corpus.input_hashes);
    }
    return result;
}

json run_report(const json& config) {
    std::string dir = config.at("dir").get<std::string>();
    if (!fs::exists(dir)) throw Error(Errc::io, "no such directory: " + dir);
    json manifests = json::array();
    json metrics = json::object();
    std::vector<std::string> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& path : paths) {
        if (path.ends_with(".manifest.json")) {
            json m = json::parse(read_file(path), nullptr, false);
            if (!m.is_discarded()) {
                manifests.push_back({{"path", path},
                                     {"subcommand", m.value("subcommand", "?")},
                                     {"config_hash", m.value("config_hash", "?")}});
            }
        } else if (path.find("/evaluate.") != std::string::npos && path.ends_with(".json")) {
            json r = json::parse(read_file(path), nullptr, false);
            if (!r.is_discarded() && r.contains("roc_auc")) {
                metrics[path] = {{"roc_auc", r["roc_auc"]}, {"pr_auc", r["pr_auc"]}};
            }
        } else if (path.find("/noise-sim.") != std::string::npos && path.ends_with(".json")) {
            json r = json::parse(read_file(path), nullptr, false);
            if (!r.is_discarded() && r.contains("losses")) metrics[path] = r["losses"];
        }
    }
    json result;
    result["manifests"] = std::move(manifests);
    result["metrics"] = std::move(metrics);
    return result;
}

}  // namespace

std::string run_command(const std::string& subcommand, const std::string& config_json) {
    json config = json::parse(config_json.empty() ? "{}" : config_json, nullptr, false);
    if (config.is_discarded() || !config.is_object()) {
        throw Error(Errc::parse, "configuration must be a JSON object");
    }
    json result;
    try {
        if (subcommand == "ingest") result = run_ingest(config);
        else if (subcommand == "langid-train") result = run_langid_train(config);
        else if (subcommand == "langid-predict") result = run_langid_predict(config);
        else if (subcommand == "featurize") result = run_featurize(config);
        else if (subcommand == "train") result = run_train(config);
        else if (subcommand == "score") result = run_score(config);
        else if (subcommand == "evaluate") result = run_evaluate(config);
        else if (subcommand == "noise-sim") result = run_noise_sim(config);
        else if (subcommand == "chi2") result = run_chi2(config);
        else if (subcommand == "synth-gen") result = run_synth_gen(config);
        else if (subcommand == "report") result = run_report(config);
        else throw Error(Errc::invalid_argument, "unknown subcommand: " + subcommand);
    } catch (const json::exception& e) {
        throw Error(Errc::parse, std::string("configuration: ") + e.what());
    }
    return result.dump(2);
}

}  // namespace ee
