#include "ee/ee.h"

#include <cstring>
#include <string>

#include "ee/common.hpp"
#include "ee/corpus.hpp"
#include "ee/model.hpp"
#include "ee/pipeline.hpp"
#include "ee/runner.hpp"
#include "json.hpp"

using nlohmann::json;

extern "C" {

struct ee_corpus {
    ee::CorpusStore store;
};

struct ee_model {
    ee::LoadedModel model;
    ee::FeatureSpace space;
    std::vector<std::string> feature_ids;
};

}  // extern "C"

namespace {

thread_local std::string g_last_error = "no error";

ee_status set_error(ee_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

ee_status status_of(const ee::Error& e) {
    switch (e.code()) {
        case ee::Errc::invalid_argument: return EE_ERR_INVALID_ARGUMENT;
        case ee::Errc::io: return EE_ERR_IO;
        case ee::Errc::parse: return EE_ERR_PARSE;
        case ee::Errc::not_found: return EE_ERR_NOT_FOUND;
        case ee::Errc::bad_state: return EE_ERR_BAD_STATE;
        case ee::Errc::version_mismatch: return EE_ERR_VERSION;
    }
    return EE_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
ee_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ee::Error& e) {
        return set_error(status_of(e), e.what());
    } catch (const std::exception& e) {
        return set_error(EE_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(EE_ERR_INTERNAL, "unknown failure");
    }
}

}  // namespace

extern "C" {

const char* ee_version(void) { return "0.1.0"; }

const char* ee_last_error(void) { return g_last_error.c_str(); }

void ee_string_free(char* s) { std::free(s); }

ee_status ee_corpus_new(ee_corpus** out) {
    if (!out) return set_error(EE_ERR_INVALID_ARGUMENT, "out is NULL");
    return guarded([&] {
        *out = new ee_corpus();
        return EE_OK;
    });
}

void ee_corpus_free(ee_corpus* corpus) { delete corpus; }

ee_status ee_corpus_ingest_jsonl(ee_corpus* corpus, const char* path, const char* schema,
                                 char** stats_json) {
    if (!corpus || !path || !schema) {
        return set_error(EE_ERR_INVALID_ARGUMENT, "corpus, path and schema are required");
    }
    return guarded([&] {
        auto s = ee::schema_from_string(schema);
        if (!s) return set_error(EE_ERR_INVALID_ARGUMENT, std::string("bad schema: ") + schema);
        ee::IngestStats stats = corpus->store.ingest_jsonl(path, *s);
        if (stats_json) {
            json j;
            j["added"] = stats.added;
            j["skipped"] = stats.skipped;
            j["duplicates"] = stats.duplicates;
            j["diagnostics"] = stats.diagnostics;
            *stats_json = dup_string(j.dump());
        }
        return EE_OK;
    });
}

ee_status ee_corpus_counts(const ee_corpus* corpus, size_t* vulns, size_t* artifacts,
                           size_t* evidence) {
    if (!corpus) return set_error(EE_ERR_INVALID_ARGUMENT, "corpus is NULL");
    if (vulns) *vulns = corpus->store.vuln_count();
    if (artifacts) *artifacts = corpus->store.artifact_count();
    if (evidence) *evidence = corpus->store.evidence_count();
    return EE_OK;
}

ee_status ee_corpus_disclosure(const ee_corpus* corpus, const char* vuln_id, char** iso_date) {
    if (!corpus || !vuln_id || !iso_date) {
        return set_error(EE_ERR_INVALID_ARGUMENT, "corpus, vuln_id and iso_date are required");
    }
    return guarded([&] {
        *iso_date = dup_string(corpus->store.estimate_disclosure(vuln_id).to_string());
        return EE_OK;
    });
}

ee_status ee_corpus_label(const ee_corpus* corpus, const char* vuln_id, int horizon_days,
                          int* label) {
    if (!corpus || !vuln_id || !label) {
        return set_error(EE_ERR_INVALID_ARGUMENT, "corpus, vuln_id and label are required");
    }
    return guarded([&] {
        *label = corpus->store.label(vuln_id, horizon_days);
        return EE_OK;
    });
}

ee_status ee_model_open(const char* bundle_dir, ee_model** out) {
    if (!bundle_dir || !out) {
        return set_error(EE_ERR_INVALID_ARGUMENT, "bundle_dir and out are required");
    }
    return guarded([&] {
        auto model = std::make_unique<ee_model>();
        std::string dir(bundle_dir);
        model->model = ee::model_from_json(ee::read_file(dir + "/model.json"));
        model->space = ee::FeatureSpace::from_json(ee::read_file(dir + "/feature_space.json"));
        json index = json::parse(ee::read_file(dir + "/index.json"), nullptr, false);
        if (index.is_discarded()) return set_error(EE_ERR_PARSE, "index.json: invalid JSON");
        if (index.value("version", 0) != 1) {
            return set_error(EE_ERR_VERSION, "index.json: unsupported version");
        }
        model->feature_ids = index.at("features").get<std::vector<std::string>>();
        *out = model.release();
        return EE_OK;
    });
}

void ee_model_free(ee_model* model) { delete model; }

ee_status ee_model_score(const ee_model* model, const ee_corpus* corpus, const char* vuln_id,
                         const char* iso_date, double* score) {
    if (!model || !corpus || !vuln_id || !iso_date || !score) {
        return set_error(EE_ERR_INVALID_ARGUMENT, "all arguments are required");
    }
    return guarded([&] {
        auto z = ee::Date::try_parse(iso_date);
        if (!z) return set_error(EE_ERR_INVALID_ARGUMENT, std::string("bad date: ") + iso_date);
        *score = ee::score_instance(corpus->store, model->space, model->model.params,
                                    model->feature_ids, vuln_id, *z);
        return EE_OK;
    });
}

ee_status ee_run_json(const char* subcommand, const char* config_json, char** result_json) {
    if (!subcommand) return set_error(EE_ERR_INVALID_ARGUMENT, "subcommand is NULL");
    return guarded([&] {
        std::string result = ee::run_command(subcommand, config_json ? config_json : "{}");
        if (result_json) *result_json = dup_string(result);
        return EE_OK;
    });
}

}  // extern "C"
