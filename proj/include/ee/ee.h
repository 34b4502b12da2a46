/* C interface to the expected-exploitability toolkit.
 *
 * All functions return ee_status; EE_OK means success and anything else puts
 * a human-readable message behind ee_last_error() (thread-local). Objects are
 * opaque handles with explicit free functions; strings returned through
 * char** outputs are owned by the caller and released with ee_string_free().
 */

#ifndef EE_EE_H
#define EE_EE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ee_status {
    EE_OK = 0,
    EE_ERR_INVALID_ARGUMENT = 1,
    EE_ERR_IO = 2,
    EE_ERR_PARSE = 3,
    EE_ERR_NOT_FOUND = 4,
    EE_ERR_BAD_STATE = 5,
    EE_ERR_VERSION = 6,
    EE_ERR_INTERNAL = 7
} ee_status;

const char* ee_version(void);

/* Message for the most recent failing call on this thread; never NULL. */
const char* ee_last_error(void);

void ee_string_free(char* s);

/* ---- corpus ---------------------------------------------------------- */

typedef struct ee_corpus ee_corpus;

ee_status ee_corpus_new(ee_corpus** out);
void ee_corpus_free(ee_corpus* corpus);

/* schema: "vulns", "artifacts" or "evidence". stats_json (optional) receives
 * {"added":..,"skipped":..,"duplicates":..,"diagnostics":[..]}. */
ee_status ee_corpus_ingest_jsonl(ee_corpus* corpus, const char* path, const char* schema,
                                 char** stats_json);

ee_status ee_corpus_counts(const ee_corpus* corpus, size_t* vulns, size_t* artifacts,
                           size_t* evidence);

/* ISO date of the estimated public disclosure. */
ee_status ee_corpus_disclosure(const ee_corpus* corpus, const char* vuln_id, char** iso_date);

/* Ground-truth label under the given horizon (days). */
ee_status ee_corpus_label(const ee_corpus* corpus, const char* vuln_id, int horizon_days,
                          int* label);

/* ---- trained model bundles ------------------------------------------- */

/* A bundle directory holds model.json and feature_space.json as written by
 * the train subcommand. */
typedef struct ee_model ee_model;

ee_status ee_model_open(const char* bundle_dir, ee_model** out);
void ee_model_free(ee_model* model);

/* EE score for one vulnerability as of the given ISO date. */
ee_status ee_model_score(const ee_model* model, const ee_corpus* corpus, const char* vuln_id,
                         const char* iso_date, double* score);

/* ---- subcommand runner ------------------------------------------------ */

/* Runs one toolkit subcommand ("ingest", "langid-train", "langid-predict",
 * "featurize", "train", "score", "evaluate", "noise-sim", "chi2",
 * "synth-gen", "report") with a JSON configuration, returning a JSON result.
 * This is the entry point the CLI drives. */
ee_status ee_run_json(const char* subcommand, const char* config_json, char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* EE_EE_H */
