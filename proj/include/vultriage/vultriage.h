/* VulTriage C API.
 *
 * All functions return a vt_status. On failure a description of the most
 * recent error on the calling thread is available from vt_last_error().
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with vt_string_free(). Handles are opaque; a session may be
 * shared between threads for vt_triage, while configs are not synchronized.
 */
#ifndef VULTRIAGE_H
#define VULTRIAGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define VT_API __declspec(dllexport)
#else
#define VT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vt_status {
    VT_OK = 0,
    VT_ERR_USAGE = 1,
    VT_ERR_SYNTAX = 2,
    VT_ERR_UNSUPPORTED_LANGUAGE = 3,
    VT_ERR_MISSING_PLACEHOLDER = 4,
    VT_ERR_CORPUS_FORMAT = 5,
    VT_ERR_INDEX_FORMAT = 6,
    VT_ERR_ENCODER_UNAVAILABLE = 7,
    VT_ERR_EMPTY_CORPUS = 8,
    VT_ERR_LLM = 9,
    VT_ERR_VERDICT_PARSE = 10,
    VT_ERR_QUERY_PARSE = 11,
    VT_ERR_MISSING_PREDICTION = 12,
    VT_ERR_DATA = 13,
    VT_ERR_IO = 14,
    VT_ERR_INTERNAL = 15
} vt_status;

VT_API const char* vt_version(void);
VT_API const char* vt_status_name(vt_status status);
/* Valid until the next failing call on the same thread. */
VT_API const char* vt_last_error(void);
VT_API void vt_string_free(char* s);

/* ------------------------------------------------------------ configuration */

typedef struct vt_config vt_config;

VT_API vt_status vt_config_new(vt_config** out);
VT_API vt_status vt_config_load(const char* path, vt_config** out);
/* Overlays a JSON document (same schema as the config file). */
VT_API vt_status vt_config_apply_json(vt_config* cfg, const char* json);
VT_API vt_status vt_config_to_json(const vt_config* cfg, char** out);
VT_API vt_status vt_config_fingerprint(const vt_config* cfg, char** out);
VT_API void vt_config_free(vt_config* cfg);

/* ------------------------------------------------------------- control path */

/* Structural context of the function definitions in `code`: the AST, CFG and
 * DFG fragments on separate lines. level is "A", "B" or "C"; language NULL
 * means "c". */
VT_API vt_status vt_extract_context(const char* code, const char* language, const char* level, char** out);

/* Same, as a JSON object {"level", "t_ast", "t_cfg", "t_dfg", "s"}. */
VT_API vt_status vt_extract_context_json(const char* code, const char* language, const char* level,
                                         char** out);

/* ----------------------------------------------------------- knowledge path */

/* Loads a CWE export (.xml, .csv or .jsonl), encodes it with the configured
 * encoder and writes the index. An existing index at out_path built by the
 * same encoder over the same passages is reused when the encoder is offline. */
VT_API vt_status vt_build_kb(const vt_config* cfg, const char* corpus_path, const char* out_path,
                             size_t* out_entries);

/* ------------------------------------------------------------------ triage */

typedef struct vt_session vt_session;

/* Creates the LLM client and encoder and loads the knowledge index named in
 * the config, if any. */
VT_API vt_status vt_session_new(const vt_config* cfg, vt_session** out);
VT_API void vt_session_free(vt_session* s);

/* One verdict record as JSON. Fails only when the judgment call fails. */
VT_API vt_status vt_triage(vt_session* s, const char* id, const char* code, char** out_json);

typedef struct vt_analyze_summary {
    size_t total;
    size_t analyzed;
    size_t skipped;
    size_t failed;
} vt_analyze_summary;

typedef void (*vt_progress_fn)(const char* id, size_t done, size_t total, void* user);

/* Runs the pipeline over a JSON Lines dataset and writes a verdict file.
 * progress may be NULL. */
VT_API vt_status vt_analyze(vt_session* s, const char* dataset_path, const char* out_path, int resume,
                            vt_progress_fn progress, void* user, vt_analyze_summary* out);

/* Request counters of the session's LLM client. */
VT_API vt_status vt_session_telemetry(const vt_session* s, uint64_t* requests, uint64_t* successes,
                                      uint64_t* failures, uint64_t* retries);

/* -------------------------------------------------------------- evaluation */

typedef struct vt_metrics {
    uint64_t pc, pv, pb, pr, error;
    double precision, recall, fpr, accuracy, f1; /* NaN when undefined */
} vt_metrics;

VT_API vt_status vt_compute_metrics(uint64_t pc, uint64_t pv, uint64_t pb, uint64_t pr, vt_metrics* out);
VT_API vt_status vt_mcnemar_exact(uint64_t b, uint64_t c, double* p_value);

typedef struct vt_eval_options {
    const char* predictions_path;
    const char* dataset_path;
    const char* pairs_path;
    const char* baseline_path;  /* NULL: no significance test */
    double sample_fraction;     /* 1.0 evaluates every pair */
    uint64_t seed;
    const vt_config* config;    /* NULL: defaults; echoed into the report */
} vt_eval_options;

VT_API vt_status vt_evaluate(const vt_eval_options* opts, char** out_table, char** out_report_json);

#ifdef __cplusplus
}
#endif

#endif /* VULTRIAGE_H */
