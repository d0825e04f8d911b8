/* C interface to the drift-plus-penalty library. Opaque handles, integer
 * status codes; every entry point is usable from plain C. Error details for
 * the calling thread are available via dpp_last_error(). */
#ifndef DPP_CAPI_H
#define DPP_CAPI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DPP_API __declspec(dllexport)
#else
#define DPP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct dpp_problem dpp_problem;

enum dpp_status {
  DPP_OK = 0,
  DPP_ERR_INVALID_ARG = 1,
  DPP_ERR_PARSE = 2,
  DPP_ERR_VALIDATION = 3,
  DPP_ERR_IO = 4,
  DPP_ERR_NUMERIC = 5,
  DPP_ERR_INTERNAL = 6
};

/* Message for the last failure on this thread; empty string if none. */
DPP_API const char* dpp_last_error(void);

/* --- problem handles ----------------------------------------------------- */

DPP_API dpp_problem* dpp_problem_load_file(const char* path);
DPP_API dpp_problem* dpp_problem_load_string(const char* json_text);
DPP_API dpp_problem* dpp_problem_builtin(const char* name);
DPP_API void dpp_problem_free(dpp_problem* p);

/* Number of invariant violations; human-readable report (newline separated)
 * is copied into buf when provided. Returns -1 on error. */
DPP_API int dpp_problem_validate(const dpp_problem* p, char* buf, size_t buflen);

DPP_API int dpp_problem_dims(const dpp_problem* p, int32_t* decision_dim,
                             int32_t* constraint_dim, int32_t* n_states);

/* Drift constant C of the instance. */
DPP_API int dpp_problem_drift_constant(const dpp_problem* p, double* out);

/* --- running the algorithm ------------------------------------------------ */

typedef struct dpp_run_options {
  double V;
  int64_t horizon;
  uint64_t seed;
  const double* initial_W; /* NULL = zeros; length = constraint_dim */
  const double* initial_Z; /* NULL = zeros; length = decision_dim */
  int64_t trace_every;     /* <=1 keeps every slot */
  double stagger_base;     /* <=1 means plain averaging (single frame) */
} dpp_run_options;

/* Runs one cell and writes the trace and/or frame-summary CSV files.
 * Either path may be NULL to skip that artifact. */
DPP_API int dpp_run_to_csv(const dpp_problem* p, const dpp_run_options* opts,
                           const char* trace_csv_path, const char* frames_csv_path);

/* --- dual oracle ----------------------------------------------------------- */

/* Solves the embedded dual, probes geometry, and returns a JSON report
 * (caller frees with dpp_string_free). */
DPP_API int dpp_dual_report(const dpp_problem* p, int32_t starts, uint64_t seed,
                            double uniqueness_tol, char** out_json);

DPP_API void dpp_string_free(char* s);

/* --- command-level entry points (JSON spec in, artifacts out) -------------- */

DPP_API int dpp_cmd_run(const char* spec_json);
DPP_API int dpp_cmd_dual(const char* spec_json, char** out_json);
DPP_API int dpp_cmd_analyze(const char* spec_json);
DPP_API int dpp_cmd_compare(const char* spec_json);
DPP_API int dpp_cmd_sweep(const char* spec_json);

DPP_API const char* dpp_builtin_names(void); /* comma separated, static */

#ifdef __cplusplus
}
#endif

#endif /* DPP_CAPI_H */
