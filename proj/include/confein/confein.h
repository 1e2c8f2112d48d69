#ifndef CONFEIN_H
#define CONFEIN_H

/* C interface to the conformal-Einstein verification engine.
 *
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function. Strings returned through char** out-parameters are
 * allocated by the library and released with cfe_string_free. On failure a
 * function returns a non-zero cfe_status and cfe_last_error() describes the
 * problem (thread-local, valid until the next call on the same thread). */

#include <stddef.h>

#if defined(_WIN32)
#define CFE_API __declspec(dllexport)
#else
#define CFE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cfe_status {
  CFE_OK = 0,
  CFE_ERR_SYNTAX = 1,
  CFE_ERR_UNKNOWN_IDENTIFIER = 2,
  CFE_ERR_DOMAIN = 3,
  CFE_ERR_SINGULAR_METRIC = 4,
  CFE_ERR_NONPOSITIVE_FACTOR = 5,
  CFE_ERR_EMPTY_DOMAIN = 6,
  CFE_ERR_UNSUPPORTED_DIM = 7,
  CFE_ERR_UNKNOWN_SCENARIO = 8,
  CFE_ERR_BAD_PARAMETER = 9,
  CFE_ERR_CONSTANT_SUMMAND = 10,
  CFE_ERR_ILL_CONDITIONED_FIT = 11,
  CFE_ERR_FIT_FAILURE = 12,
  CFE_ERR_PRECONDITION = 13,
  CFE_ERR_CONFIG = 14,
  CFE_ERR_INVALID_ARGUMENT = 15,
  CFE_ERR_INTERNAL = 16
} cfe_status;

typedef struct cfe_expr cfe_expr;
typedef struct cfe_metric cfe_metric;

CFE_API const char* cfe_version(void);
CFE_API const char* cfe_last_error(void);
CFE_API void cfe_string_free(char* s);

/* Expressions over an ordered list of coordinate names. */
CFE_API cfe_status cfe_expr_parse(const char* text, const char* const* coords, size_t n_coords,
                                  cfe_expr** out);
CFE_API cfe_status cfe_expr_evaluate(const cfe_expr* e, const double* point, size_t n,
                                     double* out);
CFE_API cfe_status cfe_expr_differentiate(const cfe_expr* e, size_t coord, cfe_expr** out);
CFE_API cfe_status cfe_expr_print(const cfe_expr* e, char** out);
CFE_API void cfe_expr_free(cfe_expr* e);

/* Metrics. kind is "euclidean", "sphere" or "hyperbolic". */
CFE_API cfe_status cfe_metric_builtin(const char* kind, size_t dim, double scale, cfe_metric** out);
CFE_API cfe_status cfe_metric_from_json(const char* json, cfe_metric** out);
CFE_API size_t cfe_metric_dim(const cfe_metric* m);
/* ricci_out holds dim*dim doubles (row-major) and may be NULL. */
CFE_API cfe_status cfe_metric_curvature(const cfe_metric* m, const double* point, size_t n,
                                        double* scalar_out, double* ricci_out);
CFE_API cfe_status cfe_metric_probe_json(const cfe_metric* m, const double* point, size_t n,
                                         char** out);
CFE_API void cfe_metric_free(cfe_metric* m);

/* Scenario registry and batch runs. */
CFE_API cfe_status cfe_list_scenarios_json(char** out);
/* Runs a JSON config. exit_code follows the command-line contract (0, 1, 2);
 * report_out receives the JSON report, or NULL when exit_code is 2. The
 * status is CFE_OK whenever a run was attempted. */
CFE_API cfe_status cfe_run_json(const char* config, char** report_out, char** summary_out,
                                int* exit_code);
/* {"metric": ..., "point": [...]} -> curvature JSON. */
CFE_API cfe_status cfe_probe_json(const char* config, char** out);

#ifdef __cplusplus
}
#endif

#endif
