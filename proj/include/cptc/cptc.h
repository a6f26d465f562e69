#ifndef CPTC_CPTC_H
#define CPTC_CPTC_H

/* C interface to the conformal streaming engines and the experiment harness.
 * All functions return a cptc_status; on failure cptc_last_error() holds a
 * thread-local human-readable message. Strings returned through char** are
 * heap-allocated and must be released with cptc_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(__cplusplus)
extern "C" {
#endif

typedef enum cptc_status {
  CPTC_OK = 0,
  CPTC_E_INVALID = 1, /* bad arguments or configuration */
  CPTC_E_IO = 2,      /* filesystem or data-format failure */
  CPTC_E_SPACE = 3    /* caller buffer too small */
} cptc_status;

const char* cptc_last_error(void);

typedef enum cptc_method {
  CPTC_METHOD_CPTC = 0,
  CPTC_METHOD_ACI = 1,
  CPTC_METHOD_ONLINE_CP = 2
} cptc_method;

typedef enum cptc_aggregation {
  CPTC_AGG_UNION = 0,
  CPTC_AGG_LEVELSET = 1
} cptc_aggregation;

typedef struct cptc_engine_params {
  cptc_method method;
  int num_states;      /* K >= 1; baselines require K == 1 */
  double alpha;        /* target miscoverage in (0, 1) */
  double gamma;        /* iterate step size, >= 0 (unused by ONLINE_CP) */
  cptc_aggregation aggregation;
  double levelset_resolution;
  int64_t pool_capacity; /* <= 0 for unbounded */
  int argmax_states;     /* nonzero: argmax instead of sampling at update */
  uint64_t seed;
} cptc_engine_params;

void cptc_engine_params_init(cptc_engine_params* params);

typedef struct cptc_engine cptc_engine;

cptc_status cptc_engine_create(const cptc_engine_params* params,
                               cptc_engine** out);
void cptc_engine_destroy(cptc_engine* engine);

/* Warm start with one labelled point. probs is length K (may be NULL when
 * K == 1), y_hat is the per-state point forecast, length K. */
cptc_status cptc_engine_warm_add(cptc_engine* engine, const double* probs,
                                 const double* y_hat, double y);

/* Emits the prediction set for the next step into lo/hi (capacity intervals);
 * *n_out receives the interval count. Returns CPTC_E_SPACE (with *n_out set
 * to the required count) when capacity is too small. The emitted set is
 * cached for the following update call. An empty set yields *n_out == 0. */
cptc_status cptc_engine_predict(cptc_engine* engine, const double* probs,
                                const double* y_hat, double* lo, double* hi,
                                size_t capacity, size_t* n_out);

typedef struct cptc_step_info {
  int covered;       /* 1 if y fell inside the emitted set */
  int sampled_state; /* 1-based state charged with the update */
  double width;      /* total width of the emitted set (may be inf) */
} cptc_step_info;

/* Consumes the cached prediction: scores y against it, updates the charged
 * state's iterate and pool. Fails if no predict is pending. info may be
 * NULL. */
cptc_status cptc_engine_update(cptc_engine* engine, const double* probs,
                               const double* y_hat, double y,
                               cptc_step_info* info);

cptc_status cptc_engine_alpha(const cptc_engine* engine, int state,
                              double* out);
cptc_status cptc_engine_pool_size(const cptc_engine* engine, int state,
                                  size_t* out);

/* Experiment-level entry points. Configs are JSON documents matching the
 * schema printed by cptc_default_config. */
cptc_status cptc_default_config(char** json_out);
cptc_status cptc_generate(const char* config_json, const char* out_csv);
cptc_status cptc_run(const char* config_json, const char* out_dir,
                     char** summary_json_out);
cptc_status cptc_sweep(const char* config_json, const char* parameter,
                       const char* values_csv, const char* out_dir,
                       char** summary_json_out);
cptc_status cptc_report(const char* steps_dir, char** summary_json_out);

void cptc_string_free(char* s);

#if defined(__cplusplus)
} /* extern "C" */
#endif

#endif /* CPTC_CPTC_H */
