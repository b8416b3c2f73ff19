#ifndef AGGSPLIT_H
#define AGGSPLIT_H

/* C interface to the aggregative-game Douglas-Rachford solver.
 *
 * Every function that can fail returns an agg_status; the message for the
 * last failure on the calling thread is available from agg_last_error().
 * Strings returned through char** out-parameters are owned by the caller and
 * released with agg_free_string(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AGG_API __declspec(dllexport)
#else
#define AGG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum agg_status {
  AGG_OK = 0,
  AGG_INVALID_ARGUMENT = 1,
  AGG_DIMENSION_MISMATCH = 2,
  AGG_EMPTY_SET = 3,
  AGG_EMPTY_LOCAL_SET = 4,
  AGG_INFEASIBLE = 5,
  AGG_NON_SMOOTH_COST = 6,
  AGG_INVALID_STEP_SIZES = 7,
  AGG_NO_CONVERGENCE = 8,
  AGG_MAX_ITERS_EXCEEDED = 9,
  AGG_NOT_CERTIFIED = 10,
  AGG_GENERATION_FAILED = 11,
  AGG_IO = 12,
  AGG_PARSE = 13,
  AGG_VERIFICATION_FAILED = 14,
  AGG_INTERNAL = 15
} agg_status;

typedef struct agg_game agg_game;
typedef struct agg_run agg_run;

AGG_API const char* agg_version(void);
AGG_API const char* agg_status_name(agg_status status);
/* Message of the last failed call on this thread ("" if none). */
AGG_API const char* agg_last_error(void);
AGG_API void agg_free_string(char* s);

/* 0 restores the default (hardware concurrency). */
AGG_API agg_status agg_set_threads(size_t threads);

/* ---- games ------------------------------------------------------------ */

typedef struct agg_benchmark_params {
  size_t N;
  size_t n;
  double a_lo, a_hi;
  double w_lo, w_hi;
  double q_lo, q_hi;
  double qbar_lo, qbar_hi;
  double upper_total;
  double task_total;
  double b_lo, b_hi; /* b between b_lo A u and b_hi A u */
  uint64_t seed;
} agg_benchmark_params;

/* N = 1000, n = 10 and the published parameter ranges. */
AGG_API void agg_benchmark_params_default(agg_benchmark_params* params);

AGG_API agg_status agg_game_generate(const agg_benchmark_params* params, agg_game** out);
/* The Q = 0 desk instance used by agg_verify when no game is given. */
AGG_API agg_status agg_game_toy(agg_game** out);
AGG_API agg_status agg_game_load(const char* path, agg_game** out);
AGG_API agg_status agg_game_save(const agg_game* game, const char* path);
AGG_API agg_status agg_game_dims(const agg_game* game, size_t* N, size_t* n, size_t* m);
/* Writes the validation report as JSON; returns the first failure code, or
 * AGG_OK when the game is valid. */
AGG_API agg_status agg_game_validate(const agg_game* game, char** report_json);
AGG_API void agg_game_free(agg_game* game);

/* ---- solving ---------------------------------------------------------- */

typedef enum agg_method { AGG_METHOD_DR = 0, AGG_METHOD_PFB = 1 } agg_method;

typedef struct agg_run_config {
  double gamma;   /* gamma_i, same for every agent */
  double alpha;
  double delta_c; /* in (0, 1/gamma) */
  double beta_c;  /* in (0, 1/(alpha + gamma/N)) */
  double relaxation;
  size_t max_iters;
  double stop_tol;
  size_t record_every;
  int record_timing;
  int generic_prox; /* force the iterative prox path */
  double prox_tolerance;
  double pfb_scale;
} agg_run_config;

/* gamma = alpha = 1, delta_c = beta_c = 0.5, relaxation 1, tol 1e-8. */
AGG_API void agg_run_config_default(agg_run_config* config);

/* On AGG_MAX_ITERS_EXCEEDED *out still receives the partial run. */
AGG_API agg_status agg_solve(const agg_game* game, agg_method method, const agg_run_config* config,
                             agg_run** out);
AGG_API agg_status agg_run_write_trace_csv(const agg_run* run, const char* path);
AGG_API agg_status agg_run_report_json(const agg_run* run, char** out);
AGG_API size_t agg_run_iterations(const agg_run* run);
AGG_API int agg_run_converged(const agg_run* run);
/* Copies the nN strategies into x; len must be nN. */
AGG_API agg_status agg_run_solution(const agg_run* run, double* x, size_t len);

typedef struct agg_kkt {
  double stationarity, primal, complementarity, dual_sign, consensus, link, max;
} agg_kkt;
AGG_API agg_status agg_run_kkt(const agg_run* run, agg_kkt* out);
AGG_API void agg_run_free(agg_run* run);

/* ---- experiments and checks ------------------------------------------- */

typedef struct agg_compare_options {
  size_t seeds;
  double tol;
  size_t max_iters;
  double reference_tol;
  double gamma, alpha, delta_c, beta_c;
  int run_dr;
  int run_pfb;
  int record_timing;
} agg_compare_options;

AGG_API void agg_compare_options_default(agg_compare_options* options);

/* Writes summary.csv, curve_<method>.csv and report.json into out_dir and
 * returns the report JSON when report_json is not NULL. */
AGG_API agg_status agg_compare(const agg_benchmark_params* params, const agg_compare_options* options,
                               const char* out_dir, char** report_json);

/* Runs the property suites on game (NULL: the toy instance). suites is a
 * comma-separated list or NULL for all. *table receives a printable table.
 * Returns AGG_VERIFICATION_FAILED when a check fails. */
AGG_API agg_status agg_verify(const agg_game* game, const char* suites, const agg_run_config* config,
                              char** table, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif
