#ifndef SMVR_H
#define SMVR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible call. On failure, a thread-local
 * message with the details is available from smvr_last_error(). */
typedef enum smvr_status {
  SMVR_OK = 0,
  SMVR_ERR_NULL_ARGUMENT = 1,
  SMVR_ERR_CONTRACT = 2, /* invalid argument / precondition violation */
  SMVR_ERR_DOMAIN = 3,   /* numeric domain failure inside a level */
  SMVR_ERR_CONFIG = 4,   /* bad configuration / unusable input file */
  SMVR_ERR_PARSE = 5,    /* malformed JSON or data file */
  SMVR_ERR_RUNTIME = 6   /* anything else */
} smvr_status;

typedef struct smvr_problem smvr_problem;
typedef struct smvr_trace smvr_trace;

const char* smvr_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* smvr_last_error(void);

/* Problem construction from a JSON spec, e.g.
 *   {"kind":"synthetic","dims":[8,6,4,1],"sigma_f":0.1,"seed":1}
 * Kinds: synthetic | portfolio_synthetic | portfolio_csv | term. */
smvr_status smvr_problem_create(const char* spec_json, smvr_problem** out);
void smvr_problem_destroy(smvr_problem* problem);

smvr_status smvr_problem_dimension(const smvr_problem* problem, int32_t* out);
smvr_status smvr_problem_depth(const smvr_problem* problem, int32_t* out);

/* Buffers must hold smvr_problem_dimension doubles. */
smvr_status smvr_problem_initial_point(const smvr_problem* problem, double* out);
smvr_status smvr_problem_loss(const smvr_problem* problem, const double* w,
                              double* out);
smvr_status smvr_problem_gradient(const smvr_problem* problem, const double* w,
                                  double* out);

/* Runs one algorithm spec, e.g.
 *   {"name":"smvr","schedule":"poly","beta1":0.5,"a":8,"T":1000,"batch":1}
 * Names: smvr | smvr_stagewise | smvr_adagrad | smvr_adam | smvr_amsgrad |
 * smvr_adabound | nested_sgd | scsc_style. Returns a trace of evaluated
 * records (iteration, cumulative value-oracle draws, loss, gradient norm,
 * step size, momentum weight). */
smvr_status smvr_run(const smvr_problem* problem, const char* run_json,
                     uint64_t seed, smvr_trace** out);
void smvr_trace_destroy(smvr_trace* trace);

smvr_status smvr_trace_size(const smvr_trace* trace, int64_t* out);
smvr_status smvr_trace_algorithm(const smvr_trace* trace, const char** out);
smvr_status smvr_trace_record(const smvr_trace* trace, int64_t index,
                              int64_t* iteration, int64_t* samples, double* loss,
                              double* grad_norm, double* eta, double* beta);
smvr_status smvr_trace_write(const smvr_trace* trace, const char* path);

/* Full experiment grid from a JSON config (problem, algorithms, seeds, T,
 * out, workers). Writes per-seed and mean trace CSVs plus summary.csv under
 * the configured output directory. failed_cells counts aborted runs. */
smvr_status smvr_experiment_run(const char* config_json, int32_t* failed_cells);

/* Equal-budget ranking across algorithm subdirectories of out_dir.
 * algorithms_json is a JSON array of algorithm labels. Writes report.csv;
 * reports how many of the budget checkpoints the smvr-labelled algorithms
 * win (<= every baseline in mean loss). */
smvr_status smvr_compare_report(const char* out_dir, const char* algorithms_json,
                                int32_t* checkpoints, int32_t* smvr_wins);

#ifdef __cplusplus
}
#endif

#endif
