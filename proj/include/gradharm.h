/*
 * gradharm - gradient harmonization for two-task training.
 *
 * C API of the shared library. The library de-conflicts a pair of task
 * gradients (alignment vs. classification) whose inner product turned
 * negative, either by projecting each gradient onto the hyperplane
 * orthogonal to the other ("gh"), by scaling both with angle-derived
 * dynamic weights ("ghpp-weighted"), or by rotating both to a right angle
 * inside their common plane ("ghpp-rotate"). It also ships a desk-scale
 * adversarial domain-adaptation harness driven by a JSON config, plus
 * offline analysis of gradient traces.
 *
 * Every function returns GH_OK on success; on failure gh_last_error()
 * holds a thread-local description of what went wrong.
 */

#ifndef GRADHARM_H
#define GRADHARM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gh_status {
  GH_OK = 0,
  GH_ERR_INVALID_ARGUMENT = 1,
  GH_ERR_DIMENSION_MISMATCH = 2,
  GH_ERR_DEGENERATE_INPUT = 3,
  GH_ERR_PARSE = 4,
  GH_ERR_IO = 5,
  GH_ERR_NUMERICAL = 6,
  GH_ERR_UNKNOWN = 7
} gh_status;

typedef enum gh_method_kind {
  GH_METHOD_NONE = 0,
  GH_METHOD_GH = 1,
  GH_METHOD_GHPP_WEIGHTED = 2,
  GH_METHOD_GHPP_ROTATE = 3,
  GH_METHOD_FLIP_G1 = 4,
  GH_METHOD_FLIP_G2 = 5
} gh_method_kind;

/* Static name of a status code. */
const char* gh_status_name(gh_status status);

/* Thread-local message describing the most recent failure in this thread.
 * Valid until the next failing call on the same thread. */
const char* gh_last_error(void);

/* Frees any string returned through a char** out parameter. */
void gh_string_free(char* s);

/* ---------------- single-pair harmonization ---------------- */

/* Opaque harmonization result handle. */
typedef struct gh_result gh_result;

/* Harmonizes one gradient pair of length dim. lambda is only read by the
 * GH++ kinds and must lie in [0, 1]. The caller owns the result. */
gh_status gh_harmonize(gh_method_kind kind, double lambda,
                       const double* g1, const double* g2, size_t dim,
                       gh_result** out_result);

void gh_result_free(gh_result* r);

size_t gh_result_dim(const gh_result* r);
/* Harmonized gradients and their sum; pointers are valid while r lives. */
const double* gh_result_tilde_g1(const gh_result* r);
const double* gh_result_tilde_g2(const gh_result* r);
const double* gh_result_aggregate(const gh_result* r);
/* Dynamic loss weights; NaN for ghpp-rotate under conflict. */
double gh_result_tau1(const gh_result* r);
double gh_result_tau2(const gh_result* r);
/* 1 iff g1.g2 < 0 (strict). */
int gh_result_conflict(const gh_result* r);
double gh_result_angle_before(const gh_result* r);
double gh_result_angle_after(const gh_result* r);  /* NaN when undefined */
int gh_result_angle_after_defined(const gh_result* r);
double gh_result_deviation_sum(const gh_result* r);
/* 1 when gh collapsed an antiparallel pair to zero vectors. */
int gh_result_degenerate(const gh_result* r);
/* Serializes the full result; free with gh_string_free. */
gh_status gh_result_to_json(const gh_result* r, char** out_json);

/* Equivalent dynamic loss weights without materializing the vectors. */
gh_status gh_weights(gh_method_kind kind, double lambda,
                     const double* g1, const double* g2, size_t dim,
                     double* out_tau1, double* out_tau2);

/* Sets *out_conflict to 1 iff the pair conflicts. */
gh_status gh_detect_conflict(const double* g1, const double* g2, size_t dim,
                             int* out_conflict);

/* Numerical witness of the projection's optimality: draws `samples` feasible
 * points around the closed-form solution and checks none beats it by more
 * than 1e-9. Requires a conflicting pair and samples >= 1000. */
gh_status gh_verify_projection_qp(const double* g1, const double* g2, size_t dim,
                              size_t samples, uint64_t seed, int* out_pass);

/* ---------------- experiment harness ---------------- */

/* Runs the training experiment described by a JSON config file; writes
 * dataset.csv, per-method report/trace JSONL and summary.json into the
 * configured output directory. With parallel != 0 independent method loops
 * run concurrently. On success *out_summary_json (optional, may be NULL)
 * receives the summary document. */
gh_status gh_train_run_file(const char* config_path, int parallel,
                            char** out_summary_json);

/* Harmonizes the pair stored in a JSON file {"g1": [...], "g2": [...]} and
 * returns the result document. */
gh_status gh_harmonize_pair_file(const char* pair_json_path,
                                 gh_method_kind kind, double lambda,
                                 char** out_json);

/* Histogram of a gradient-trace JSONL file with num_bins equal-width bins.
 * apply_method >= 0 selects a gh_method_kind whose post-harmonization
 * histogram is included; pass -1 for none. */
gh_status gh_analyze_trace_file(const char* trace_path, size_t num_bins,
                                int apply_method, double lambda,
                                char** out_json);

/* As above but returns the plot-ready CSV of the (pre-harmonization)
 * histogram instead of JSON. */
gh_status gh_analyze_trace_csv(const char* trace_path, size_t num_bins,
                               char** out_csv);

#ifdef __cplusplus
}
#endif

#endif /* GRADHARM_H */
