/* C API of the local Bures-Wasserstein transport library.
 *
 * Every function returns LBW_OK (0) on success or a nonzero error code;
 * lbw_last_error_message() describes the most recent failure on the calling
 * thread. Handles are opaque and must be released with their _free function.
 * Matrices are passed as row-major double arrays.
 */
#ifndef LBW_H_
#define LBW_H_

#include <stdint.h>

#if defined(_WIN32)
#define LBW_API __declspec(dllexport)
#else
#define LBW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum lbw_error_code {
  LBW_OK = 0,
  LBW_ERROR_INVALID_ARGUMENT = 1,
  LBW_ERROR_DIMENSION_MISMATCH = 2,
  LBW_ERROR_COUNT_MISMATCH = 3,
  LBW_ERROR_NON_CONVERGENCE = 4,
  LBW_ERROR_DEGENERATE_MATRIX = 5,
  LBW_ERROR_NOT_SPD = 6,
  LBW_ERROR_INSUFFICIENT_DATA = 7,
  LBW_ERROR_EMPTY_COMPONENT = 8,
  LBW_ERROR_NON_FINITE_INPUT = 9,
  LBW_ERROR_NON_FINITE_COST = 10,
  LBW_ERROR_UNKNOWN_GROUP = 11,
  LBW_ERROR_PROVENANCE_MISMATCH = 12,
  LBW_ERROR_SINGLE_GROUP = 13,
  LBW_ERROR_SINGLE_CLASS = 14,
  LBW_ERROR_EMPTY_MASK = 15,
  LBW_ERROR_BOTH_EMPTY = 16,
  LBW_ERROR_IO = 17,
  LBW_ERROR_INTERNAL = 18
};

/* Transport model handle: per-group mixtures, matchings, and optionally a
 * barycenter block. */
typedef struct lbw_model lbw_model;

typedef struct lbw_gmm_config {
  double reg;        /* covariance regularization, default 1e-6 */
  int32_t max_iter;  /* EM iteration cap, default 300 */
  double ll_tol;     /* relative log-likelihood tolerance, default 1e-7 */
  uint64_t seed;     /* RNG seed, default 0 */
  int32_t n_init;    /* EM restarts, default 4 */
} lbw_gmm_config;

typedef struct lbw_barycenter_config {
  int32_t max_iter;      /* fixed-point iteration cap, default 200 */
  double tol;            /* relative change tolerance, default 1e-9 */
  int32_t init_identity; /* nonzero: start from I instead of the mean of inputs */
  double floor;          /* eigenvalue floor, default 1e-12 */
} lbw_barycenter_config;

LBW_API void lbw_gmm_config_init(lbw_gmm_config* cfg);
LBW_API void lbw_barycenter_config_init(lbw_barycenter_config* cfg);

LBW_API const char* lbw_version_string(void);

/* Message for the most recent error on this thread; never NULL. */
LBW_API const char* lbw_last_error_message(void);

/* --- model lifecycle ----------------------------------------------------- */

/* Fit one mixture per group and match components against the first group.
 * group_data[g] points at group_rows[g] * dim row-major doubles. */
LBW_API int lbw_fit(const double* const* group_data, const int64_t* group_rows,
                    const char* const* group_labels, int32_t n_groups,
                    int32_t dim, int32_t k, const lbw_gmm_config* cfg,
                    lbw_model** out);

/* Like lbw_fit, but k is chosen from a grid by the summed per-group AIC.
 * The sweep is recorded in the model file. */
LBW_API int lbw_fit_select_k(const double* const* group_data,
                             const int64_t* group_rows,
                             const char* const* group_labels, int32_t n_groups,
                             int32_t dim, const int32_t* k_grid, int32_t n_k,
                             const lbw_gmm_config* cfg, lbw_model** out);

LBW_API int lbw_model_save(const lbw_model* model, const char* path);
LBW_API int lbw_model_load(const char* path, lbw_model** out);
LBW_API void lbw_model_free(lbw_model* model);

LBW_API int lbw_model_info(const lbw_model* model, int32_t* k, int32_t* dim,
                           int32_t* n_groups, int32_t* has_barycenter);
/* Label pointer stays valid while the model lives. */
LBW_API int lbw_model_group_label(const lbw_model* model, int32_t index,
                                  const char** label);
/* Recorded (k, aic) sweep; call with ks/aics NULL to query the length. */
LBW_API int lbw_model_k_sweep(const lbw_model* model, int32_t* ks, double* aics,
                              int32_t* length);

/* --- transport and barycenter -------------------------------------------- */

/* Transport n points (row-major n x dim) between groups; out has the same
 * layout and may alias x. */
LBW_API int lbw_transport(const lbw_model* model, const char* from_group,
                          const char* to_group, const double* x, int64_t n,
                          double* out);

/* Attach (or replace) the barycenter block for the given weights. */
LBW_API int lbw_barycenter(lbw_model* model, const double* lambda,
                           int32_t n_weights, const lbw_barycenter_config* cfg);

LBW_API int lbw_transport_to_barycenter(const lbw_model* model,
                                        const char* group, const double* x,
                                        int64_t n, double* out);

/* Count of points whose log density falls below the group's stored training
 * percentile; a diagnostic for out-of-sample inputs. */
LBW_API int lbw_count_low_density(const lbw_model* model, const char* group,
                                  const double* x, int64_t n, int64_t* count);

/* Squared Bures-Wasserstein distance per matched component pair between two
 * groups. comp_a/comp_b/dist_sq hold k entries ordered by reference
 * component; total may be NULL. */
LBW_API int lbw_pair_distances(const lbw_model* model, const char* group_a,
                               const char* group_b, int32_t* comp_a,
                               int32_t* comp_b, double* dist_sq, double* total);

/* --- fairness ------------------------------------------------------------- */

/* Demographic-parity repair: transport every row to the uniform-weight
 * barycenter of its protected group. z holds group codes 0..n_groups-1 that
 * index group_labels. repaired is n x dim row-major; model_out is optional
 * and carries the fitted model with barycenter attached. */
LBW_API int lbw_repair(const double* features, int64_t n, int32_t dim,
                       const int32_t* z, const char* const* group_labels,
                       int32_t n_groups, int32_t k, const lbw_gmm_config* cfg,
                       const lbw_barycenter_config* bary_cfg, double* repaired,
                       lbw_model** model_out);

/* Max |TPR - FPR| of the ROC for the group label (two-sample KS statistic);
 * divide_by_sqrt2 selects the geometric distance-from-diagonal variant. */
LBW_API int lbw_dp_gamma(const double* scores, const int32_t* group, int64_t n,
                         int32_t divide_by_sqrt2, double* out);

/* Area under the ROC curve, ties counted 1/2. */
LBW_API int lbw_auc(const double* scores, const int32_t* target, int64_t n,
                    double* out);

/* Fit the built-in ridge-logistic scorer on (features, target) and write its
 * in-sample scores. Deterministic for a fixed seed. */
LBW_API int lbw_linear_scores(const double* features, const int32_t* target,
                              int64_t n, int32_t dim, double l2, uint64_t seed,
                              double* scores);

/* --- shape benchmark ------------------------------------------------------ */

/* Run the silhouette sweep and write one CSV row per (k, lambda, seed) cell.
 * Silhouettes are PGM (P5) or 0/1 CSV grids. lambdas is n_lambdas * n_shapes
 * row-major. truth_dir may be NULL; when set, weights interior to the simplex
 * are scored against "<truth_dir>/lambda_<w0>_<w1>[_<w2>].pgm" with weights
 * formatted to two decimals. */
LBW_API int lbw_bench_shapes(const char* const* silhouette_paths,
                             int32_t n_shapes, const char* truth_dir,
                             const int32_t* k_grid, int32_t n_k,
                             const double* lambdas, int32_t n_lambdas,
                             int64_t n_points, const uint64_t* seeds,
                             int32_t n_seeds, const lbw_gmm_config* cfg,
                             double bandwidth, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* LBW_H_ */
