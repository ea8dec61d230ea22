#ifndef UPLIFT_FFI_H
#define UPLIFT_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UpliftStatus {
  UPLIFT_STATUS_OK = 0,
  UPLIFT_STATUS_NULL_POINTER = 1,
  UPLIFT_STATUS_INVALID_UTF8 = 2,
  UPLIFT_STATUS_CONFIG = 3,
  UPLIFT_STATUS_UNKNOWN_METHOD = 4,
  UPLIFT_STATUS_IO = 5,
  UPLIFT_STATUS_INVALID_DATA = 6,
  UPLIFT_STATUS_DIMENSION_MISMATCH = 7,
  UPLIFT_STATUS_DEGENERATE_SELECTION = 8,
  UPLIFT_STATUS_NUMERIC = 9,
  UPLIFT_STATUS_MODEL_FORMAT = 10,
  UPLIFT_STATUS_BUFFER_TOO_SMALL = 11,
  UPLIFT_STATUS_PANIC = 12,
} UpliftStatus;

/**
 * Feature matrix with treatment and outcome labels.
 */
typedef struct UpliftDataset UpliftDataset;

/**
 * Fitted ITE estimator.
 */
typedef struct UpliftModel UpliftModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *uplift_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *uplift_last_error(void);

/**
 * Build a dataset from a row-major `n_rows * n_features` matrix and 0/1 label arrays.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum UpliftStatus uplift_dataset_from_arrays(const double *features,
                                             size_t n_rows,
                                             size_t n_features,
                                             const uint8_t *treatment,
                                             const uint8_t *outcome,
                                             struct UpliftDataset **out);

/**
 * Load a CSV. Null `treatment_col` / `outcome_col` default to `treatment` /
 * `conversion`; features are every other column except `visit` and `exposure`.
 *
 * # Safety
 * String arguments must be NUL-terminated or null where allowed; `out` must be writable.
 */
enum UpliftStatus uplift_dataset_load_csv(const char *path,
                                          const char *treatment_col,
                                          const char *outcome_col,
                                          struct UpliftDataset **out);

/**
 * Simulate a randomized experiment. `effect` uses the CLI shorthand, e.g.
 * `constant:0.1`, `linear:1.5` or `sign-flip:0.2`.
 *
 * # Safety
 * `effect` must be NUL-terminated; `out` must be writable.
 */
enum UpliftStatus uplift_dataset_synthesize(size_t n_rows,
                                            size_t n_features,
                                            const char *effect,
                                            uint64_t seed,
                                            struct UpliftDataset **out);

/**
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t uplift_dataset_n_rows(const struct UpliftDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t uplift_dataset_n_features(const struct UpliftDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void uplift_dataset_free(struct UpliftDataset *ds);

/**
 * Fit method `method_id` (e.g. `2m-logit`, `uplift-rf`) with default settings.
 *
 * # Safety
 * `ds` must be a live handle, `method_id` NUL-terminated, `out` writable.
 */
enum UpliftStatus uplift_model_fit(const struct UpliftDataset *ds,
                                   const char *method_id,
                                   uint64_t seed,
                                   struct UpliftModel **out);

/**
 * Score `n_rows` rows of a row-major feature matrix into `scores[0..n_rows]`.
 *
 * # Safety
 * `features` must hold `n_rows * n_features` values and `scores` room for `n_rows`.
 */
enum UpliftStatus uplift_model_predict(const struct UpliftModel *model,
                                       const double *features,
                                       size_t n_rows,
                                       size_t n_features,
                                       double *scores);

/**
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t uplift_model_n_features(const struct UpliftModel *model);

/**
 * # Safety
 * `model` must be a live handle and `path` NUL-terminated.
 */
enum UpliftStatus uplift_model_save(const struct UpliftModel *model, const char *path);

/**
 * # Safety
 * `path` must be NUL-terminated and `out` writable.
 */
enum UpliftStatus uplift_model_load(const char *path, struct UpliftModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void uplift_model_free(struct UpliftModel *model);

/**
 * Treated minus control conversion rate over the rows in `indices`.
 *
 * # Safety
 * `indices` must hold `n` values; `ate` must be writable.
 */
enum UpliftStatus uplift_realized_ate(const struct UpliftDataset *ds,
                                      const size_t *indices,
                                      size_t n,
                                      double *ate);

/**
 * Indices of the top `ceil(fraction * n)` scores, highest first, ties to the
 * lower index. `*selected_len` always receives the required length; if it
 * exceeds `capacity` nothing is written and `BufferTooSmall` is returned.
 *
 * # Safety
 * `scores` must hold `n` values and `selected` room for `capacity`.
 */
enum UpliftStatus uplift_select_top(const double *scores,
                                    size_t n,
                                    double fraction,
                                    size_t *selected,
                                    size_t capacity,
                                    size_t *selected_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UPLIFT_FFI_H */
