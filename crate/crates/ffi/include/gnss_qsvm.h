#ifndef GNSS_QSVM_H
#define GNSS_QSVM_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GqModelKind {
  GQ_MODEL_KIND_QSVM = 0,
  GQ_MODEL_KIND_SVM = 1,
} GqModelKind;

typedef enum GqKernelMode {
  GQ_KERNEL_MODE_EXACT = 0,
  GQ_KERNEL_MODE_SAMPLED = 1,
} GqKernelMode;

typedef enum GqStatus {
  GQ_STATUS_OK = 0,
  GQ_STATUS_NULL_POINTER = 1,
  GQ_STATUS_INVALID_ARGUMENT = 2,
  GQ_STATUS_DIMENSION = 3,
  GQ_STATUS_INVALID_GATE = 4,
  GQ_STATUS_DEGENERATE_DATA = 5,
  GQ_STATUS_INVALID_LABELS = 6,
  GQ_STATUS_INVALID_DATASET = 7,
  GQ_STATUS_PARSE = 8,
  GQ_STATUS_UNSUPPORTED = 9,
  GQ_STATUS_IO = 10,
  GQ_STATUS_SERIALIZATION = 11,
  GQ_STATUS_PANIC = 99,
} GqStatus;

/**
 * Opaque trained model.
 */
typedef struct GqModel GqModel;

/**
 * Training options. Obtain defaults from [`gq_train_config_default`].
 */
typedef struct GqTrainConfig {
  enum GqModelKind model;
  /**
   * Fidelity evaluation for `GQ_MODEL_KIND_QSVM`; ignored for the RBF model.
   */
  enum GqKernelMode kernel;
  uint64_t shots;
  uint64_t seed;
  size_t repetitions;
  /**
   * Nonzero disables min-max scaling.
   */
  int32_t raw;
  double range_lo;
  double range_hi;
  double c;
  double kkt_tolerance;
  size_t max_passes;
} GqTrainConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *gq_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gq_version(void);

struct GqTrainConfig gq_train_config_default(void);

/**
 * Exact ZZ fidelity kernel between two `n`-feature points.
 */
enum GqStatus gq_fidelity_exact(const double *x,
                                const double *y,
                                size_t n,
                                size_t repetitions,
                                double *out);

/**
 * Shot-sampled compute-uncompute estimate of the fidelity kernel.
 */
enum GqStatus gq_fidelity_sampled(const double *x,
                                  const double *y,
                                  size_t n,
                                  size_t repetitions,
                                  uint64_t shots,
                                  uint64_t seed,
                                  double *out);

enum GqStatus gq_rbf(const double *x, const double *y, size_t n, double gamma, double *out);

/**
 * Trains a model on `n` raw samples. On success `*out` owns a new handle.
 */
enum GqStatus gq_model_train(const double *features,
                             const uint32_t *labels,
                             size_t n,
                             const struct GqTrainConfig *config,
                             struct GqModel **out);

/**
 * Predicts class codes for `n` raw samples into `out_labels[0..n]`.
 */
enum GqStatus gq_model_predict(const struct GqModel *model,
                               const double *features,
                               size_t n,
                               uint32_t *out_labels);

/**
 * Decision grid over the scaled feature square; writes `resolution²` class
 * codes row-major (y outer, x inner) into `out_cells`.
 */
enum GqStatus gq_model_boundary_grid(const struct GqModel *model,
                                     size_t resolution,
                                     uint32_t *out_cells);

/**
 * Number of classes the model distinguishes.
 */
enum GqStatus gq_model_num_classes(const struct GqModel *model, size_t *out);

/**
 * Serializes the model to JSON. Release `*out` with [`gq_string_free`].
 */
enum GqStatus gq_model_to_json(const struct GqModel *model, char **out);

enum GqStatus gq_model_from_json(const char *json, struct GqModel **out);

void gq_model_free(struct GqModel *model);

void gq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GNSS_QSVM_H */
