/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef PROXRF_H
#define PROXRF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum ProxrfStatus {
  PROXRF_STATUS_OK = 0,
  PROXRF_STATUS_INSUFFICIENT_DATA = 1,
  PROXRF_STATUS_FRAME_MISMATCH = 2,
  PROXRF_STATUS_MISSING_FRAMES = 3,
  PROXRF_STATUS_WINDOW_LENGTH_MISMATCH = 4,
  PROXRF_STATUS_MODEL_SHAPE_MISMATCH = 5,
  PROXRF_STATUS_EMPTY_GROUP = 6,
  PROXRF_STATUS_EMPTY_TRAINING_SET = 7,
  PROXRF_STATUS_SHAPE_MISMATCH = 8,
  PROXRF_STATUS_INVALID_FEATURE = 9,
  PROXRF_STATUS_CORRUPT_MODEL = 10,
  PROXRF_STATUS_PARSE_ERROR = 11,
  PROXRF_STATUS_REFERENTIAL_ERROR = 12,
  PROXRF_STATUS_ANNOTATION_CONFLICT = 13,
  PROXRF_STATUS_CONFIG_ERROR = 14,
  PROXRF_STATUS_INVALID_PARAMS = 15,
  PROXRF_STATUS_LABEL_COVERAGE_ERROR = 16,
  PROXRF_STATUS_IO_ERROR = 17,
  // A required pointer argument was null.
  PROXRF_STATUS_NULL_POINTER = 100,
  // An output buffer is too small or a string is not UTF-8.
  PROXRF_STATUS_INVALID_ARGUMENT = 101,
  // The library panicked; the call had no effect on its outputs.
  PROXRF_STATUS_PANIC = 102,
} ProxrfStatus;

// A trained random forest.
typedef struct ProxrfForest ProxrfForest;

// A pedestrian track.
typedef struct ProxrfTrajectory ProxrfTrajectory;

// Descriptor and smoothing parameters for [`proxrf_compute_pid`].
typedef struct ProxrfPidParams {
  size_t t1;
  double sigma_rho;
  double sigma_theta;
  double k_s;
  uint32_t l_max;
  size_t grid_samples_per_axis;
  bool soft_assignment;
  // Smoothing factor in (0, 1].
  double alpha;
  // Speed (m/s) below which a pedestrian has no heading.
  double t_s;
} ProxrfPidParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a
// successful one. The pointer stays valid until the next call on the
// thread.
const char *proxrf_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *proxrf_version(void);

struct ProxrfPidParams proxrf_pid_params_default(void);

// Number of values [`proxrf_compute_pid`] writes for a pyramid depth.
size_t proxrf_pid_descriptor_len(uint32_t l_max);

// Builds a trajectory from `len` samples with strictly increasing frames.
//
// # Safety
// `frames`, `xs` and `ys` must each point to `len` readable values, and
// `out` must be writable.
enum ProxrfStatus proxrf_trajectory_new(uint64_t track_id,
                                        double fps,
                                        const int64_t *frames,
                                        const double *xs,
                                        const double *ys,
                                        size_t len,
                                        struct ProxrfTrajectory **out);

// # Safety
// `traj` must be null or a handle from [`proxrf_trajectory_new`] that has
// not been freed.
void proxrf_trajectory_free(struct ProxrfTrajectory *traj);

// Number of samples in a trajectory, 0 for null.
//
// # Safety
// `traj` must be null or a live handle.
size_t proxrf_trajectory_len(const struct ProxrfTrajectory *traj);

// Interaction descriptor of `anchor -> target` over the window centered at
// `center`: the 16 polar histogram cells followed by the speed pyramid.
// `params` may be null for the defaults. On success `*written` holds the
// descriptor length.
//
// # Safety
// The handles must be live, `out` must have room for `out_len` values and
// `written` must be writable.
enum ProxrfStatus proxrf_compute_pid(const struct ProxrfTrajectory *anchor,
                                     const struct ProxrfTrajectory *target,
                                     int64_t center,
                                     const struct ProxrfPidParams *params,
                                     uint64_t seed,
                                     double *out,
                                     size_t out_len,
                                     size_t *written);

// Root mean square distance of `n` points to their centroid.
//
// # Safety
// `xs` and `ys` must point to `n` readable values; `out` must be writable.
enum ProxrfStatus proxrf_dispersion(const double *xs, const double *ys, size_t n, double *out);

// Eigenvalue ratio of the position covariance; 0 for fewer than two points
// or a degenerate (collinear) group.
//
// # Safety
// `xs` and `ys` must point to `n` readable values; `out` must be writable.
enum ProxrfStatus proxrf_shape_ratio(const double *xs, const double *ys, size_t n, double *out);

// Loads a model file written by the command-line tool.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum ProxrfStatus proxrf_forest_load(const char *path, struct ProxrfForest **out);

// Parses a model from `len` bytes of JSON.
//
// # Safety
// `json` must point to `len` readable bytes and `out` must be writable.
enum ProxrfStatus proxrf_forest_from_json(const uint8_t *json,
                                          size_t len,
                                          struct ProxrfForest **out);

// # Safety
// `forest` must be null or a live handle.
void proxrf_forest_free(struct ProxrfForest *forest);

// Feature vector length the model expects, 0 for null.
//
// # Safety
// `forest` must be null or a live handle.
size_t proxrf_forest_feature_count(const struct ProxrfForest *forest);

// Number of classes, 0 for null.
//
// # Safety
// `forest` must be null or a live handle.
size_t proxrf_forest_class_count(const struct ProxrfForest *forest);

// Name of class `index`, owned by the handle; null when out of range.
//
// # Safety
// `forest` must be null or a live handle.
const char *proxrf_forest_class_name(const struct ProxrfForest *forest, size_t index);

// Classifies one feature vector. Writes the winning class index and, when
// `probabilities` is not null, one vote fraction per class.
//
// # Safety
// `forest` must be live, `features` must point to `n_features` values,
// `class_out` must be writable and `probabilities`, when not null, must
// have room for `n_probabilities` values.
enum ProxrfStatus proxrf_forest_predict(const struct ProxrfForest *forest,
                                        const double *features,
                                        size_t n_features,
                                        size_t *class_out,
                                        double *probabilities,
                                        size_t n_probabilities);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROXRF_H */
