/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef PSSM_H
#define PSSM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PssmStatus {
  PSSM_STATUS_OK = 0,
  PSSM_STATUS_NULL_POINTER = 1,
  PSSM_STATUS_INVALID_PARAMETER = 2,
  PSSM_STATUS_CONFIG = 3,
  PSSM_STATUS_DATA = 4,
  PSSM_STATUS_IO = 5,
  PSSM_STATUS_BUFFER_TOO_SMALL = 6,
  PSSM_STATUS_ENUMERATION_GUARD = 7,
  PSSM_STATUS_PANIC = 8,
} PssmStatus;

typedef enum PssmComposition {
  PSSM_COMPOSITION_BASIC = 0,
  PSSM_COMPOSITION_ADVANCED = 1,
} PssmComposition;

typedef enum PssmNoise {
  PSSM_NOISE_LAPLACE = 0,
  PSSM_NOISE_GUMBEL = 1,
  // Noiseless, exact argmax. Not private.
  PSSM_NOISE_ZERO = 2,
} PssmNoise;

// Opaque k-medians objective.
typedef struct PssmKMedians PssmKMedians;

typedef struct PssmPoint {
  double x;
  double y;
} PssmPoint;

// Options for [`pssm_kmedians_run`].
typedef struct PssmRunOptions {
  size_t k;
  double theta;
  double epsilon;
  double delta;
  enum PssmComposition composition;
  enum PssmNoise noise;
  // Public bound on the stream length; 0 means the stream's own length.
  size_t n_bound;
  uint64_t seed;
} PssmRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pssm_version(void);

// Copies the calling thread's last error message into `buf` (always
// NUL-terminated when `len > 0`) and returns the buffer size needed for the
// full message including the terminator. Returns 0 if no error is stored.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t pssm_last_error_message(char *buf, size_t len);

// Builds a k-medians objective over `clients` and `candidates`.
// A non-positive `normalizer` selects the default (Manhattan diameter of
// the joint bounding box).
//
// # Safety
// Point arrays must hold the stated number of elements; `out` must be a
// valid pointer. The handle written to `out` must be released with
// [`pssm_kmedians_free`].
enum PssmStatus pssm_kmedians_new(const struct PssmPoint *clients,
                                  size_t num_clients,
                                  const struct PssmPoint *candidates,
                                  size_t num_candidates,
                                  double normalizer,
                                  struct PssmKMedians **out);

// # Safety
// `handle` must be null or come from [`pssm_kmedians_new`] and not have
// been freed already.
void pssm_kmedians_free(struct PssmKMedians *handle);

// Number of candidates (the ground set size), or 0 for a null handle.
//
// # Safety
// `handle` must be null or a live handle.
size_t pssm_kmedians_num_candidates(const struct PssmKMedians *handle);

// Writes the normalised objective `f(S)` and the clustering cost
// `sum_p d(p, S)` of candidate indices `set`. Either output may be null.
//
// # Safety
// `handle` must be live, `set` must hold `len` indices.
enum PssmStatus pssm_kmedians_evaluate(const struct PssmKMedians *handle,
                                       const size_t *set,
                                       size_t len,
                                       double *out_value,
                                       double *out_cost);

// Runs the private streaming maximizer over `stream` (candidate indices in
// arrival order) and writes the selected indices to `out_set`.
//
// `*out_len` receives the number of selected elements. If `out_capacity`
// is too small, nothing is written to `out_set`, `*out_len` holds the
// required size, and `PSSM_STATUS_BUFFER_TOO_SMALL` is returned. A capacity
// of `k` always suffices.
//
// # Safety
// `handle` and `options` must be valid; `stream` must hold `stream_len`
// indices; `out_set` must hold `out_capacity` writable slots.
enum PssmStatus pssm_kmedians_run(const struct PssmKMedians *handle,
                                  const size_t *stream,
                                  size_t stream_len,
                                  const struct PssmRunOptions *options,
                                  size_t *out_set,
                                  size_t out_capacity,
                                  size_t *out_len);

// Per-instance Laplace threshold scale for `k`, `t` guesses and `(epsilon, delta)`.
//
// # Safety
// `out` must be a valid pointer.
enum PssmStatus pssm_laplace_sigma(size_t k, size_t t, double epsilon, double delta, double *out);

// Shared Gumbel scale for `t` guesses and `(epsilon, delta)`.
//
// # Safety
// `out` must be a valid pointer.
enum PssmStatus pssm_gumbel_gamma(size_t t, double epsilon, double delta, double *out);

// Number of guesses in the ladder from `lower` to `upper` with ratio `1 + theta`.
//
// # Safety
// `out` must be a valid pointer.
enum PssmStatus pssm_ladder_size(double lower, double upper, double theta, size_t *out);

// Parses a `key = value` experiment config, runs the sweep and writes the
// per-epsilon CSVs into `out_dir`. Cell failures are reported as
// `PSSM_STATUS_CONFIG` after the successful cells have been written.
//
// # Safety
// Both arguments must be NUL-terminated strings.
enum PssmStatus pssm_experiment_run(const char *config_text, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSSM_H */
