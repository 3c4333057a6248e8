#ifndef CVSTEER_H
#define CVSTEER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CvStatus {
  CV_STATUS_OK = 0,
  CV_STATUS_NULL_POINTER = 1,
  CV_STATUS_INVALID_ARGUMENT = 2,
  CV_STATUS_INVALID_DIM = 3,
  CV_STATUS_TRUNCATION = 4,
  CV_STATUS_DIMENSION_MISMATCH = 5,
  CV_STATUS_DEGENERATE_CONDITIONING = 6,
  CV_STATUS_NUMERICAL = 7,
  CV_STATUS_PARSE = 8,
  CV_STATUS_INVALID_STATE = 9,
  CV_STATUS_OUT_OF_RANGE = 10,
  CV_STATUS_PANIC = 99,
} CvStatus;

typedef enum CvSide {
  CV_SIDE_NONE = 0,
  CV_SIDE_UPPER = 1,
  CV_SIDE_LOWER = 2,
} CvSide;

/**
 * Opaque multi-mode state.
 */
typedef struct CvState CvState;

typedef struct CvSteeringReport {
  double value;
  bool violated;
  enum CvSide side;
  double margin;
} CvSteeringReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (NUL-terminated, truncated
 * to fit) into `buf`. Returns the full message length in bytes, excluding
 * the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t cvsteer_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cvsteer_version(void);

/**
 * Single-mode coherent state `|gamma⟩` truncated at `dim`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum CvStatus cvsteer_state_coherent(double gamma, size_t dim, struct CvState **out);

/**
 * Two-mode state `|gamma_a⟩ ⊗ |gamma_b⟩`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum CvStatus cvsteer_state_coherent_pair(double gamma_a,
                                          double gamma_b,
                                          size_t dim,
                                          struct CvState **out);

/**
 * N00N state `(|N,0⟩ − |0,N⟩)/√2`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum CvStatus cvsteer_state_noon(size_t n, size_t dim, struct CvState **out);

/**
 * Parses a state from its JSON file contents.
 *
 * # Safety
 * `json` must be null or a valid NUL-terminated string; `out` must be null
 * or valid for writes.
 */
enum CvStatus cvsteer_state_from_json(const char *json, struct CvState **out);

/**
 * Releases a state; null is ignored.
 *
 * # Safety
 * `state` must be null or a handle from this library not yet freed.
 */
void cvsteer_state_free(struct CvState *state);

/**
 * # Safety
 * `state` must be a live handle; `out` must be null or valid for writes.
 */
enum CvStatus cvsteer_state_modes(const struct CvState *state, size_t *out);

/**
 * Closed-form `⟨gamma|Π^parity(beta)|gamma⟩`; `parity` is 0 (even) or 1 (odd).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum CvStatus cvsteer_analytic_parity_prob(double gamma,
                                           double beta,
                                           uint32_t parity_outcome,
                                           double *out);

/**
 * Numerical average certainty `½[P(b_β) + P(b_−β)]` of a single-mode state.
 *
 * # Safety
 * `state` must be a live handle; `out` must be null or valid for writes.
 */
enum CvStatus cvsteer_average_certainty(const struct CvState *state,
                                        double beta,
                                        uint32_t parity_outcome,
                                        double *out);

/**
 * Steering functional of a two-mode state for Alice outcome `a` at
 * `(alpha1, alpha2)` and Bob outcome `b` at `(beta1, beta2)`.
 *
 * # Safety
 * `state` must be a live handle; `out` must be null or valid for writes.
 */
enum CvStatus cvsteer_steering_functional(const struct CvState *state,
                                          uint32_t a,
                                          double alpha1,
                                          double alpha2,
                                          uint32_t b,
                                          double beta1,
                                          double beta2,
                                          double tolerance,
                                          struct CvSteeringReport *out);

/**
 * Key-rate lower bound in bits per shared state for a violation `delta`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum CvStatus cvsteer_key_rate_lower_bound(double delta, double *out);

/**
 * Mutual information in bits of a row-major 2×2 joint table.
 *
 * # Safety
 * `joint` must be null or point to 4 readable doubles; `out` must be null
 * or valid for writes.
 */
enum CvStatus cvsteer_mutual_information(const double *joint, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CVSTEER_H */
