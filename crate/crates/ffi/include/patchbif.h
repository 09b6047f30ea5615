#ifndef PATCHBIF_H
#define PATCHBIF_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Zero is success; the rest mirror the library's error codes.
 */
typedef enum PbStatus {
  PB_OK = 0,
  PB_NULL_POINTER = 1,
  PB_INVALID_ARGUMENT = 2,
  PB_INTERNAL = 3,
  PB_NESTING_VIOLATION = 10,
  PB_QUADRATURE_UNDERRESOLVED = 11,
  PB_NEGATIVE_RADICAND = 12,
  PB_NOT_NESTED = 13,
  PB_POINT_ON_BOUNDARY = 14,
  PB_DOMAIN = 15,
  PB_B_TOO_LARGE = 16,
  PB_NOT_A_ROOT = 17,
  PB_PARAM_WINDOW = 18,
  PB_NO_ROOT = 19,
  PB_DEGENERATE = 20,
  PB_NO_CONVERGENCE = 21,
  PB_SINGULAR_JACOBIAN = 22,
  PB_T_S_SINGULAR = 23,
  PB_ZERO_MEAN_NO_BIFURCATION = 24,
  PB_IO = 25,
  PB_CONFIG = 26,
} PbStatus;

/**
 * Two-layer root selector.
 */
typedef enum PbRoot {
  PB_ROOT_MINUS = 0,
  PB_ROOT_PLUS = 1,
} PbRoot;

/**
 * A computed branch together with the settings that produced it.
 */
typedef struct PbBranch PbBranch;

/**
 * A certified bifurcation point.
 */
typedef struct PbPoint PbPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pb_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *pb_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed once.
 */
void pb_string_free(char *s);

/**
 * Certifies the two-layer point at the selected root of the dispersion
 * polynomial.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum PbStatus pb_two_layer_bifurcation(double b,
                                       size_t m,
                                       enum PbRoot root,
                                       size_t n_max,
                                       struct PbPoint **out);

/**
 * Certifies the two-layer point at an explicit `theta`, which must be a
 * root. `theta = b²` is refused with `PB_ZERO_MEAN_NO_BIFURCATION`.
 *
 * # Safety
 * As [`pb_two_layer_bifurcation`].
 */
enum PbStatus pb_two_layer_bifurcation_at(double b,
                                          size_t m,
                                          double theta,
                                          size_t n_max,
                                          struct PbPoint **out);

/**
 * Certifies the zero-circulation three-layer point for `(b2, theta2)`.
 *
 * # Safety
 * As [`pb_two_layer_bifurcation`].
 */
enum PbStatus pb_three_layer_bifurcation(double b2,
                                         double theta2,
                                         size_t m,
                                         size_t n_max,
                                         struct PbPoint **out);

/**
 * # Safety
 * `p` must be NULL or a point from this library, freed once.
 */
void pb_point_free(struct PbPoint *p);

/**
 * Bifurcation value `Θ*`.
 *
 * # Safety
 * `p` must be a live point and `theta` writable.
 */
enum PbStatus pb_point_theta(const struct PbPoint *p, double *theta);

/**
 * Number of layers, and their radii and vorticities (outermost first)
 * written to `radii` and `thetas` when those are non-NULL. Each buffer must
 * hold at least `*n_layers` values; call once with NULL buffers to query
 * the count.
 *
 * # Safety
 * `p` must be a live point, `n_layers` writable, buffers NULL or large enough.
 */
enum PbStatus pb_point_layers(const struct PbPoint *p,
                              size_t *n_layers,
                              double *radii,
                              double *thetas);

/**
 * Transversality coefficient and the smallest higher-mode determinant.
 *
 * # Safety
 * `p` must be a live point; outputs writable.
 */
enum PbStatus pb_point_certificate(const struct PbPoint *p,
                                   double *transversality,
                                   double *higher_mode_margin);

/**
 * Full certificate as JSON. Free with [`pb_string_free`].
 *
 * # Safety
 * `p` must be a live point and `out` writable.
 */
enum PbStatus pb_point_to_json(const struct PbPoint *p, char **out);

/**
 * Continues the branch from `p`. `config_json` is NULL for defaults or a
 * JSON object with any subset of the continuation settings.
 *
 * # Safety
 * `p` live, `config_json` NULL or a NUL-terminated UTF-8 string, `out` writable.
 */
enum PbStatus pb_continue(const struct PbPoint *p, const char *config_json, struct PbBranch **out);

/**
 * # Safety
 * `b` must be NULL or a branch from this library, freed once.
 */
void pb_branch_free(struct PbBranch *b);

/**
 * Number of converged states.
 *
 * # Safety
 * `b` live, `len` writable.
 */
enum PbStatus pb_branch_len(const struct PbBranch *b, size_t *len);

/**
 * Amplitude, `Θ` and residual of state `index`. NULL outputs are skipped.
 *
 * # Safety
 * `b` live; outputs NULL or writable.
 */
enum PbStatus pb_branch_state(const struct PbBranch *b,
                              size_t index,
                              double *amplitude,
                              double *theta,
                              double *residual);

/**
 * Cosine coefficients of layer `layer` in state `index`. Writes up to
 * `cap` values to `coeffs` and the total count to `len`.
 *
 * # Safety
 * `b` live; `coeffs` NULL or holding `cap` values; `len` writable.
 */
enum PbStatus pb_branch_coefficients(const struct PbBranch *b,
                                     size_t index,
                                     size_t layer,
                                     double *coeffs,
                                     size_t cap,
                                     size_t *len);

/**
 * Re-verifies every state with `strict`-times the quadrature. `pass` is
 * set to 1 when all states pass, else 0.
 *
 * # Safety
 * `b` live, `pass` writable.
 */
enum PbStatus pb_branch_verify(const struct PbBranch *b, size_t strict, int32_t *pass);

/**
 * States, stop reason and events as JSON. Free with [`pb_string_free`].
 *
 * # Safety
 * `b` live, `out` writable.
 */
enum PbStatus pb_branch_to_json(const struct PbBranch *b, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PATCHBIF_H */
