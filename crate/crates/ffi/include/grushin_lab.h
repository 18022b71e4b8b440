#ifndef GRUSHIN_LAB_H
#define GRUSHIN_LAB_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from the grushin-lab-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible interface function.
typedef enum GrushinLabStatus {
  // The call succeeded and all outputs were written.
  GRUSHIN_LAB_STATUS_OK = 0,
  // A required pointer argument was null.
  GRUSHIN_LAB_STATUS_NULL_POINTER = 1,
  // An argument violated a documented precondition.
  GRUSHIN_LAB_STATUS_INVALID_ARGUMENT = 2,
  // A mathematical invariant failed on computed data.
  GRUSHIN_LAB_STATUS_INVARIANT = 3,
  // An iterative computation did not reach its tolerance.
  GRUSHIN_LAB_STATUS_NON_CONVERGENCE = 4,
  // A panic was caught at the interface boundary.
  GRUSHIN_LAB_STATUS_PANIC = 5,
} GrushinLabStatus;

// Reflection-symmetry tag for spectral sectors of a scalar first block.
typedef enum GrushinLabParity {
  // No parity restriction (two-or-more-dimensional first block).
  GRUSHIN_LAB_PARITY_ANY = 0,
  // Even under reflection of the first block.
  GRUSHIN_LAB_PARITY_EVEN = 1,
  // Odd under reflection of the first block.
  GRUSHIN_LAB_PARITY_ODD = 2,
} GrushinLabParity;

// Opaque handle to a validated parameter triple (block dimensions and
// degeneracy exponent).
typedef struct GrushinLabParams GrushinLabParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Allocates a validated parameter handle.
//
// `h` and `k` are the block dimensions (each at least 1), `alpha` the
// integer degeneracy exponent.  On success `*out` owns the handle.
enum GrushinLabStatus grushin_lab_params_new(size_t h,
                                             size_t k,
                                             uint32_t alpha,
                                             struct GrushinLabParams **out);

// Releases a parameter handle.  Null is accepted and ignored.
void grushin_lab_params_free(struct GrushinLabParams *params);

// Writes the homogeneous dimension `h + (1 + alpha) k` to `*out`.
enum GrushinLabStatus grushin_lab_homogeneous_dimension(const struct GrushinLabParams *params,
                                                        size_t *out);

// Writes the gauge norm of the point `(x, y)` to `*out`.
//
// `x` must hold `h` doubles and `y` must hold `k` doubles, matching the
// dimensions of the handle.
enum GrushinLabStatus grushin_lab_gauge_norm(const struct GrushinLabParams *params,
                                             const double *x,
                                             size_t x_len,
                                             const double *y,
                                             size_t y_len,
                                             double *out);

// Writes the degenerate angular weight of the point `(x, y)` to `*out`.
//
// The weight is `(|x| / d)^(2 alpha)` with `d` the gauge norm; it lies in
// `[0, 1]` and is undefined at the origin.
enum GrushinLabStatus grushin_lab_psi_alpha(const struct GrushinLabParams *params,
                                            const double *x,
                                            size_t x_len,
                                            const double *y,
                                            size_t y_len,
                                            double *out);

// Applies the anisotropic dilation of factor `lambda > 0` to `(x, y)`.
//
// The scaled first block (`h` doubles) is written to `out_x` and the
// scaled second block (`k` doubles) to `out_y`; outputs may alias the
// inputs.
enum GrushinLabStatus grushin_lab_dilate(const struct GrushinLabParams *params,
                                         double lambda,
                                         const double *x,
                                         size_t x_len,
                                         const double *y,
                                         size_t y_len,
                                         double *out_x,
                                         double *out_y);

// Writes the spherical eigenvalue of an integer-degree harmonic to `*out`.
//
// Only established for a first block of dimension at least 2; scalar
// first blocks are refused.
enum GrushinLabStatus grushin_lab_eigenvalue_from_degree(const struct GrushinLabParams *params,
                                                         uint32_t degree,
                                                         double *out);

// Writes the homogeneity degree whose formula eigenvalue is `mu` to
// `*out` (the inverse of `grushin_lab_eigenvalue_from_degree`, extended
// to real degrees).
enum GrushinLabStatus grushin_lab_degree_from_eigenvalue(const struct GrushinLabParams *params,
                                                         double mu,
                                                         double *out);

// Solves one spectral sector and writes its `count` smallest eigenvalues
// to `out_mu` in increasing order.
//
// `l` and `m` are the harmonic degrees of the two blocks; `parity` must
// be even or odd exactly when the first block is scalar (`h = 1`, where
// `l` must be 0) and `Any` otherwise.  `resolution` controls the angular
// discretization; `count` may not exceed half of it.
enum GrushinLabStatus grushin_lab_sector_spectrum(const struct GrushinLabParams *params,
                                                  uint32_t l,
                                                  uint32_t m,
                                                  enum GrushinLabParity parity,
                                                  size_t count,
                                                  size_t resolution,
                                                  double *out_mu);

// Copies the calling thread's last error message into `buf` as a
// NUL-terminated string, truncating to `cap - 1` bytes, and returns the
// full message length in bytes (excluding the terminator).
//
// A null `buf` or zero `cap` writes nothing and just reports the length.
// Any successful interface call clears the message; reading it does not.
size_t grushin_lab_last_error_message(char *buf, size_t cap);

// Returns the library version as a static NUL-terminated string.
const char *grushin_lab_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRUSHIN_LAB_H */
