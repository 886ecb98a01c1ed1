#ifndef POLYCAP_H
#define POLYCAP_H

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER = 1,
  PC_STATUS_INVALID_ARGUMENT = 2,
  PC_STATUS_NOT_CONVERGED = 3,
  PC_STATUS_BUFFER_TOO_SMALL = 4,
  PC_STATUS_RESOURCE_LIMIT = 5,
  PC_STATUS_PANIC = 6,
} PcStatus;

// Multi-indexed coefficient array.
typedef struct PcCoeffs PcCoeffs;

// Solved equilibrium problem.
typedef struct PcEquilibrium PcEquilibrium;

// Grid set on the n-torus.
typedef struct PcSet PcSet;

typedef struct PcSummary {
  double capacity;
  double mass;
  double energy;
  double residual;
  double violation_fraction;
  size_t iterations;
  bool converged;
} PcSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *pc_last_error(void);

// `c_k = Gamma(k + 1/2) / (sqrt(pi) Gamma(k + 1))`.
double pc_binom_coeff_c(uint64_t k);

// Build a set from a JSON document `{"n": .., "m": .., "set": {...}}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PcStatus pc_set_from_json(const char *json, struct PcSet **out);

// Number of grid points in the set (0 for a null handle).
//
// # Safety
// `set` must be null or a live handle.
size_t pc_set_count(const struct PcSet *set);

// # Safety
// `set` must be null or a handle not yet freed.
void pc_set_free(struct PcSet *set);

// Solve for the equilibrium measure. Returns `PC_STATUS_NOT_CONVERGED` (with
// a valid handle in `out`) when `max_iter` ran out.
//
// # Safety
// `set` must be a live handle; `out` must be writable.
enum PcStatus pc_equilibrium_solve(const struct PcSet *set,
                                   double tol,
                                   size_t max_iter,
                                   struct PcEquilibrium **out);

// # Safety
// `eq` must be a live handle; `out` must be writable.
enum PcStatus pc_equilibrium_summary(const struct PcEquilibrium *eq, struct PcSummary *out);

// Copy the measure's weights (row-major over the grid) into `buf`. `len` is
// the buffer length; `written` receives the number of grid points, also when
// the buffer is too small.
//
// # Safety
// `buf` must hold `len` doubles; `written` may be null.
enum PcStatus pc_equilibrium_weights(const struct PcEquilibrium *eq,
                                     double *buf,
                                     size_t len,
                                     size_t *written);

// # Safety
// `eq` must be null or a handle not yet freed.
void pc_equilibrium_free(struct PcEquilibrium *eq);

// Parse a coefficient file (`{"n", "shape", "d", "values": [[re, im], ...]}`).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PcStatus pc_coeffs_from_json(const char *json, struct PcCoeffs **out);

// Number of variables `n` (0 for a null handle).
//
// # Safety
// `f` must be null or a live handle.
size_t pc_coeffs_ndim(const struct PcCoeffs *f);

// Number of vector components `d` (0 for a null handle).
//
// # Safety
// `f` must be null or a live handle.
size_t pc_coeffs_components(const struct PcCoeffs *f);

// # Safety
// `f` must be null or a handle not yet freed.
void pc_coeffs_free(struct PcCoeffs *f);

// Rectangular partial sum `S_N f(theta)`; `n_max` and `theta` have `n`
// entries. `out` receives `d` interleaved (re, im) pairs.
//
// # Safety
// Pointers must reference arrays of the stated lengths.
enum PcStatus pc_rect_partial_sum(const struct PcCoeffs *f,
                                  const size_t *n_max,
                                  const double *theta,
                                  size_t n,
                                  double *out,
                                  size_t out_len);

// Abel mean `P_r f(theta)`; `r` and `theta` have `n` entries. `out` receives
// `d` interleaved (re, im) pairs.
//
// # Safety
// Pointers must reference arrays of the stated lengths.
enum PcStatus pc_abel_mean(const struct PcCoeffs *f,
                           const double *r,
                           const double *theta,
                           size_t n,
                           double *out,
                           size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYCAP_H */
