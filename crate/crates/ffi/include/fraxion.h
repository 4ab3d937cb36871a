#ifndef FRAXION_H
#define FRAXION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum FraxionStatus {
  FRAXION_STATUS_OK = 0,
  FRAXION_STATUS_DOMAIN = 1,
  FRAXION_STATUS_NON_CONVERGENCE = 2,
  FRAXION_STATUS_QUADRATURE_FAILURE = 3,
  FRAXION_STATUS_SOLVER_DIVERGENCE = 4,
  FRAXION_STATUS_TAIL_UNBOUNDED = 5,
  FRAXION_STATUS_INVERSION_UNSTABLE = 6,
  FRAXION_STATUS_NULL_POINTER = 7,
  FRAXION_STATUS_PANIC = 8,
} FraxionStatus;

/*
 How a sampler draws.
 */
typedef enum FraxionSamplerKind {
  /*
   Mittag-Leffler waiting time, product of exponential and stable variates
   */
  FRAXION_SAMPLER_KIND_WAITING_PRODUCT = 0,
  /*
   Mittag-Leffler waiting time, direct inversion formula
   */
  FRAXION_SAMPLER_KIND_WAITING_DIRECT = 1,
  /*
   one-sided stable variate with transform exp(−s^α)
   */
  FRAXION_SAMPLER_KIND_STABLE = 2,
} FraxionSamplerKind;

typedef enum FraxionSolveMethod {
  FRAXION_SOLVE_METHOD_RESOLVENT = 0,
  FRAXION_SOLVE_METHOD_STEPPING = 1,
} FraxionSolveMethod;

/*
 Seeded random stream bound to one distribution.
 */
typedef struct FraxionSampler FraxionSampler;

/*
 Grid solution of an Abel-Volterra equation.
 */
typedef struct FraxionSolution FraxionSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; valid until the next failing call.
 */
const char *fraxion_last_error(void);

/*
 E^γ_{α,β}(z) with its certified absolute error. `abs_err` may be null.

 # Safety
 `value` must be valid for writes; `abs_err` must be null or valid for writes.
 */
enum FraxionStatus fraxion_ml(double alpha,
                              double beta,
                              double gamma,
                              double z,
                              double *value,
                              double *abs_err);

/*
 Waiting-time density φ_α(t).

 # Safety
 `value` must be valid for writes.
 */
enum FraxionStatus fraxion_ml_density(double alpha, double t, double *value);

/*
 Waiting-time survival Ψ_α(t) = E_α(−t^α).

 # Safety
 `value` must be valid for writes.
 */
enum FraxionStatus fraxion_waiting_survival(double alpha, double t, double *value);

/*
 P_{n,α,l}(t) of the l-fold process.

 # Safety
 `value` must be valid for writes.
 */
enum FraxionStatus fraxion_counting_probability(double alpha,
                                                uint32_t fold,
                                                uint32_t n,
                                                double t,
                                                double *value);

/*
 Renewal function of the l-fold process.

 # Safety
 `value` must be valid for writes.
 */
enum FraxionStatus fraxion_renewal_function(double alpha, uint32_t fold, double t, double *value);

/*
 Creates a sampler on stream `stream_id` of `seed`. Equal arguments give equal draws.

 # Safety
 `sampler` must be valid for writes; the handle is released with [`fraxion_sampler_free`].
 */
enum FraxionStatus fraxion_sampler_new(double alpha,
                                       enum FraxionSamplerKind kind,
                                       uint64_t seed,
                                       uint64_t stream_id,
                                       struct FraxionSampler **sampler);

/*
 Fills `buf[0..len]` with the next `len` draws.

 # Safety
 `sampler` must come from [`fraxion_sampler_new`]; `buf` must be valid for `len` writes.
 */
enum FraxionStatus fraxion_sampler_draw(struct FraxionSampler *sampler, double *buf, uintptr_t len);

/*
 # Safety
 `sampler` must be null or come from [`fraxion_sampler_new`] and not be used afterwards.
 */
void fraxion_sampler_free(struct FraxionSampler *sampler);

/*
 Solves f + c·D^{−α}f = g for g sampled at t_j = j·dt, j = 0..len.

 `origin_sigma` and `origin_step` declare g(t) = Σ c_ij t^{σ+i+j·step} near 0,
 which selects exact starting weights; pass NaN for either to declare a smooth g.

 # Safety
 `g` must be valid for `len` reads; `solution` must be valid for writes. The
 handle is released with [`fraxion_solution_free`].
 */
enum FraxionStatus fraxion_solve_abel(double alpha,
                                      double c,
                                      const double *g,
                                      uintptr_t len,
                                      double dt,
                                      double origin_sigma,
                                      double origin_step,
                                      enum FraxionSolveMethod method,
                                      struct FraxionSolution **solution);

/*
 Number of grid values in a solution; 0 for a null handle.

 # Safety
 `solution` must be null or a live handle.
 */
uintptr_t fraxion_solution_len(const struct FraxionSolution *solution);

/*
 Copies up to `len` solution values into `buf`.

 # Safety
 `solution` must be a live handle; `buf` must be valid for `len` writes.
 */
enum FraxionStatus fraxion_solution_values(const struct FraxionSolution *solution,
                                           double *buf,
                                           uintptr_t len);

/*
 # Safety
 `solution` must be null or come from [`fraxion_solve_abel`] and not be used afterwards.
 */
void fraxion_solution_free(struct FraxionSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAXION_H */
