#ifndef ROSENBLATT_LAB_H
#define ROSENBLATT_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define RL_OK 0

/**
 * Library error kinds.
 */
#define RL_ERR_DOMAIN 1

#define RL_ERR_PARAMETER 2

#define RL_ERR_REGIME 3

#define RL_ERR_UNSUPPORTED 4

#define RL_ERR_ACCURACY 5

#define RL_ERR_INTEGRABILITY 6

#define RL_ERR_EMBEDDING 7

#define RL_ERR_COVERAGE 8

#define RL_ERR_RANK_VIOLATION 9

#define RL_ERR_RANK_UNDETECTED 10

#define RL_ERR_INPUT 11

#define RL_ERR_DEGENERATE_FIT 12

#define RL_ERR_NUMERIC 13

#define RL_ERR_PRECONDITION 14

#define RL_ERR_IO 15

#define RL_ERR_JSON 16

/**
 * A required pointer argument was null.
 */
#define RL_NULL_POINTER 100

/**
 * A caller-provided buffer is too small; the required length has been written.
 */
#define RL_BUFFER_TOO_SMALL 101

/**
 * The library panicked; this indicates a bug.
 */
#define RL_PANIC 102

/**
 * Opaque covariance model.
 */
typedef struct RlModel RlModel;

/**
 * Opaque calibrated chi-square series of a Rosenblatt-type law.
 */
typedef struct RlSeries RlSeries;

/**
 * Opaque observation set.
 */
typedef struct RlSet RlSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
 * `len` bytes) and returns the full message length excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rl_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rl_version(void);

/**
 * Gamma function.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t rl_gamma(double x, double *out);

/**
 * Bessel function of the first kind `J_ν(x)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t rl_bessel_j(double nu, double x, double *out);

/**
 * Modified Bessel function of the second kind `K_ν(x)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int32_t rl_bessel_k(double nu, double x, double *out);

/**
 * Creates a Cauchy model `(1 + r²)^{-θ}` in dimension `d`.
 *
 * # Safety
 * `out` must be a valid pointer; the handle must be released with [`rl_model_free`].
 */
int32_t rl_model_cauchy(uint32_t d, double theta, RlModel **out);

/**
 * Creates a generalized Linnik model `(1 + r^σ)^{-θ}`.
 *
 * # Safety
 * As for [`rl_model_cauchy`].
 */
int32_t rl_model_linnik(uint32_t d, double sigma, double theta, RlModel **out);

/**
 * Creates a local-global model.
 *
 * # Safety
 * As for [`rl_model_cauchy`].
 */
int32_t rl_model_local_global(uint32_t d, double alpha, double theta, RlModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from this library that has not been freed.
 */
void rl_model_free(RlModel *model);

/**
 * Covariance `B(r)`.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
int32_t rl_model_covariance(const RlModel *model, double r, double *out);

/**
 * Spectral density `f(λ)`.
 *
 * # Safety
 * As for [`rl_model_covariance`].
 */
int32_t rl_model_spectral_density(const RlModel *model, double lambda, double *out);

/**
 * Creates the ball of radius `radius` centred at the origin of `R^d`.
 *
 * # Safety
 * `out` must be a valid pointer; release the handle with [`rl_set_free`].
 */
int32_t rl_set_ball(uint32_t d, double radius, RlSet **out);

/**
 * Creates the rectangle `Π [lower_j, upper_j]` from two arrays of length `d`.
 *
 * # Safety
 * `lower` and `upper` must point to `d` doubles; `out` must be a valid pointer.
 */
int32_t rl_set_rect(const double *lower, const double *upper, size_t d, RlSet **out);

/**
 * Releases a set handle. Null is ignored.
 *
 * # Safety
 * `set` must be null or a live handle from this library.
 */
void rl_set_free(RlSet *set);

/**
 * Dimension of a set.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
int32_t rl_set_dim(const RlSet *set, uint32_t *out);

/**
 * Lebesgue measure of the scaled set `rΔ`.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
int32_t rl_set_volume(const RlSet *set, double r, double *out);

/**
 * Density at `z` of the distance between two independent uniform points of `rΔ`.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
int32_t rl_set_distance_pdf(const RlSet *set, double r, double z, double *out);

/**
 * Fourier transform `∫_Δ e^{i⟨x,u⟩} du` at the point `x` of length `d`.
 *
 * # Safety
 * `x` must point to `d` doubles; `re` and `im` must be valid pointers.
 */
int32_t rl_set_indicator_ft(const RlSet *set, const double *x, size_t d, double *re, double *im);

/**
 * Builds and calibrates the limit law of `(Δ, α)` with default discretisation settings.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer; release with [`rl_series_free`].
 */
int32_t rl_rosenblatt_build(const RlSet *set, double alpha, RlSeries **out);

/**
 * Releases a series handle. Null is ignored.
 *
 * # Safety
 * `series` must be null or a live handle from this library.
 */
void rl_series_free(RlSeries *series);

/**
 * Copies the eigenvalues into `buf`. `written` receives the number of eigenvalues; when it
 * exceeds `len`, nothing is copied and `RL_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `buf` must point to `len` writable doubles (or be null with `len == 0`).
 */
int32_t rl_series_eigenvalues(const RlSeries *series, double *buf, size_t len, size_t *written);

/**
 * Variance of the law, including the Gaussian remainder.
 *
 * # Safety
 * `series` must be a live handle and `out` a valid pointer.
 */
int32_t rl_series_variance(const RlSeries *series, double *out);

/**
 * Cumulant of order `p ≥ 2`.
 *
 * # Safety
 * `series` must be a live handle and `out` a valid pointer.
 */
int32_t rl_series_cumulant(const RlSeries *series, uint32_t p, double *out);

/**
 * Fills `buf` with `n` draws; the output depends only on `(n, seed)`.
 *
 * # Safety
 * `buf` must point to `n` writable doubles.
 */
int32_t rl_series_sample(const RlSeries *series, size_t n, uint64_t seed, double *buf);

/**
 * `κ₁` and the rate bound for `(d, α, q, υ)`; either output pointer may be null.
 *
 * # Safety
 * Non-null output pointers must be valid.
 */
int32_t rl_rate_bound(uint32_t d,
                      double alpha,
                      double q,
                      double upsilon,
                      double *kappa1_out,
                      double *bound_out);

/**
 * Two-sample Kolmogorov distance.
 *
 * # Safety
 * `a` and `b` must point to `na` and `nb` doubles; `out` must be a valid pointer.
 */
int32_t rl_ks_distance(const double *a, size_t na, const double *b, size_t nb, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROSENBLATT_LAB_H */
