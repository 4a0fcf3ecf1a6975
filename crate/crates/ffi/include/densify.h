#ifndef DENSIFY_H
#define DENSIFY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DensifyRegime {
  DENSIFY_REGIME_GROWTH = 0,
  DENSIFY_REGIME_SATURATION = 1,
  DENSIFY_REGIME_INVERSE_U = 2,
  DENSIFY_REGIME_UNCLASSIFIED = 3,
} DensifyRegime;

/**
 * Result code of every call.
 */
typedef enum DensifyStatus {
  DENSIFY_STATUS_OK = 0,
  DENSIFY_STATUS_NULL_POINTER = 1,
  DENSIFY_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The configuration failed to parse or violates a model constraint.
   */
  DENSIFY_STATUS_VALIDATION = 3,
  DENSIFY_STATUS_NUMERIC = 4,
  DENSIFY_STATUS_DIVERGENT = 5,
  DENSIFY_STATUS_UNSUPPORTED = 6,
  DENSIFY_STATUS_IO = 7,
  /**
   * A bug inside the library; the message has details.
   */
  DENSIFY_STATUS_PANIC = 8,
} DensifyStatus;

/**
 * Opaque experiment configuration.
 */
typedef struct DensifyConfig DensifyConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *densify_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *densify_last_error(void);

/**
 * Parses a configuration from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DensifyStatus densify_config_from_toml(const char *toml, struct DensifyConfig **out);

/**
 * Loads a bundled preset such as "fig1a".
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DensifyStatus densify_config_from_preset(const char *name, struct DensifyConfig **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `cfg` must come from this library and not be used afterwards.
 */
void densify_config_free(struct DensifyConfig *cfg);

/**
 * Overrides the master seed.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DensifyStatus densify_config_set_seed(struct DensifyConfig *cfg, uint64_t seed);

/**
 * Overrides the number of realizations per density.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DensifyStatus densify_config_set_trials(struct DensifyConfig *cfg, uint64_t trials);

/**
 * Path loss at distance `r` metres.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum DensifyStatus densify_pathloss(const struct DensifyConfig *cfg, double r, double *out);

/**
 * Probability that a uniform node lies within `r` metres of the origin.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum DensifyStatus densify_distance_cdf(const struct DensifyConfig *cfg, double r, double *out);

/**
 * Probability that one node's received power exceeds `t`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum DensifyStatus densify_tail(const struct DensifyConfig *cfg, double t, double *out);

/**
 * Large-`t` approximation of [`densify_tail`] for regularly varying fading.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum DensifyStatus densify_tail_asymptotic(const struct DensifyConfig *cfg, double t, double *out);

/**
 * Regime implied by the tail of the received power.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum DensifyStatus densify_predict_regime(const struct DensifyConfig *cfg, enum DensifyRegime *out);

/**
 * Simulated coverage `Pr(SINR >= y)` at density `lambda_km2` for each of the
 * `n` ascending thresholds in `y`. Writes `n` estimates to `p_hat` and, if
 * `ci` is not NULL, their 95% half-widths.
 *
 * # Safety
 * `y` and `p_hat` must hold `n` values, as must `ci` when given.
 */
enum DensifyStatus densify_coverage(const struct DensifyConfig *cfg,
                                    double lambda_km2,
                                    const double *y,
                                    uintptr_t n,
                                    double *p_hat,
                                    double *ci);

/**
 * Simulated mean of `ln(1 + SINR)` at density `lambda_km2`, in nats/s/Hz,
 * with its standard error when `std_err` is not NULL.
 *
 * # Safety
 * `cfg` must be a live handle and `c_hat` writable.
 */
enum DensifyStatus densify_capacity(const struct DensifyConfig *cfg,
                                    double lambda_km2,
                                    double *c_hat,
                                    double *std_err);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DENSIFY_H */
