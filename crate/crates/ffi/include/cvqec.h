#ifndef CVQEC_H
#define CVQEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CvqecStatus {
  CVQEC_STATUS_OK = 0,
  CVQEC_STATUS_INVALID_ARGUMENT = 1,
  CVQEC_STATUS_DEGENERATE_MODEL = 2,
  CVQEC_STATUS_NOT_CONVERGED = 3,
  CVQEC_STATUS_CONFIG = 4,
  CVQEC_STATUS_RUNTIME = 5,
  CVQEC_STATUS_NULL_POINTER = 6,
  CVQEC_STATUS_PANIC = 7,
} CvqecStatus;

/**
 * Opaque whitened decoder for one quadrature.
 */
typedef struct CvqecDecoder CvqecDecoder;

/**
 * Opaque per-round statistics of one simulated scenario.
 */
typedef struct CvqecStats CvqecStats;

typedef struct CvqecDecodeResult {
  /**
   * 1-based qumode with the largest whitened statistic.
   */
  uint32_t j_star;
  double d_hat;
  double t[7];
  bool triggered;
} CvqecDecodeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *cvqec_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cvqec_version(void);

/**
 * Right tail of the standard normal distribution.
 */
double cvqec_q_function(double x);

/**
 * Reduces `v` into `[-sqrt(pi), sqrt(pi))`.
 *
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum CvqecStatus cvqec_modular_reduce(double v, double *out);

/**
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum CvqecStatus cvqec_residual_variance(double sigma, double *out);

/**
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum CvqecStatus cvqec_residual_pdf(double xi, double sigma, double *out);

/**
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum CvqecStatus cvqec_finite_squeezing_residual_variance(double sigma, double r, double *out);

/**
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum CvqecStatus cvqec_lattice_crossing_probability(double sigma, double *out);

/**
 * Outer syndrome `s = M_q eps` for seven per-qumode errors.
 *
 * # Safety
 * `eps` must point to 7 readable doubles and `out` to 3 writable doubles.
 */
enum CvqecStatus cvqec_syndrome(uint32_t quad, const double *eps, double *out);

/**
 * Builds a decoder for residual variance `sigma_res_sq`; `squeezing_r = 0`
 * means ideal ancillas.
 *
 * # Safety
 * `out` must be valid for a write of one pointer.
 */
enum CvqecStatus cvqec_decoder_new(uint32_t quad,
                                   double sigma_res_sq,
                                   double squeezing_r,
                                   struct CvqecDecoder **out);

/**
 * # Safety
 * `decoder` must come from [`cvqec_decoder_new`]; `syndrome` must point to
 * 3 readable doubles; `out` must be writable.
 */
enum CvqecStatus cvqec_decoder_decode(const struct CvqecDecoder *decoder,
                                      const double *syndrome,
                                      double threshold,
                                      struct CvqecDecodeResult *out);

/**
 * `Var(d_hat)` for a 1-based qumode.
 *
 * # Safety
 * `decoder` must come from [`cvqec_decoder_new`]; `out` must be writable.
 */
enum CvqecStatus cvqec_decoder_estimator_variance(const struct CvqecDecoder *decoder,
                                                  uint32_t qumode,
                                                  double *out);

/**
 * Union bound on mislocalizing an error of magnitude `d` on `qumode`.
 *
 * # Safety
 * `decoder` must come from [`cvqec_decoder_new`]; `out` must be writable.
 */
enum CvqecStatus cvqec_decoder_miscorrection_bound(const struct CvqecDecoder *decoder,
                                                   uint32_t qumode,
                                                   double d,
                                                   double *out);

/**
 * Releases a decoder. Null is ignored.
 *
 * # Safety
 * `decoder` must come from [`cvqec_decoder_new`] and not be used afterwards.
 */
void cvqec_decoder_free(struct CvqecDecoder *decoder);

/**
 * Runs one scenario. `config_json` is a run configuration (unknown keys are
 * rejected; NULL or `{}` gives the defaults). `mode`: 0 no QEC, 1 GKP only,
 * 2 concatenated. `workers = 0` uses all cores.
 *
 * # Safety
 * `config_json` must be NULL or a NUL-terminated string; `out` must be writable.
 */
enum CvqecStatus cvqec_experiment_run(const char *config_json,
                                      uint32_t mode,
                                      size_t workers,
                                      struct CvqecStats **out);

/**
 * Number of rounds, 0 for a null handle.
 *
 * # Safety
 * `stats` must be NULL or come from [`cvqec_experiment_run`].
 */
size_t cvqec_stats_rounds(const struct CvqecStats *stats);

/**
 * Copies the per-round mean into `buf` (capacity `len` >= rounds).
 *
 * # Safety
 * `stats` must come from [`cvqec_experiment_run`]; `buf` must hold `len` doubles.
 */
enum CvqecStatus cvqec_stats_copy_mean(const struct CvqecStats *stats, double *buf, size_t len);

/**
 * Copies the per-round sample standard deviation into `buf`.
 *
 * # Safety
 * `stats` must come from [`cvqec_experiment_run`]; `buf` must hold `len` doubles.
 */
enum CvqecStatus cvqec_stats_copy_std(const struct CvqecStats *stats, double *buf, size_t len);

/**
 * Releases statistics. Null is ignored.
 *
 * # Safety
 * `stats` must come from [`cvqec_experiment_run`] and not be used afterwards.
 */
void cvqec_stats_free(struct CvqecStats *stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CVQEC_H */
