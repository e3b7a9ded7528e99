#ifndef RISCB_H
#define RISCB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RiscbStatus {
  RISCB_STATUS_OK = 0,
  RISCB_STATUS_NULL_POINTER = 1,
  RISCB_STATUS_INVALID_ARGUMENT = 2,
  RISCB_STATUS_CONFIG = 3,
  RISCB_STATUS_NUMERIC = 4,
  RISCB_STATUS_IO = 5,
  RISCB_STATUS_PANIC = 6,
} RiscbStatus;

/**
 * Codebook as alphabet indices, one row per word.
 */
typedef struct RiscbCodebook RiscbCodebook;

/**
 * Experiment configuration.
 */
typedef struct RiscbConfig RiscbConfig;

/**
 * Output of one experiment run.
 */
typedef struct RiscbResults RiscbResults;

/**
 * One row of a rates experiment.
 */
typedef struct RiscbRateRow {
  double sweep_value;
  double mean_metric_rate;
  double mean_realized_rate;
  double std_error;
  uint64_t trials;
} RiscbRateRow;

typedef struct RiscbTheoryParams {
  double p_d;
  double beta_r;
  double beta_g;
  uint64_t n_elements;
  uint64_t t_words;
  /**
   * Linear Rician factor; may be infinite.
   */
  double k_r;
} RiscbTheoryParams;

/**
 * Real-multiplication counts.
 */
typedef struct RiscbComplexity {
  uint64_t ao_estimation;
  uint64_t ao_optimization;
  uint64_t proposed_estimation;
  uint64_t proposed_optimization;
} RiscbComplexity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *riscb_last_error_message(void);

/**
 * Default scenario configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum RiscbStatus riscb_config_default(struct RiscbConfig **out);

/**
 * Parses and validates a TOML configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum RiscbStatus riscb_config_from_toml(const char *toml, struct RiscbConfig **out);

/**
 * Named figure preset such as `"fig3a"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum RiscbStatus riscb_config_from_preset(const char *name, struct RiscbConfig **out);

/**
 * # Safety
 * `cfg` must be a live handle from this library.
 */
enum RiscbStatus riscb_config_set_trials(struct RiscbConfig *cfg, uint64_t trials);

/**
 * # Safety
 * `cfg` must be a live handle from this library.
 */
enum RiscbStatus riscb_config_set_seed(struct RiscbConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be null or a handle from this library not yet freed.
 */
void riscb_config_free(struct RiscbConfig *cfg);

/**
 * Runs the experiment described by `cfg`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid handle slot.
 */
enum RiscbStatus riscb_run(const struct RiscbConfig *cfg, struct RiscbResults **out);

/**
 * Number of CSV rows the results hold.
 *
 * # Safety
 * `res` must be a live handle and `out` writable.
 */
enum RiscbStatus riscb_results_row_count(const struct RiscbResults *res, size_t *out);

/**
 * Numeric fields of rates row `index`.
 *
 * # Safety
 * `res` must be a live handle and `out` writable.
 */
enum RiscbStatus riscb_results_rate_row(const struct RiscbResults *res,
                                        size_t index,
                                        struct RiscbRateRow *out);

/**
 * Copies the scheme label of rates row `index` into `buf` as a
 * NUL-terminated string. `needed` receives the full length including the
 * terminator; a too-small buffer yields `InvalidArgument`.
 *
 * # Safety
 * `buf` must hold `buf_len` bytes; `needed` may be null.
 */
enum RiscbStatus riscb_results_scheme(const struct RiscbResults *res,
                                      size_t index,
                                      char *buf,
                                      size_t buf_len,
                                      size_t *needed);

/**
 * Writes the results in the CLI's CSV format.
 *
 * # Safety
 * `res` must be a live handle and `path` a NUL-terminated string.
 */
enum RiscbStatus riscb_results_write_csv(const struct RiscbResults *res, const char *path);

/**
 * # Safety
 * `res` must be null or a handle from this library not yet freed.
 */
void riscb_results_free(struct RiscbResults *res);

/**
 * Environment-aware codebook of up to `t_words` words for the scene in
 * `cfg`. Fewer words come back when distinct words run out and the
 * configuration allows a shortfall.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid handle slot.
 */
enum RiscbStatus riscb_codebook_env_aware(const struct RiscbConfig *cfg,
                                          size_t t_words,
                                          uint64_t seed,
                                          struct RiscbCodebook **out);

/**
 * # Safety
 * `cb` must be a live handle and both outputs writable.
 */
enum RiscbStatus riscb_codebook_shape(const struct RiscbCodebook *cb,
                                      size_t *words,
                                      size_t *elements);

/**
 * Copies word `index` into `out`, which must hold `len` entries where
 * `len` equals the element count.
 *
 * # Safety
 * `out` must point to `len` writable `u16` values.
 */
enum RiscbStatus riscb_codebook_word(const struct RiscbCodebook *cb,
                                     size_t index,
                                     uint16_t *out,
                                     size_t len);

/**
 * # Safety
 * `cb` must be null or a handle from this library not yet freed.
 */
void riscb_codebook_free(struct RiscbCodebook *cb);

/**
 * Analytical received-power upper bound, watts.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum RiscbStatus riscb_prop1_bound(const struct RiscbTheoryParams *params, double *out);

/**
 * Real-multiplication counts of the AO baseline and the codebook scheme.
 *
 * # Safety
 * `out` must be writable.
 */
enum RiscbStatus riscb_complexity(uint64_t m,
                                  uint64_t n,
                                  uint64_t t,
                                  uint32_t a_bits,
                                  uint64_t n_iter,
                                  struct RiscbComplexity *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISCB_H */
