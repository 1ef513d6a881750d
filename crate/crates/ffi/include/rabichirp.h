#ifndef RABICHIRP_H
#define RABICHIRP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The first five match the command-line exit codes.
 */
typedef enum RcStatus {
  RC_STATUS_OK = 0,
  /**
   * Invalid config, key, or argument.
   */
  RC_STATUS_CONFIG = 1,
  /**
   * The chirp design did not converge or an iterate became non-positive.
   */
  RC_STATUS_NOT_CONVERGED = 2,
  /**
   * Integration or tau-map failure.
   */
  RC_STATUS_RUNTIME = 3,
  /**
   * `rc_verify` ran but the transfer or the RWA metric fell short.
   */
  RC_STATUS_VERIFY_FAILED = 4,
  RC_STATUS_NULL_POINTER = 10,
  RC_STATUS_BUFFER_TOO_SMALL = 11,
  RC_STATUS_PANIC = 12,
} RcStatus;

/**
 * Propagation frame for [`rc_simulate`].
 */
typedef enum RcFrame {
  RC_FRAME_LAB = 0,
  RC_FRAME_TAU_FULL = 1,
  RC_FRAME_TAU_RWA = 2,
  RC_FRAME_RABI_B = 3,
} RcFrame;

/**
 * Trace columns, in CSV order.
 */
typedef enum RcColumn {
  RC_COLUMN_T = 0,
  RC_COLUMN_TAU = 1,
  RC_COLUMN_RE1 = 2,
  RC_COLUMN_IM1 = 3,
  RC_COLUMN_RE2 = 4,
  RC_COLUMN_IM2 = 5,
  RC_COLUMN_POP1 = 6,
  RC_COLUMN_POP2 = 7,
  RC_COLUMN_FIELD = 8,
  RC_COLUMN_CHIRP = 9,
} RcColumn;

/**
 * A parsed and validated run configuration.
 */
typedef struct RcConfig RcConfig;

/**
 * A finished chirp design.
 */
typedef struct RcDesign RcDesign;

/**
 * A propagated trace.
 */
typedef struct RcTrace RcTrace;

/**
 * Result of [`rc_verify`].
 */
typedef struct RcVerification {
  double p_beta_max;
  double tau_at_max;
  double tau_end;
  double p_beta_end;
  double rwa_metric;
  double norm_drift;
  double modulation_depth;
  bool passed;
} RcVerification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rc_last_error_message(void);

void rc_clear_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rc_version(void);

/**
 * Free a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from an `rc_*` call that documents an owned string and
 * must not be freed twice.
 */
void rc_string_free(char *s);

/**
 * Load a TOML config file. Sample-table paths resolve against its directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RcStatus rc_config_load(const char *path, struct RcConfig **out);

/**
 * Parse a config from TOML text. `base_dir` may be NULL (current directory).
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be valid.
 */
enum RcStatus rc_config_parse(const char *toml, const char *base_dir, struct RcConfig **out);

/**
 * Apply a `dotted.key=value` override. The config is unchanged on failure.
 *
 * # Safety
 * `config` must be a live handle and `assignment` NUL-terminated.
 */
enum RcStatus rc_config_set(struct RcConfig *config, const char *assignment);

/**
 * The config serialized as TOML; free with [`rc_string_free`].
 *
 * # Safety
 * `config` must be a live handle or NULL.
 */
char *rc_config_to_toml(const struct RcConfig *config);

/**
 * # Safety
 * `config` must be NULL or a handle from `rc_config_load`/`rc_config_parse`.
 */
void rc_config_free(struct RcConfig *config);

/**
 * Run the chirp designer. The config must set `chirp = "design"`.
 * Returns `RC_STATUS_NOT_CONVERGED` with a valid handle when the iteration
 * stops early; the handle still holds the last iterate and history.
 *
 * # Safety
 * `config` must be a live handle and `out` valid.
 */
enum RcStatus rc_design(const struct RcConfig *config, struct RcDesign **out);

/**
 * # Safety
 * `design` must be a live handle.
 */
bool rc_design_converged(const struct RcDesign *design);

/**
 * # Safety
 * `design` must be a live handle.
 */
size_t rc_design_iterations(const struct RcDesign *design);

/**
 * Sup-norm of the consistency residual of the final iterate.
 *
 * # Safety
 * `design` must be a live handle.
 */
double rc_design_residual(const struct RcDesign *design);

/**
 * # Safety
 * `design` must be a live handle.
 */
double rc_design_rwa_metric(const struct RcDesign *design);

/**
 * Number of design grid points.
 *
 * # Safety
 * `design` must be a live handle.
 */
size_t rc_design_len(const struct RcDesign *design);

/**
 * Copy the grid and chirp values into caller buffers of length `len`,
 * which must be at least [`rc_design_len`].
 *
 * # Safety
 * `t` and `omega` must each point to `len` writable doubles.
 */
enum RcStatus rc_design_chirp(const struct RcDesign *design, double *t, double *omega, size_t len);

/**
 * The `key = value` design report; free with [`rc_string_free`].
 *
 * # Safety
 * `design` must be a live handle or NULL.
 */
char *rc_design_report(const struct RcDesign *design);

/**
 * # Safety
 * `design` must be NULL or a handle from [`rc_design`].
 */
void rc_design_free(struct RcDesign *design);

/**
 * Propagate in one frame, designing the chirp first when the config asks
 * for it. Sampling follows the config's `run.samples` and `run.tau_end`.
 *
 * # Safety
 * `config` must be a live handle and `out` valid.
 */
enum RcStatus rc_simulate(const struct RcConfig *config, enum RcFrame frame, struct RcTrace **out);

/**
 * # Safety
 * `trace` must be a live handle.
 */
size_t rc_trace_len(const struct RcTrace *trace);

/**
 * Copy one column into `out`, which must hold at least [`rc_trace_len`] values.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum RcStatus rc_trace_column(const struct RcTrace *trace,
                              enum RcColumn column,
                              double *out,
                              size_t len);

/**
 * The trace as CSV text; free with [`rc_string_free`].
 *
 * # Safety
 * `trace` must be a live handle or NULL.
 */
char *rc_trace_csv(const struct RcTrace *trace);

/**
 * # Safety
 * `trace` must be NULL or a handle from [`rc_simulate`].
 */
void rc_trace_free(struct RcTrace *trace);

/**
 * Check transfer and the RWA metric. `out` is filled whenever the
 * propagation ran, including the `RC_STATUS_VERIFY_FAILED` case.
 *
 * # Safety
 * `config` must be a live handle and `out` valid.
 */
enum RcStatus rc_verify(const struct RcConfig *config, struct RcVerification *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RABICHIRP_H */
