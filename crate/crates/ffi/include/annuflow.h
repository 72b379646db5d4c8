#ifndef ANNUFLOW_H
#define ANNUFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AnnuflowStatus {
  ANNUFLOW_STATUS_OK = 0,
  ANNUFLOW_STATUS_NULL_POINTER = 1,
  ANNUFLOW_STATUS_INVALID_UTF8 = 2,
  ANNUFLOW_STATUS_CONFIG = 3,
  ANNUFLOW_STATUS_NUMERICAL = 4,
  ANNUFLOW_STATUS_IO = 5,
  /**
   * The run stopped early; snapshots up to the failure are available.
   */
  ANNUFLOW_STATUS_ABORTED = 6,
  ANNUFLOW_STATUS_NOT_RUN = 7,
  ANNUFLOW_STATUS_OUT_OF_RANGE = 8,
  ANNUFLOW_STATUS_BUFFER_TOO_SMALL = 9,
  ANNUFLOW_STATUS_PANIC = 10,
} AnnuflowStatus;

typedef enum AnnuflowModel {
  ANNUFLOW_MODEL_NEWTONIAN = 0,
  ANNUFLOW_MODEL_MODEL1 = 1,
  ANNUFLOW_MODEL_MODEL2A = 2,
  ANNUFLOW_MODEL_MODEL2B = 3,
} AnnuflowModel;

/**
 * Radial profile stored in a snapshot.
 */
typedef enum AnnuflowField {
  ANNUFLOW_FIELD_RADIUS = 0,
  ANNUFLOW_FIELD_SWIRL = 1,
  ANNUFLOW_FIELD_AXIAL = 2,
  ANNUFLOW_FIELD_CONCENTRATION = 3,
  ANNUFLOW_FIELD_VISCOSITY = 4,
  ANNUFLOW_FIELD_PRESSURE = 5,
} AnnuflowField;

/**
 * Opaque run handle.
 */
typedef struct AnnuflowRun AnnuflowRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a run from configuration file text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AnnuflowStatus annuflow_run_from_config(const char *text, struct AnnuflowRun **out);

/**
 * Creates one of the built-in studies. With `gradient` the oscillating
 * axial pressure gradient is switched on.
 *
 * # Safety
 * `cycles` must point to `n_cycles` values and `out` must be valid.
 */
enum AnnuflowStatus annuflow_run_standard(enum AnnuflowModel model,
                                          bool gradient,
                                          size_t n_nodes,
                                          const double *cycles,
                                          size_t n_cycles,
                                          struct AnnuflowRun **out);

/**
 * Integrates the run. Returns `Aborted` if the integrator gave up; the
 * snapshots reached before that remain readable.
 *
 * # Safety
 * `run` must come from this library and not have been freed.
 */
enum AnnuflowStatus annuflow_run_execute(struct AnnuflowRun *run);

/**
 * # Safety
 * `run` must be a live handle and `count` a valid pointer.
 */
enum AnnuflowStatus annuflow_run_snapshot_count(const struct AnnuflowRun *run, size_t *count);

/**
 * Number of radial nodes in every snapshot.
 *
 * # Safety
 * `run` must be a live handle and `count` a valid pointer.
 */
enum AnnuflowStatus annuflow_run_node_count(const struct AnnuflowRun *run, size_t *count);

/**
 * Time and cycle count of snapshot `k`. Either output pointer may be null.
 *
 * # Safety
 * `run` must be a live handle; non-null outputs must be valid.
 */
enum AnnuflowStatus annuflow_run_snapshot_time(const struct AnnuflowRun *run,
                                               size_t k,
                                               double *t_hat,
                                               double *cycles);

/**
 * Copies one profile of snapshot `k` into `buf`, which must hold at least
 * the node count.
 *
 * # Safety
 * `run` must be a live handle and `buf` must point to `len` writable values.
 */
enum AnnuflowStatus annuflow_run_snapshot_field(const struct AnnuflowRun *run,
                                                size_t k,
                                                enum AnnuflowField field,
                                                double *buf,
                                                size_t len);

/**
 * Writes snapshots, centerline series, plot script and manifest into `dir`.
 *
 * # Safety
 * `run` must be a live handle and `dir` a NUL-terminated path.
 */
enum AnnuflowStatus annuflow_run_write(const struct AnnuflowRun *run, const char *dir);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `run` must come from this library and must not be used afterwards.
 */
void annuflow_run_free(struct AnnuflowRun *run);

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *annuflow_last_error(void);

const char *annuflow_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANNUFLOW_H */
