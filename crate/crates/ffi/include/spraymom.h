#ifndef SPRAYMOM_H
#define SPRAYMOM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SprayBasis {
  // Sizes `S^0, S^1/2, S^1, S^3/2`.
  SPRAY_BASIS_FRACTIONAL = 0,
  // Sizes `S^0 .. S^3`.
  SPRAY_BASIS_INTEGER = 1,
} SprayBasis;

// Realizability class written by [`spray_classify`].
typedef enum SprayRealizability {
  SPRAY_REALIZABILITY_INTERIOR = 0,
  SPRAY_REALIZABILITY_BOUNDARY = 1,
  SPRAY_REALIZABILITY_OUTSIDE = 2,
} SprayRealizability;

typedef enum SprayStatus {
  SPRAY_STATUS_OK = 0,
  SPRAY_STATUS_NULL_POINTER = 1,
  SPRAY_STATUS_INVALID_ARGUMENT = 2,
  SPRAY_STATUS_NOT_REALIZABLE = 3,
  SPRAY_STATUS_NON_CONVERGENCE = 4,
  SPRAY_STATUS_CONDITIONING = 5,
  SPRAY_STATUS_CONFIG = 6,
  SPRAY_STATUS_IO = 7,
  SPRAY_STATUS_OUT_OF_RANGE = 8,
  SPRAY_STATUS_PANIC = 99,
} SprayStatus;

// A validated case configuration.
typedef struct SprayCase SprayCase;

// Result of running a case.
typedef struct SprayRun SprayRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated, truncated
// to `len`) and returns the full message length in bytes.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t spray_last_error(char *buf, size_t len);

// Reads and validates a TOML case file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be a valid pointer.
enum SprayStatus spray_case_from_file(const char *path, struct SprayCase **out);

// Parses and validates TOML case text.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be a valid pointer.
enum SprayStatus spray_case_from_str(const char *toml, struct SprayCase **out);

// # Safety
// `case` must be null or a handle from `spray_case_from_*` not yet freed.
void spray_case_free(struct SprayCase *case_);

// Runs a case to its end time.
//
// # Safety
// `case` must be a live case handle; `out` must be a valid pointer.
enum SprayStatus spray_run(const struct SprayCase *case_, struct SprayRun **out);

// # Safety
// `run` must be null or a handle from [`spray_run`] not yet freed.
void spray_run_free(struct SprayRun *run);

// Writes the snapshots and summary of a run into `dir`.
//
// # Safety
// `run` must be a live run handle and `dir` a NUL-terminated string.
enum SprayStatus spray_run_write(const struct SprayRun *run, const char *dir);

// Number of snapshots held by a run (at least one).
//
// # Safety
// `run` must be a live run handle; `count` must be a valid pointer.
enum SprayStatus spray_run_snapshot_count(const struct SprayRun *run, size_t *count);

// Time and grid size of snapshot `index`.
//
// # Safety
// `run` must be a live run handle; the output pointers must be valid.
enum SprayStatus spray_run_snapshot_info(const struct SprayRun *run,
                                         size_t index,
                                         double *time,
                                         size_t *nx,
                                         size_t *ny);

// Copies the moments of snapshot `index` into `buf`, four per cell, row-major.
//
// `len` is the capacity of `buf` in doubles and must be at least `4 * nx * ny`.
//
// # Safety
// `run` must be a live run handle; `buf` must point to `len` writable doubles.
enum SprayStatus spray_run_snapshot_moments(const struct SprayRun *run,
                                            size_t index,
                                            double *buf,
                                            size_t len);

// Named scalar of the run report, e.g. `max_rel_error_vs_exact`.
//
// # Safety
// `run` must be a live run handle, `name` a NUL-terminated string and `value` valid.
enum SprayStatus spray_run_scalar(const struct SprayRun *run, const char *name, double *value);

// Classifies a moment vector on `[0, 1]`.
//
// # Safety
// `moments` must point to 4 doubles; `out` must be valid.
enum SprayStatus spray_classify(const double *moments,
                                enum SprayBasis basis,
                                double tol,
                                enum SprayRealizability *out);

// Maximum-entropy multipliers of an interior moment vector.
//
// `iterations` may be null.
//
// # Safety
// `moments` and `lambdas` must point to 4 doubles.
enum SprayStatus spray_maxent(const double *moments,
                              enum SprayBasis basis,
                              double epsilon,
                              size_t max_iter,
                              double *lambdas,
                              size_t *iterations);

// One evaporation step under the d² law `dS/dt = -k`.
//
// Writes the updated moments and the moments lost to droplets that vanished.
//
// # Safety
// `moments`, `updated` and `flux` must point to 4 doubles.
enum SprayStatus spray_evaporate_d2(const double *moments,
                                    enum SprayBasis basis,
                                    double k,
                                    double dt,
                                    size_t n_neg,
                                    double *updated,
                                    double *flux);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPRAYMOM_H */
