#ifndef HGEO_H
#define HGEO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HgeoStatus {
  HGEO_STATUS_OK = 0,
  HGEO_STATUS_NULL_POINTER = 1,
  HGEO_STATUS_INVALID_UTF8 = 2,
  HGEO_STATUS_CONFIG_ERROR = 3,
  HGEO_STATUS_SOLVER_ERROR = 4,
  HGEO_STATUS_OUT_OF_RANGE = 5,
  HGEO_STATUS_BUFFER_TOO_SMALL = 6,
  HGEO_STATUS_PANIC = 7,
} HgeoStatus;

/**
 * A parsed and validated problem configuration.
 */
typedef struct HgeoProblem HgeoProblem;

/**
 * The result of [`hgeo_solve`].
 */
typedef struct HgeoReport HgeoReport;

/**
 * Audit outcome. `count` is `-1` when a continuum of rays was found.
 */
typedef struct HgeoAudit {
  int64_t count;
  size_t required_minimum;
  bool pass;
  size_t signature_p;
  size_t signature_q;
  size_t signature_k;
} HgeoAudit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on the calling thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hgeo_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hgeo_version(void);

/**
 * Parses a TOML configuration into a new problem handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HgeoStatus hgeo_problem_from_toml(const char *text, struct HgeoProblem **out);

/**
 * # Safety
 * `problem` must come from [`hgeo_problem_from_toml`] and not be used
 * afterwards. Null is ignored.
 */
void hgeo_problem_free(struct HgeoProblem *problem);

/**
 * Overrides the random seed and the number of multistart directions
 * (`starts = 0` keeps the configured value).
 *
 * # Safety
 * `problem` must be a live handle.
 */
enum HgeoStatus hgeo_problem_set_seed(struct HgeoProblem *problem,
                                      uint64_t rng_seed,
                                      size_t starts);

/**
 * Dimension of `m`, i.e. the length of every ray vector; 0 for null.
 *
 * # Safety
 * `problem` must be a live handle or null.
 */
size_t hgeo_problem_dim(const struct HgeoProblem *problem);

/**
 * Runs the full enumeration and audit.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
enum HgeoStatus hgeo_solve(const struct HgeoProblem *problem, struct HgeoReport **out);

/**
 * # Safety
 * `report` must come from [`hgeo_solve`] and not be used afterwards. Null
 * is ignored.
 */
void hgeo_report_free(struct HgeoReport *report);

/**
 * Number of distinct rays in the report; 0 for null.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
size_t hgeo_report_ray_count(const struct HgeoReport *report);

/**
 * Whether the rays form a continuum; false for null.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
bool hgeo_report_continuum(const struct HgeoReport *report);

/**
 * Copies ray `index` (normalized to `F = 1`) into `y[0..len]`. `len` must
 * equal [`hgeo_problem_dim`]. `residual` and `lambda` may be null.
 *
 * # Safety
 * `report` must be a live handle and `y` must point to `len` doubles.
 */
enum HgeoStatus hgeo_report_ray(const struct HgeoReport *report,
                                size_t index,
                                double *y,
                                size_t len,
                                double *residual,
                                double *lambda);

/**
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum HgeoStatus hgeo_report_audit(const struct HgeoReport *report, struct HgeoAudit *out);

/**
 * The full report as JSON. Release with [`hgeo_string_free`]; null on
 * failure.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
char *hgeo_report_json(const struct HgeoReport *report);

/**
 * # Safety
 * `s` must come from [`hgeo_report_json`] and not be used afterwards. Null
 * is ignored.
 */
void hgeo_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HGEO_H */
