#ifndef MAGSAMPLE_H
#define MAGSAMPLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result codes.
typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_ARGUMENT = 2,
  MS_STATUS_OUT_OF_RANGE = 3,
  MS_STATUS_PARSE = 4,
  MS_STATUS_IO = 5,
  MS_STATUS_SOLVER = 6,
  MS_STATUS_INFEASIBLE = 7,
  MS_STATUS_SHAPE = 8,
  MS_STATUS_DEGENERATE = 9,
  MS_STATUS_VALIDATION = 10,
  MS_STATUS_PANIC = 11,
} MsStatus;

// Opaque sampling distribution.
typedef struct MsDistribution MsDistribution;

// Opaque crop plan.
typedef struct MsPlan MsPlan;

typedef struct MsSignalSummary {
  double min_value;
  double argmin_y;
  double total;
  double mean;
} MsSignalSummary;

typedef struct MsCropPlanEntry {
  uint64_t index;
  double target_mpp;
  double source_mpp;
  uint32_t source_size_px;
  uint32_t crop_size_px;
  uint32_t output_size_px;
  double offset_x_frac;
  double offset_y_frac;
} MsCropPlanEntry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *ms_last_error(void);

// Library version as a static NUL-terminated string.
const char *ms_version(void);

// `K(x, y)`.
//
// # Safety
// `kernel` must be a NUL-terminated string and `out` a valid pointer.
enum MsStatus ms_kernel_eval(const char *kernel, double x, double y, double *out);

// Transfer potential `∫_a^b K(x, y) dy`.
//
// # Safety
// `kernel` must be a NUL-terminated string and `out` a valid pointer.
enum MsStatus ms_transfer_potential(const char *kernel, double a, double b, double x, double *out);

// Equal-weight atoms at `locations[0..count]`.
//
// # Safety
// `locations` must point to `count` doubles and `out` to a writable handle slot.
enum MsStatus ms_distribution_discrete_uniform(double a,
                                               double b,
                                               const double *locations,
                                               size_t count,
                                               struct MsDistribution **out);

// Uniform density on `cells` equal cells.
//
// # Safety
// `out` must point to a writable handle slot.
enum MsStatus ms_distribution_continuous_uniform(double a,
                                                 double b,
                                                 size_t cells,
                                                 struct MsDistribution **out);

// Reads a distribution file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable handle slot.
enum MsStatus ms_distribution_read(const char *path, struct MsDistribution **out);

// Writes a distribution file.
//
// # Safety
// `dist` must be a live handle and `path` a NUL-terminated string.
enum MsStatus ms_distribution_write(const struct MsDistribution *dist, const char *path);

// Releases a distribution handle. Null is ignored.
//
// # Safety
// `dist` must be null or a handle not yet freed.
void ms_distribution_free(struct MsDistribution *dist);

// Accumulated-signal summary on a `grid_n`-point grid.
//
// # Safety
// `dist` must be a live handle, `kernel` a NUL-terminated string and `out` valid.
enum MsStatus ms_signal_summary(const struct MsDistribution *dist,
                                const char *kernel,
                                size_t grid_n,
                                struct MsSignalSummary *out);

// Entropy-regularized max-average (Gibbs) distribution.
//
// # Safety
// `kernel` must be a NUL-terminated string and `out` a writable handle slot.
enum MsStatus ms_optimize_max_avg(const char *kernel,
                                  double a,
                                  double b,
                                  size_t grid_n,
                                  double lambda,
                                  struct MsDistribution **out);

// Max-min distribution; `achieved_t` (may be null) receives the worst-case signal.
//
// # Safety
// `kernel` must be a NUL-terminated string, `out` a writable handle slot and
// `achieved_t` null or valid.
enum MsStatus ms_optimize_max_min(const char *kernel,
                                  double a,
                                  double b,
                                  size_t grid_n,
                                  struct MsDistribution **out,
                                  double *achieved_t);

// Seeded crop plan with `n` entries.
//
// # Safety
// `dist` must be a live handle, `standards` must point to `n_standards`
// doubles and `out` to a writable handle slot.
enum MsStatus ms_plan_generate(const struct MsDistribution *dist,
                               size_t n,
                               uint64_t seed,
                               uint32_t source_size_px,
                               uint32_t output_size_px,
                               const double *standards,
                               size_t n_standards,
                               struct MsPlan **out);

// Number of entries in a plan; 0 for null.
//
// # Safety
// `plan` must be null or a live handle.
size_t ms_plan_len(const struct MsPlan *plan);

// Copies entry `i` into `out`.
//
// # Safety
// `plan` must be a live handle and `out` valid.
enum MsStatus ms_plan_get(const struct MsPlan *plan, size_t i, struct MsCropPlanEntry *out);

// Releases a plan handle. Null is ignored.
//
// # Safety
// `plan` must be null or a handle not yet freed.
void ms_plan_free(struct MsPlan *plan);

// RankMe of a row-major `rows × cols` matrix.
//
// # Safety
// `data` must point to `rows · cols` doubles and `out` be valid.
enum MsStatus ms_rankme(const double *data, size_t rows, size_t cols, double epsilon, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAGSAMPLE_H */
