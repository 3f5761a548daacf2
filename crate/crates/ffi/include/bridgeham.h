#ifndef BRIDGEHAM_H
#define BRIDGEHAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Status codes. Zero is success.
 */
typedef enum BhStatus {
  BH_STATUS_OK = 0,
  /*
   A required pointer was null or a buffer was too small.
   */
  BH_STATUS_INVALID_ARGUMENT = 1,
  BH_STATUS_INVALID_PARAMS = 2,
  BH_STATUS_INVALID_INPUT = 3,
  BH_STATUS_PRECONDITION = 4,
  BH_STATUS_INTERNAL = 5,
  BH_STATUS_IO = 6,
  /*
   A Rust panic was caught at the boundary.
   */
  BH_STATUS_PANIC = 7,
} BhStatus;

typedef enum BhMode {
  BH_MODE_STRICT = 0,
  BH_MODE_BEST_EFFORT = 1,
} BhMode;

/*
 Opaque trial handle.
 */
typedef struct BhTrial BhTrial;

/*
 Model inputs. The density is uniform; custom point sets go through
 [`bh_trial_run_points`].
 */
typedef struct BhParams {
  size_t n;
  double alpha;
  double omega;
  double eps1;
  double eps2;
  size_t l;
  size_t m;
} BhParams;

/*
 Derived tiling quantities.
 */
typedef struct BhTiling {
  size_t k;
  size_t m_eff;
  double r_n;
  double t_n;
  double gamma_n;
  double theta_n;
  double budget;
} BhTiling;

/*
 Event flags and result of one trial.
 */
typedef struct BhEvents {
  bool f;
  bool i;
  bool j;
  bool h;
  bool success;
  bool out_of_guarantee;
} BhEvents;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next call into the library on the same thread.
 */
const char *bh_last_error_message(void);

/*
 Computes the tiling for `params` into `out`.

 # Safety
 `params` and `out` must be null or valid for reads and writes respectively.
 */
enum BhStatus bh_params_compute(const struct BhParams *params, struct BhTiling *out);

/*
 Samples `params.n` uniform nodes with `seed` and runs one trial.

 # Safety
 `params` must be null or valid for reads. `out` must be null or valid for
 writes. On success `*out` holds a handle to release with `bh_trial_free`.
 */
enum BhStatus bh_trial_run(const struct BhParams *params,
                           enum BhMode mode,
                           uint64_t seed,
                           struct BhTrial **out);

/*
 Runs one trial on `n_points` points given as interleaved `x, y` pairs in
 the centred unit square. `params.n` must equal `n_points`.

 # Safety
 `xy` must be valid for reads of `2 * n_points` doubles. Other pointers as
 for `bh_trial_run`.
 */
enum BhStatus bh_trial_run_points(const struct BhParams *params,
                                  enum BhMode mode,
                                  const double *xy,
                                  size_t n_points,
                                  uint64_t seed,
                                  struct BhTrial **out);

/*
 Releases a trial handle. Null is ignored.

 # Safety
 `trial` must be null or a handle from this library not yet released.
 */
void bh_trial_free(struct BhTrial *trial);

/*
 Copies the event flags of `trial` into `out`.

 # Safety
 `trial` must be null or a live handle; `out` must be null or writable.
 */
enum BhStatus bh_trial_events(const struct BhTrial *trial, struct BhEvents *out);

/*
 Number of nodes in the trial's cycle, or 0 if none was built or `trial`
 is null.

 # Safety
 `trial` must be null or a live handle.
 */
size_t bh_trial_cycle_len(const struct BhTrial *trial);

/*
 Copies the cycle's node order into `buf`, which must hold at least
 `bh_trial_cycle_len(trial)` entries.

 # Safety
 `buf` must be valid for writes of `cap` entries.
 */
enum BhStatus bh_trial_cycle(const struct BhTrial *trial, size_t *buf, size_t cap);

/*
 Writes the trial report as a JSON string to `*out`.

 # Safety
 `trial` must be null or a live handle; `out` must be null or writable.
 */
enum BhStatus bh_trial_report_json(const struct BhTrial *trial, char **out);

/*
 Runs `trials` seeded trials (seeds `base_seed`, `base_seed + 1`, ...) on
 `jobs` threads, 0 meaning all cores, and writes the summary JSON to `*out`.

 # Safety
 `params` must be null or readable; `out` must be null or writable.
 */
enum BhStatus bh_batch_run(const struct BhParams *params,
                           enum BhMode mode,
                           size_t trials,
                           uint64_t base_seed,
                           size_t jobs,
                           char **out);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must be null or a string from this library not yet released.
 */
void bh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRIDGEHAM_H */
