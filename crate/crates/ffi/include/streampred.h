#ifndef STREAMPRED_H
#define STREAMPRED_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  SP_OK = 0,
  SP_INVALID_ARGUMENT = 1,
  SP_COLD_START = 2,
  SP_NUMERICAL_ERROR = 3,
  SP_UNSUPPORTED = 4,
  SP_NULL_POINTER = 5,
} SpStatus;

/**
 * Opaque one-pass predictor.
 */
typedef struct SpPredictor SpPredictor;

/**
 * Last error message for this thread, or NULL if none. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *sp_last_error_message(void);

/**
 * Create a one-pass predictor.
 *
 * `method` is one of "hbp_mean", "hbp_median", "shtarkov", "dpp".
 * `m` and `big_m` bound the sketch support (`m < big_m`); `k`, `depth`,
 * `width` size the sketch; `seed` fixes the hash rows. On success writes
 * the handle to `out` and returns `SpOk`.
 *
 * # Safety
 * `method` must be a NUL-terminated string and `out` a valid pointer.
 */
SpStatus sp_predictor_new(const char *method,
                          double m,
                          double big_m,
                          uintptr_t k,
                          uintptr_t depth,
                          uintptr_t width,
                          uint64_t seed,
                          SpPredictor **out);

/**
 * Feed one observation.
 *
 * # Safety
 * `p` must be a live handle from `sp_predictor_new`.
 */
SpStatus sp_predictor_observe(SpPredictor *p, double y);

/**
 * Current point prediction, written to `out`.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
SpStatus sp_predictor_predict(const SpPredictor *p, double *out);

/**
 * Destroy a handle. NULL is a no-op.
 *
 * # Safety
 * `p` must be NULL or a handle not freed before.
 */
void sp_predictor_free(SpPredictor *p);

#endif  /* STREAMPRED_H */
