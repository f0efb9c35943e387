#ifndef CMCL_H
#define CMCL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CmclStatus {
  CMCL_STATUS_OK = 0,
  CMCL_STATUS_NULL_POINTER = 1,
  CMCL_STATUS_INVALID_ARGUMENT = 2,
  CMCL_STATUS_DECODE = 3,
  CMCL_STATUS_COMPRESSION = 4,
  CMCL_STATUS_BUFFER_TOO_SMALL = 5,
  CMCL_STATUS_PANIC = 6,
} CmclStatus;

/**
 * Weighted particle set.
 */
typedef struct CmclBelief CmclBelief;

/**
 * Encoded detection message.
 */
typedef struct CmclMessage CmclMessage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the most recent failure on this thread (empty when none).
 * The pointer stays valid until the next call on the same thread.
 */
const char *cmcl_last_error(void);

/**
 * Creates a belief from `n` poses laid out as `x, y, theta` triples.
 * `weights` may be null for equal weights; otherwise it holds `n` values.
 *
 * # Safety
 * `poses` must point to `3 * n` doubles, `weights` to `n` doubles or be null,
 * and `out` must be valid for a write.
 */
enum CmclStatus cmcl_belief_new(const double *poses,
                                const double *weights,
                                size_t n,
                                struct CmclBelief **out);

/**
 * # Safety
 * `belief` must come from [`cmcl_belief_new`] and not be used afterwards; null is ignored.
 */
void cmcl_belief_free(struct CmclBelief *belief);

/**
 * # Safety
 * `belief` must be a live handle and `out` valid for a write.
 */
enum CmclStatus cmcl_belief_len(const struct CmclBelief *belief, size_t *out);

/**
 * Copies the particles as `x, y, theta, weight` quadruples into `out`, which
 * holds room for `capacity` particles.
 *
 * # Safety
 * `belief` must be a live handle and `out` must point to `4 * capacity` doubles.
 */
enum CmclStatus cmcl_belief_particles(const struct CmclBelief *belief,
                                      double *out,
                                      size_t capacity);

/**
 * Weighted-mean pose as `x, y, theta`.
 *
 * # Safety
 * `belief` must be a live handle and `out` must point to 3 doubles.
 */
enum CmclStatus cmcl_belief_estimate(const struct CmclBelief *belief, double *out);

/**
 * Builds the message a robot sends after detecting another robot at
 * (`range`, `bearing`) relative to itself. `method` is the wire tag
 * (0 naive, 1 std_thinning, 2 det, 3 prorok, 4 kmeans, 5 compresspp).
 * Randomized methods draw from a generator seeded with `seed`.
 *
 * # Safety
 * `sender` must be a live handle and `out` valid for a write.
 */
enum CmclStatus cmcl_summarize(const struct CmclBelief *sender,
                               double range,
                               double bearing,
                               uint8_t method,
                               uint64_t seed,
                               struct CmclMessage **out);

/**
 * Wraps received bytes after checking that they decode.
 *
 * # Safety
 * `bytes` must point to `len` bytes and `out` be valid for a write.
 */
enum CmclStatus cmcl_message_from_bytes(const uint8_t *bytes, size_t len, struct CmclMessage **out);

/**
 * Encoded size of `msg` in bytes.
 *
 * # Safety
 * `msg` must be a live handle and `out` valid for a write.
 */
enum CmclStatus cmcl_message_len(const struct CmclMessage *msg, size_t *out);

/**
 * Copies the encoded message into `buf` (room for `capacity` bytes).
 *
 * # Safety
 * `msg` must be a live handle and `buf` must point to `capacity` writable bytes.
 */
enum CmclStatus cmcl_message_bytes(const struct CmclMessage *msg, uint8_t *buf, size_t capacity);

/**
 * # Safety
 * `msg` must come from this library and not be used afterwards; null is ignored.
 */
void cmcl_message_free(struct CmclMessage *msg);

/**
 * Fuses `msg` into `receiver` with the default detection model, then
 * resamples with reciprocal injection probability `alpha` when the effective
 * sample size drops below half the particle count. `resampled` (may be null)
 * receives 1 when that happened.
 *
 * # Safety
 * `receiver` and `msg` must be live handles; `resampled` null or valid for a write.
 */
enum CmclStatus cmcl_fuse(struct CmclBelief *receiver,
                          const struct CmclMessage *msg,
                          double alpha,
                          uint64_t seed,
                          int32_t *resampled);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CMCL_H */
