#ifndef GSTAMP_H
#define GSTAMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_ARGUMENT = 2,
  GS_STATUS_DATA_ERROR = 3,
  GS_STATUS_NUMERICAL_ERROR = 4,
  GS_STATUS_BUFFER_TOO_SMALL = 5,
  GS_STATUS_PANIC = 6,
} GsStatus;

/**
 * Opaque catalog handle.
 */
typedef struct GsCatalog GsCatalog;

/**
 * Opaque location-map handle.
 */
typedef struct GsLocationMap GsLocationMap;

typedef struct GsVec3 {
  double x;
  double y;
  double z;
} GsVec3;

typedef struct GsEpochEstimate {
  double dt_myr;
  double residual_kpc;
  double bound_myr;
  /**
   * Galactocentric sender position at the stamp epoch, kpc.
   */
  struct GsVec3 sender;
} GsEpochEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message on this thread, excluding
 * the terminating NUL.
 */
size_t gs_last_error_length(void);

/**
 * Copies the last error message into `buf` (NUL-terminated). Fails with
 * `BufferTooSmall` when `cap` is not larger than the message length.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes of writes.
 */
enum GsStatus gs_last_error_message(char *buf, size_t cap);

/**
 * Time for a speed of `v_kms` to cover `dd_kpc`, in years.
 *
 * # Safety
 * `out_years` must be a valid pointer.
 */
enum GsStatus gs_time_resolution(double dd_kpc, double v_kms, double *out_years);

/**
 * The bundled 164-record reference snapshot.
 *
 * # Safety
 * `out` must be a valid pointer; the handle must be freed with
 * [`gs_catalog_free`].
 */
enum GsStatus gs_catalog_reference(struct GsCatalog **out);

/**
 * Parses canonical catalog CSV text.
 *
 * # Safety
 * `csv` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GsStatus gs_catalog_parse_csv(const char *csv, double epoch_jyear, struct GsCatalog **out);

/**
 * Number of records; 0 for a null handle.
 *
 * # Safety
 * `cat` must be null or a live handle.
 */
size_t gs_catalog_len(const struct GsCatalog *cat);

/**
 * # Safety
 * `cat` must be null or a handle not yet freed.
 */
void gs_catalog_free(struct GsCatalog *cat);

/**
 * The catalog as observed `dt_myr` later, moving clusters in straight
 * lines.
 *
 * # Safety
 * `cat` must be a live handle and `out` a valid pointer.
 */
enum GsStatus gs_catalog_propagate(const struct GsCatalog *cat,
                                   double dt_myr,
                                   struct GsCatalog **out);

/**
 * Selects `k` anchors at least `min_sep_kpc` apart and builds the map.
 *
 * # Safety
 * `cat` must be a live handle and `out` a valid pointer.
 */
enum GsStatus gs_map_build(const struct GsCatalog *cat,
                           size_t k,
                           double min_sep_kpc,
                           struct GsLocationMap **out);

/**
 * Number of anchors; 0 for a null handle.
 *
 * # Safety
 * `map` must be null or a live handle.
 */
size_t gs_map_anchor_count(const struct GsLocationMap *map);

/**
 * Epoch of the map, Julian year; NaN for a null handle.
 *
 * # Safety
 * `map` must be null or a live handle.
 */
double gs_map_epoch(const struct GsLocationMap *map);

/**
 * Encodes the map. `*out_len` always receives the required size; with a
 * null or short `buf` the call returns `BufferTooSmall` and writes
 * nothing else.
 *
 * # Safety
 * `map` must be a live handle, `out_len` valid, and `buf` (when not
 * null) valid for `cap` bytes.
 */
enum GsStatus gs_map_encode(const struct GsLocationMap *map,
                            uint8_t *buf,
                            size_t cap,
                            size_t *out_len);

/**
 * Decodes stamp bytes.
 *
 * # Safety
 * `bytes` must be valid for `len` bytes and `out` a valid pointer.
 */
enum GsStatus gs_map_decode(const uint8_t *bytes, size_t len, struct GsLocationMap **out);

/**
 * # Safety
 * `map` must be null or a handle not yet freed.
 */
void gs_map_free(struct GsLocationMap *map);

/**
 * Matches the map against `cat` and fits the sender position, without
 * correcting for elapsed time.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum GsStatus gs_locate_sender(const struct GsLocationMap *map,
                               const struct GsCatalog *cat,
                               double match_tol_kpc,
                               struct GsVec3 *out);

/**
 * Recovers the elapsed time between the map and `cat` within
 * `[window_lo_myr, window_hi_myr]`, using straight-line motion.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum GsStatus gs_recover_epoch(const struct GsLocationMap *map,
                               const struct GsCatalog *cat,
                               double window_lo_myr,
                               double window_hi_myr,
                               struct GsEpochEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSTAMP_H */
