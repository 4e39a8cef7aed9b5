#ifndef TEXTDET_H
#define TEXTDET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdStatus {
  TD_STATUS_OK = 0,
  TD_STATUS_NULL_POINTER = 1,
  TD_STATUS_INVALID_ARGUMENT = 2,
  TD_STATUS_DECODE_ERROR = 3,
  TD_STATUS_CONFIG_ERROR = 4,
  TD_STATUS_OUT_OF_RANGE = 5,
  TD_STATUS_NOT_FOUND = 6,
  TD_STATUS_PANIC = 7,
} TdStatus;

/**
 * Opaque pipeline configuration.
 */
typedef struct TdConfig TdConfig;

/**
 * Opaque gray image.
 */
typedef struct TdImage TdImage;

/**
 * Opaque detection result.
 */
typedef struct TdResult TdResult;

typedef struct TdBox {
  uint32_t x;
  uint32_t y;
  uint32_t width;
  uint32_t height;
} TdBox;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *td_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *td_version(void);

/**
 * Copies a row-major 8-bit gray raster.
 *
 * # Safety
 * `data` must point to `width * height` readable bytes and `out` must be writable.
 */
enum TdStatus td_image_from_gray(const uint8_t *data,
                                 uint32_t width,
                                 uint32_t height,
                                 struct TdImage **out);

/**
 * Decodes a PNG or binary PGM byte stream.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` must be writable.
 */
enum TdStatus td_image_decode(const uint8_t *bytes, size_t len, struct TdImage **out);

/**
 * # Safety
 * `image` must be a live handle or null.
 */
uint32_t td_image_width(const struct TdImage *image);

/**
 * # Safety
 * `image` must be a live handle or null.
 */
uint32_t td_image_height(const struct TdImage *image);

/**
 * # Safety
 * `image` must come from this library and not be freed twice. Null is ignored.
 */
void td_image_free(struct TdImage *image);

/**
 * A config holding the built-in defaults.
 */
struct TdConfig *td_config_default(void);

/**
 * Parses a JSON config; missing keys take defaults, unknown keys fail.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` must be writable.
 */
enum TdStatus td_config_from_json(const char *json, struct TdConfig **out);

/**
 * # Safety
 * `config` must come from this library and not be freed twice. Null is ignored.
 */
void td_config_free(struct TdConfig *config);

/**
 * Runs detection. A null `config` uses the defaults.
 *
 * # Safety
 * `image` must be a live handle, `config` a live handle or null, `out` writable.
 */
enum TdStatus td_detect(const struct TdImage *image,
                        const struct TdConfig *config,
                        struct TdResult **out);

/**
 * Number of merged text boxes; 0 for a null handle.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
size_t td_result_box_count(const struct TdResult *result);

/**
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
enum TdStatus td_result_box(const struct TdResult *result, size_t index, struct TdBox *out);

/**
 * Writes the primary (largest) text box, or returns `NotFound` when nothing was detected.
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
enum TdStatus td_result_primary_box(const struct TdResult *result, struct TdBox *out);

/**
 * Full result document as JSON. Release the string with [`td_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
enum TdStatus td_result_json(const struct TdResult *result, char **out);

/**
 * # Safety
 * `result` must come from this library and not be freed twice. Null is ignored.
 */
void td_result_free(struct TdResult *result);

/**
 * # Safety
 * `s` must be a string returned by this library, not yet freed. Null is ignored.
 */
void td_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEXTDET_H */
