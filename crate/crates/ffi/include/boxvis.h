#ifndef BOXVIS_H
#define BOXVIS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum BoxvisStatus {
  BOXVIS_STATUS_OK = 0,
  BOXVIS_STATUS_NULL_POINTER = 1,
  BOXVIS_STATUS_INVALID_UTF8 = 2,
  BOXVIS_STATUS_IO = 3,
  BOXVIS_STATUS_PARSE = 4,
  BOXVIS_STATUS_INVALID_DATA = 5,
  BOXVIS_STATUS_FINGERPRINT_MISMATCH = 6,
  BOXVIS_STATUS_PANIC = 7,
} BoxvisStatus;

/*
 Opaque recommender.
 */
typedef struct BoxvisRecommender BoxvisRecommender;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Loads a model and the bins it was trained against.

 # Safety
 `model_path` and `bins_path` must be NUL-terminated strings and `out`
 a valid pointer. On success `*out` owns a handle to release with
 `boxvis_recommender_free`.
 */
enum BoxvisStatus boxvis_recommender_open(const char *model_path,
                                          const char *bins_path,
                                          struct BoxvisRecommender **out);

/*
 Sets the containment tolerance used for the recommended type set.

 # Safety
 `handle` must come from `boxvis_recommender_open`.
 */
enum BoxvisStatus boxvis_recommender_set_tolerance(struct BoxvisRecommender *handle, double tol);

/*
 Recommends axes and chart types for one pair given as a corpus JSON
 line. `*out_json` receives the result, freed with `boxvis_string_free`.

 # Safety
 `handle` must come from `boxvis_recommender_open`, `pair_json` must be
 a NUL-terminated string and `out_json` a valid pointer.
 */
enum BoxvisStatus boxvis_recommend(const struct BoxvisRecommender *handle,
                                   const char *pair_json,
                                   char **out_json);

/*
 Releases a handle. Null is ignored.

 # Safety
 `handle` must come from `boxvis_recommender_open` and not be used again.
 */
void boxvis_recommender_free(struct BoxvisRecommender *handle);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be used again.
 */
void boxvis_string_free(char *s);

/*
 Message of the last failure on this thread, or null. Valid until the
 next failing call on the same thread.
 */
const char *boxvis_last_error(void);

/*
 Library version as a static string.
 */
const char *boxvis_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOXVIS_H */
