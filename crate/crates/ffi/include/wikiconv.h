#ifndef WIKICONV_H
#define WIKICONV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WcStatus {
  WC_STATUS_OK = 0,
  WC_STATUS_NULL_ARGUMENT = 1,
  WC_STATUS_INVALID_UTF8 = 2,
  WC_STATUS_INVALID_ARGUMENT = 3,
  WC_STATUS_RECONSTRUCT_ERROR = 4,
  WC_STATUS_PANIC = 5,
} WcStatus;

/*
 Reconstruction state for a single page.
 */
typedef struct WcReconstructor WcReconstructor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates a reconstructor for one page. Returns null on bad arguments.

 # Safety
 Both arguments must be null or NUL-terminated strings.
 */
struct WcReconstructor *wc_reconstructor_new(const char *page_id, const char *page_title);

/*
 Feeds the next revision of the page. On success `*out_jsonl` receives the
 resulting actions, one JSON record per line (possibly empty).
 `user_id` below zero means anonymous.

 # Safety
 `handle` must come from [`wc_reconstructor_new`] and not be freed; string
 arguments must be NUL-terminated; `out_jsonl` must be writable.
 */
enum WcStatus wc_reconstructor_push_revision(struct WcReconstructor *handle,
                                             const char *revision_id,
                                             const char *timestamp,
                                             const char *user_text,
                                             int64_t user_id,
                                             const char *wikitext,
                                             char **out_jsonl);

/*
 # Safety
 `handle` must be null or come from [`wc_reconstructor_new`], and must not
 be used afterwards.
 */
void wc_reconstructor_free(struct WcReconstructor *handle);

/*
 Strips markup. `*out_fallback` is set to 1 when the input could not be
 cleaned and was returned verbatim.

 # Safety
 `text` must be NUL-terminated; `out` and `out_fallback` must be writable.
 */
enum WcStatus wc_clean_markup(const char *text, char **out, int32_t *out_fallback);

/*
 Equal error rate threshold over `len` scores with 0/1 labels.

 # Safety
 `scores` and `labels` must point to `len` readable elements; `out` must be
 writable.
 */
enum WcStatus wc_equal_error_threshold(const double *scores,
                                       const uint8_t *labels,
                                       uintptr_t len,
                                       double *out);

/*
 Message for the last failed call on this thread, or null. Valid until the
 next call into the library on the same thread.
 */
const char *wc_last_error_message(void);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void wc_string_free(char *s);

const char *wc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIKICONV_H */
