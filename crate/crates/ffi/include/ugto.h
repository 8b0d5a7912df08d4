#ifndef UGTO_H
#define UGTO_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum UgtoStatus {
  UGTO_STATUS_OK = 0,
  UGTO_STATUS_NULL_POINTER = 1,
  UGTO_STATUS_INVALID_UTF8 = 2,
  UGTO_STATUS_IO = 3,
  UGTO_STATUS_PARSE = 4,
  UGTO_STATUS_USAGE = 5,
  UGTO_STATUS_CONFIG = 6,
  UGTO_STATUS_UNSUPPORTED_VERSION = 7,
  UGTO_STATUS_NUMERICAL = 8,
  UGTO_STATUS_INTERNAL = 9,
  UGTO_STATUS_PANIC = 10,
} UgtoStatus;

typedef enum UgtoEncoding {
  UGTO_ENCODING_IOB1 = 0,
  UGTO_ENCODING_BIO = 1,
} UgtoEncoding;

typedef enum UgtoMode {
  UGTO_MODE_EXTRACTION = 0,
  UGTO_MODE_RECOGNITION = 1,
} UgtoMode;

/**
 * Opaque trained model.
 */
typedef struct UgtoModel UgtoModel;

/**
 * Half-open token range `[start, end)` with its entity type.
 */
typedef struct UgtoSpan {
  size_t start;
  size_t end;
  char *etype;
} UgtoSpan;

typedef struct UgtoScore {
  double precision;
  double recall;
  double f1;
  size_t gold;
  size_t predicted;
  size_t correct;
} UgtoScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *ugto_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *ugto_last_error_message(void);

/**
 * Loads a model file. On success `*out` owns a handle for
 * [`ugto_model_free`].
 */
enum UgtoStatus ugto_model_load(const char *path, struct UgtoModel **out);

void ugto_model_free(struct UgtoModel *model);

/**
 * Number of labels the model can emit.
 */
size_t ugto_model_num_labels(const struct UgtoModel *model);

/**
 * Tags one sentence given parallel arrays of surface forms and POS tags.
 * `*out` receives one labeling tag per token, separated by `'\n'`;
 * release it with [`ugto_string_free`].
 */
enum UgtoStatus ugto_tag_sentence(const struct UgtoModel *model,
                                  const char *const *surfaces,
                                  const char *const *pos,
                                  size_t len,
                                  char **out);

/**
 * Tags one sentence and returns its entities. `*out_spans` is an array
 * of `*out_len` spans to release with [`ugto_spans_free`].
 */
enum UgtoStatus ugto_extract_entities(const struct UgtoModel *model,
                                      const char *const *surfaces,
                                      const char *const *pos,
                                      size_t len,
                                      struct UgtoSpan **out_spans,
                                      size_t *out_len);

void ugto_spans_free(struct UgtoSpan *spans, size_t len);

void ugto_string_free(char *s);

/**
 * Scores a predicted CoNLL file against a gold one.
 */
enum UgtoStatus ugto_eval_files(const char *gold_path,
                                enum UgtoEncoding gold_encoding,
                                const char *pred_path,
                                enum UgtoEncoding pred_encoding,
                                enum UgtoMode mode,
                                struct UgtoScore *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UGTO_H */
