#ifndef TWEETSCOPE_H
#define TWEETSCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_UTF8 = 2,
  TS_STATUS_PARSE_ERROR = 3,
  TS_STATUS_INVALID_ARGUMENT = 4,
  TS_STATUS_UNDEFINED_METRIC = 5,
  TS_STATUS_INTERNAL = 6,
} TsStatus;

// Opaque sentiment lexicon.
typedef struct TsLexicon TsLexicon;

// Opaque logistic regression model.
typedef struct TsLrModel TsLrModel;

// Opaque Naive Bayes model.
typedef struct TsNbModel TsNbModel;

// Accuracy, sensitivity and specificity of a binary confusion matrix.
typedef struct TsMetrics {
  double accuracy;
  double sensitivity;
  double specificity;
} TsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null if none. The
// pointer stays valid until the next failing call on the same thread.
const char *ts_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a pointer obtained from this library, freed once.
void ts_string_free(char *s);

// Tokenizes `text` and writes the tokens as a JSON array of strings.
//
// # Safety
// `text` must be a NUL-terminated string; `out_json` must be writable.
enum TsStatus ts_tokenize(const char *text, char **out_json);

// Porter stem of a single lowercase word.
//
// # Safety
// `word` must be a NUL-terminated string; `out_stem` must be writable.
enum TsStatus ts_stem(const char *word, char **out_stem);

// Replaces every abusive word in `text` with a fixed prefix plus four
// seeded digits. `words` is a newline-separated list.
//
// # Safety
// `text` and `words` must be NUL-terminated strings; the out pointers must
// be writable.
enum TsStatus ts_mask_abusive(const char *text,
                              const char *words,
                              uint64_t seed,
                              char **out_text,
                              size_t *out_replacements);

// Metrics of the confusion matrix (tn, fp, fn, tp).
//
// # Safety
// `out` must be writable.
enum TsStatus ts_metrics(uint64_t tn,
                         uint64_t fp,
                         uint64_t fn_,
                         uint64_t tp,
                         struct TsMetrics *out);

// Parses a lexicon from TSV text (word, category, flag).
//
// # Safety
// `tsv` must be a NUL-terminated string; `out` must be writable.
enum TsStatus ts_lexicon_load(const char *tsv, struct TsLexicon **out);

// Mean valence of the lexicon words in `text` and how many matched.
//
// # Safety
// `lexicon` must come from [`ts_lexicon_load`]; `text` must be a
// NUL-terminated string; the out pointers must be writable.
enum TsStatus ts_lexicon_score(const struct TsLexicon *lexicon,
                               const char *text,
                               double *out_valence,
                               size_t *out_matched);

// Dominant emotion category of `text`; an empty string when no lexicon
// word matches.
//
// # Safety
// `lexicon` must come from [`ts_lexicon_load`]; `text` must be a
// NUL-terminated string; `out_emotion` must be writable.
enum TsStatus ts_lexicon_dominant_emotion(const struct TsLexicon *lexicon,
                                          const char *text,
                                          char **out_emotion);

// # Safety
// `lexicon` must be null or come from [`ts_lexicon_load`], freed once.
void ts_lexicon_free(struct TsLexicon *lexicon);

// Loads a Naive Bayes model saved as JSON by the `tweetscope` tool.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum TsStatus ts_nb_from_json(const char *json, struct TsNbModel **out);

// Predicted class (0 negative, 1 positive) of raw tweet text. The text is
// tokenized and stemmed the same way as during training.
//
// # Safety
// `model` must come from [`ts_nb_from_json`]; `text` must be a
// NUL-terminated string; `out_label` must be writable.
enum TsStatus ts_nb_predict(const struct TsNbModel *model, const char *text, uint8_t *out_label);

// # Safety
// `model` must be null or come from [`ts_nb_from_json`], freed once.
void ts_nb_free(struct TsNbModel *model);

// Loads a logistic regression model saved as JSON by the `tweetscope`
// tool. The model must carry its vocabulary.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum TsStatus ts_lr_from_json(const char *json, struct TsLrModel **out);

// Positive-class probability and predicted class of raw tweet text.
//
// # Safety
// `model` must come from [`ts_lr_from_json`]; `text` must be a
// NUL-terminated string; the out pointers must be writable.
enum TsStatus ts_lr_predict(const struct TsLrModel *model,
                            const char *text,
                            double *out_probability,
                            uint8_t *out_label);

// # Safety
// `model` must be null or come from [`ts_lr_from_json`], freed once.
void ts_lr_free(struct TsLrModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWEETSCOPE_H */
