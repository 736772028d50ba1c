#ifndef TWEETLINK_H
#define TWEETLINK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_NULL_ARGUMENT = 1,
  TL_STATUS_INVALID_UTF8 = 2,
  TL_STATUS_IO = 3,
  TL_STATUS_PARSE = 4,
  TL_STATUS_INVALID_ARGUMENT = 5,
  TL_STATUS_SCHEME_MISMATCH = 6,
  TL_STATUS_UNKNOWN_AUTHOR = 7,
  TL_STATUS_MODEL_FORMAT = 8,
  TL_STATUS_PANIC = 9,
} TlStatus;

typedef enum TlScheme {
  TL_SCHEME_UNIGRAM = 0,
  TL_SCHEME_BIGRAM = 1,
  TL_SCHEME_HASHTAG = 2,
} TlScheme;

// A loaded tweet corpus grouped by author.
typedef struct TlCorpus TlCorpus;

// A trained model. Author ids are cached as C strings so callers can borrow
// them for the handle's lifetime.
typedef struct TlModel TlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *tl_last_error_message(void);

// Loads a corpus of JSON lines with `user`, `text` and optional `ts` fields.
//
// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum TlStatus tl_corpus_load_jsonl(const char *path, struct TlCorpus **out);

// Loads a corpus of T/U/W text blocks.
//
// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum TlStatus tl_corpus_load_snap(const char *path, struct TlCorpus **out);

// # Safety
// `corpus` must come from a `tl_corpus_load_*` call and not be used again.
void tl_corpus_free(struct TlCorpus *corpus);

// # Safety
// Pointers must be valid.
enum TlStatus tl_corpus_num_authors(const struct TlCorpus *corpus, uintptr_t *out);

// # Safety
// Pointers must be valid.
enum TlStatus tl_corpus_num_tweets(const struct TlCorpus *corpus, uintptr_t *out);

// Trains one profile per corpus author.
//
// # Safety
// Pointers must be valid.
enum TlStatus tl_model_build(const struct TlCorpus *corpus,
                             enum TlScheme scheme,
                             struct TlModel **out);

// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum TlStatus tl_model_load(const char *path, struct TlModel **out);

// # Safety
// Pointers must be valid.
enum TlStatus tl_model_save(const struct TlModel *model, const char *path);

// # Safety
// `model` must come from `tl_model_build` or `tl_model_load` and not be used
// again.
void tl_model_free(struct TlModel *model);

// # Safety
// Pointers must be valid.
enum TlStatus tl_model_scheme(const struct TlModel *model, enum TlScheme *out);

// # Safety
// Pointers must be valid.
enum TlStatus tl_model_num_authors(const struct TlModel *model, uintptr_t *out);

// Author id at `index` (authors are sorted by id). The string is owned by
// the model and lives as long as it does.
//
// # Safety
// Pointers must be valid.
enum TlStatus tl_model_author_id(const struct TlModel *model, uintptr_t index, const char **out);

// Smoothed `ln P(token | author)`.
//
// # Safety
// Pointers must be valid.
enum TlStatus tl_model_token_log_prob(const struct TlModel *model,
                                      const char *author,
                                      uintptr_t token,
                                      double *out);

// Ranks every author against the anonymous `text` and writes the best
// `capacity` of them: model indices to `out_indices`, scores to
// `out_scores` (may be NULL). `out_len` receives the number written.
// `out_empty` (may be NULL) is set to 1 when the text has no tokens under the
// model's scheme, in which case the order is by author id alone.
//
// # Safety
// `out_indices` (and `out_scores` when non-NULL) must hold `capacity`
// elements.
enum TlStatus tl_model_rank_text(const struct TlModel *model,
                                 const char *text,
                                 uintptr_t capacity,
                                 uintptr_t *out_indices,
                                 double *out_scores,
                                 uintptr_t *out_len,
                                 uint8_t *out_empty);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWEETLINK_H */
