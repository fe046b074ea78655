#ifndef POSTERFUSE_H
#define POSTERFUSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes shared by every function in this library.
 */
typedef enum PfStatus {
  PF_STATUS_OK = 0,
  PF_STATUS_NULL_POINTER = 1,
  PF_STATUS_INVALID_UTF8 = 2,
  PF_STATUS_INVALID_ARGUMENT = 3,
  PF_STATUS_IO = 4,
  PF_STATUS_FORMAT = 5,
  PF_STATUS_DIMENSION_MISMATCH = 6,
  PF_STATUS_BUFFER_TOO_SMALL = 7,
  PF_STATUS_PANIC = 8,
} PfStatus;

/*
 Loaded classifier checkpoint.
 */
typedef struct PfModel PfModel;

/*
 Loaded vocabulary.
 */
typedef struct PfVocab PfVocab;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *pf_version(void);

/*
 Message for the last failed call on this thread, or NULL after a
 success. The pointer stays valid until the next call on this thread.
 */
const char *pf_last_error_message(void);

/*
 Logistic function of a logit.
 */
double pf_sigmoid(double z);

/*
 Writes an appearance feature file.

 # Safety
 `path` must be a NUL-terminated string and `values` must point to `dim`
 floats.
 */
enum PfStatus pf_feature_write(const char *path, const float *values, size_t dim);

/*
 Reads an appearance feature file into `out`. `out_dim` receives the
 stored dimension, also when `capacity` is too small.

 # Safety
 `path` must be a NUL-terminated string, `out` must have room for
 `capacity` floats and `out_dim` must be writable.
 */
enum PfStatus pf_feature_read(const char *path, float *out, size_t capacity, size_t *out_dim);

/*
 Loads a vocabulary file. On success `*out` owns a handle to release
 with [`pf_vocab_free`].

 # Safety
 `path` must be a NUL-terminated string and `out` must be writable.
 */
enum PfStatus pf_vocab_load(const char *path, struct PfVocab **out);

/*
 Number of words in the vocabulary, 0 for NULL.

 # Safety
 `vocab` must be NULL or a live handle.
 */
size_t pf_vocab_len(const struct PfVocab *vocab);

/*
 Normalizes `tokens` and writes per-word counts into `out_counts`, which
 must hold `pf_vocab_len(vocab)` entries.

 # Safety
 `vocab` must be a live handle, `tokens` must point to `n_tokens`
 NUL-terminated strings and `out_counts` to `capacity` integers.
 */
enum PfStatus pf_vocab_encode(const struct PfVocab *vocab,
                              const char *const *tokens,
                              size_t n_tokens,
                              uint32_t *out_counts,
                              size_t capacity);

/*
 Releases a vocabulary handle.

 # Safety
 `vocab` must be NULL or a handle from [`pf_vocab_load`] not yet freed.
 */
void pf_vocab_free(struct PfVocab *vocab);

/*
 Writes the fused vector (appearance followed by `k` times the counts)
 into `out`, which must hold `appearance_dim + n` doubles.

 # Safety
 `appearance` must point to `appearance_dim` floats, `counts` to `n`
 integers and `out` to `capacity` doubles.
 */
enum PfStatus pf_fuse(const float *appearance,
                      size_t appearance_dim,
                      const uint32_t *counts,
                      size_t n,
                      double k,
                      double *out,
                      size_t capacity);

/*
 Loads a classifier checkpoint. On success `*out` owns a handle to
 release with [`pf_model_free`].

 # Safety
 `path` must be a NUL-terminated string and `out` must be writable.
 */
enum PfStatus pf_model_load(const char *path, struct PfModel **out);

/*
 Input dimension the model expects, 0 for NULL.

 # Safety
 `model` must be NULL or a live handle.
 */
size_t pf_model_input_dim(const struct PfModel *model);

/*
 Number of dense layers, 0 for NULL.

 # Safety
 `model` must be NULL or a live handle.
 */
size_t pf_model_depth(const struct PfModel *model);

/*
 Runs the model on one input. Writes the logit, the positive-class
 probability and the 0/1 decision; any output pointer may be NULL.

 # Safety
 `model` must be a live handle and `x` must point to `dim` doubles.
 */
enum PfStatus pf_model_forward(const struct PfModel *model,
                               const double *x,
                               size_t dim,
                               double *out_logit,
                               double *out_probability,
                               uint8_t *out_label);

/*
 Releases a model handle.

 # Safety
 `model` must be NULL or a handle from [`pf_model_load`] not yet freed.
 */
void pf_model_free(struct PfModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSTERFUSE_H */
