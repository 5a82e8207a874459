/* SPDX-License-Identifier: MIT OR Apache-2.0 */

#ifndef TPRLAB_H
#define TPRLAB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Logits per call: 64 squares times 3 colors, square-major.
 */
#define TPR_LOGITS_LEN 192

/**
 * Result of every fallible call.
 */
typedef enum TprStatus {
  TPR_STATUS_OK = 0,
  TPR_STATUS_NULL_POINTER = 1,
  TPR_STATUS_INVALID_ARGUMENT = 2,
  TPR_STATUS_ILLEGAL_MOVE = 3,
  TPR_STATUS_IO = 4,
  TPR_STATUS_FORMAT = 5,
  TPR_STATUS_DIMENSION_MISMATCH = 6,
  TPR_STATUS_INSUFFICIENT_DIMENSION = 7,
  TPR_STATUS_DEGENERATE = 8,
  TPR_STATUS_NO_VALID_TARGET = 9,
  TPR_STATUS_PANIC = 10,
} TprStatus;

typedef enum TprProbeKind {
  TPR_PROBE_KIND_LINEAR = 0,
  TPR_PROBE_KIND_BILINEAR = 1,
  TPR_PROBE_KIND_TRILINEAR = 2,
} TprProbeKind;

typedef enum TprPlayer {
  TPR_PLAYER_BLACK = 0,
  TPR_PLAYER_WHITE = 1,
} TprPlayer;

/**
 * Opaque Othello position.
 */
typedef struct TprBoard TprBoard;

/**
 * Opaque encoded dataset.
 */
typedef struct TprDataset TprDataset;

/**
 * Opaque trained probe of any family.
 */
typedef struct TprProbe TprProbe;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *tpr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tpr_version(void);

enum TprStatus tpr_dataset_read(const char *path, struct TprDataset **out);

void tpr_dataset_free(struct TprDataset *d);

/**
 * Number of samples, 0 for a NULL handle.
 */
size_t tpr_dataset_len(const struct TprDataset *d);

/**
 * Activation width, 0 for a NULL handle.
 */
size_t tpr_dataset_d_model(const struct TprDataset *d);

/**
 * Copies sample `index` into `h_out` (`h_len` must equal d_model) and its
 * 64 egocentric labels into `labels_out`.
 */
enum TprStatus tpr_dataset_sample(const struct TprDataset *d,
                                  size_t index,
                                  float *h_out,
                                  size_t h_len,
                                  uint8_t *labels_out);

enum TprStatus tpr_probe_load(const char *path, struct TprProbe **out);

enum TprStatus tpr_probe_save(const struct TprProbe *p, const char *path);

void tpr_probe_free(struct TprProbe *p);

enum TprStatus tpr_probe_kind(const struct TprProbe *p, enum TprProbeKind *out);

/**
 * Activation width, 0 for a NULL handle.
 */
size_t tpr_probe_d_model(const struct TprProbe *p);

/**
 * Trainable parameter count, 0 for a NULL handle.
 */
size_t tpr_probe_param_count(const struct TprProbe *p);

/**
 * Writes the 192 logits for activation `h` into `logits_out`, entry
 * `3 * square + color`.
 */
enum TprStatus tpr_probe_forward(const struct TprProbe *p,
                                 const double *h,
                                 size_t h_len,
                                 double *logits_out);

/**
 * Fraction of (sample, square) pairs classified correctly.
 */
enum TprStatus tpr_probe_accuracy(const struct TprProbe *p,
                                  const struct TprDataset *d,
                                  double *out);

/**
 * New linear probe computing the same logits as `p`.
 */
enum TprStatus tpr_probe_effective(const struct TprProbe *p, struct TprProbe **out);

/**
 * Moves activation `h` so that the probe reads `to` on `square`
 * (a token such as "D3") instead of `from`, with step `alpha`. Colors
 * are 0 empty, 1 current player, 2 opponent. Linear probes ignore `from`.
 */
enum TprStatus tpr_intervene(const struct TprProbe *p,
                             const double *h,
                             size_t h_len,
                             const char *square,
                             uint8_t from,
                             uint8_t to,
                             double alpha,
                             double *h_out);

/**
 * Standard opening position, Black to move. Never NULL.
 */
struct TprBoard *tpr_board_new(void);

/**
 * Position after a space-separated transcript such as "D3 C5 F6".
 */
enum TprStatus tpr_board_from_transcript(const char *moves, struct TprBoard **out);

void tpr_board_free(struct TprBoard *b);

/**
 * Plays `square` for the side to move. The board is unchanged on failure.
 */
enum TprStatus tpr_board_apply(struct TprBoard *b, const char *square);

/**
 * Legal moves as a bit mask, bit `8 * row + col`. 0 for a NULL handle.
 */
uint64_t tpr_board_legal_mask(const struct TprBoard *b);

enum TprStatus tpr_board_to_move(const struct TprBoard *b, enum TprPlayer *out);

/**
 * Writes 64 egocentric labels (0 empty, 1 side to move, 2 opponent).
 */
enum TprStatus tpr_board_labels(const struct TprBoard *b, uint8_t *labels_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TPRLAB_H */
