#ifndef TEMPOFIELD_H
#define TEMPOFIELD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Receptive field value meaning "all history".
 */
#define TF_TAU_INF 0

enum TfArch
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  TF_ARCH_EGCN = 0,
  TF_ARCH_DYSAT = 1,
  TF_ARCH_GCLSTM = 2,
  TF_ARCH_STGCN = 3,
  TF_ARCH_EDGE_BANK = 4,
};
#ifndef __cplusplus
typedef int32_t TfArch;
#endif // __cplusplus

enum TfStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  TF_STATUS_OK = 0,
  TF_STATUS_NULL_POINTER = 1,
  TF_STATUS_INVALID_ARGUMENT = 2,
  TF_STATUS_PARSE = 3,
  TF_STATUS_FORMAT = 4,
  TF_STATUS_IO = 5,
  TF_STATUS_OUT_OF_RANGE = 6,
  TF_STATUS_PROTOCOL = 7,
  TF_STATUS_DIVERGED = 8,
  TF_STATUS_DEGENERATE = 9,
  TF_STATUS_NUMERIC = 10,
  TF_STATUS_PANIC = 11,
};
#ifndef __cplusplus
typedef int32_t TfStatus;
#endif // __cplusplus

/*
 Opaque dynamic graph.
 */
typedef struct TfDtdg TfDtdg;

/*
 Opaque model: architecture, sizes and parameters.
 */
typedef struct TfModel TfModel;

/*
 Model sizes; see [`tf_experiment_default`] for the defaults.
 */
typedef struct TfHyper {
  uint32_t d_in;
  uint32_t hidden;
  uint32_t heads;
  uint32_t kernel;
  uint32_t max_positions;
} TfHyper;

/*
 Everything besides the graph that fixes the outcome of a unit.
 */
typedef struct TfExperiment {
  uint64_t master_seed;
  double train_fraction;
  uint32_t epochs;
  double lr;
  uint32_t negatives_per_positive;
  struct TfHyper hyper;
} TfExperiment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *tf_version(void);

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *tf_last_error_message(void);

/*
 Default experiment settings.

 # Safety
 `out_experiment` must point to writable memory for one `TfExperiment`.
 */
TfStatus tf_experiment_default(struct TfExperiment *out_experiment);

/*
 Builds a graph from parallel arrays of edge events `(t[i], u[i], v[i])`.
 Self-loops are dropped and duplicates merged.

 # Safety
 `name` must be a NUL-terminated string; `t`, `u` and `v` must each hold
 `num_edges` elements; `out_dtdg` must be writable.
 */
TfStatus tf_dtdg_from_edges(const char *name,
                            uint32_t num_nodes,
                            uint32_t num_snapshots,
                            const uint32_t *t,
                            const uint32_t *u,
                            const uint32_t *v,
                            size_t num_edges,
                            struct TfDtdg **out_dtdg);

/*
 Loads a dataset cache written by `tempofield ingest`.

 # Safety
 `path` must be a NUL-terminated string; `out_dtdg` must be writable.
 */
TfStatus tf_dtdg_load(const char *path, struct TfDtdg **out_dtdg);

/*
 The built-in period-2 alternating graph (20 nodes, 40 snapshots).

 # Safety
 `out_dtdg` must be writable.
 */
TfStatus tf_dtdg_period_two(struct TfDtdg **out_dtdg);

/*
 Node, snapshot and total link counts. Any out-pointer may be NULL.

 # Safety
 `dtdg` must be a live handle; non-NULL out-pointers must be writable.
 */
TfStatus tf_dtdg_stats(const struct TfDtdg *dtdg,
                       uint32_t *out_nodes,
                       uint32_t *out_snapshots,
                       uint64_t *out_links);

/*
 Releases a graph. NULL is ignored.

 # Safety
 `dtdg` must be NULL or a handle not yet freed.
 */
void tf_dtdg_free(struct TfDtdg *dtdg);

/*
 A freshly initialized model, seeded by `seed`.

 # Safety
 `hyper` may be NULL for the default sizes; `out_model` must be writable.
 */
TfStatus tf_model_new(int32_t arch,
                      uint32_t num_nodes,
                      const struct TfHyper *hyper,
                      uint64_t seed,
                      struct TfModel **out_model);

/*
 Initializes and trains the model of one `(graph, arch, tau, seed_index)`
 unit, exactly as a sweep would. `out_final_loss` may be NULL; it receives
 NaN for EdgeBank, which has nothing to train.

 # Safety
 `dtdg` must be a live handle, `experiment` NULL (defaults) or valid,
 `out_model` writable.
 */
TfStatus tf_train_unit(const struct TfDtdg *dtdg,
                       int32_t arch,
                       uint32_t tau,
                       uint64_t seed_index,
                       const struct TfExperiment *experiment,
                       struct TfModel **out_model,
                       double *out_final_loss);

/*
 Rolling evaluation over the test range: mean AP over scored steps and
 the number of scored and skipped steps. Count pointers may be NULL.

 # Safety
 `model` and `dtdg` must be live handles, `experiment` NULL or valid,
 `out_mean_ap` writable.
 */
TfStatus tf_evaluate_unit(const struct TfModel *model,
                          const struct TfDtdg *dtdg,
                          uint32_t tau,
                          uint64_t seed_index,
                          const struct TfExperiment *experiment,
                          double *out_mean_ap,
                          uint32_t *out_scored,
                          uint32_t *out_skipped);

/*
 Edge probabilities for `n` node pairs from the window of `tau` snapshots
 ending at snapshot `t_end`.

 # Safety
 Handles must be live; `u`, `v` and `out_scores` must each hold `n`
 elements.
 */
TfStatus tf_model_score_pairs(const struct TfModel *model,
                              const struct TfDtdg *dtdg,
                              uint32_t t_end,
                              uint32_t tau,
                              const uint32_t *u,
                              const uint32_t *v,
                              size_t n,
                              double *out_scores);

/*
 Architecture code of a model.

 # Safety
 `model` must be a live handle; `out_arch` writable.
 */
TfStatus tf_model_arch(const struct TfModel *model, int32_t *out_arch);

/*
 Writes a model checkpoint.

 # Safety
 `model` must be a live handle; `path` a NUL-terminated string.
 */
TfStatus tf_model_save(const struct TfModel *model, const char *path);

/*
 Reads a model checkpoint.

 # Safety
 `path` must be a NUL-terminated string; `out_model` writable.
 */
TfStatus tf_model_load(const char *path, struct TfModel **out_model);

/*
 Releases a model. NULL is ignored.

 # Safety
 `model` must be NULL or a handle not yet freed.
 */
void tf_model_free(struct TfModel *model);

/*
 1 when `(u, v)` occurs in the window of `tau` snapshots ending at
 `t_end`, else 0.

 # Safety
 `dtdg` must be a live handle; `out_score` writable.
 */
TfStatus tf_edgebank_score(const struct TfDtdg *dtdg,
                           uint32_t t_end,
                           uint32_t tau,
                           uint32_t u,
                           uint32_t v,
                           uint8_t *out_score);

/*
 Average precision of `n` scores against 0/1 labels, ties averaged over
 their orderings.

 # Safety
 `scores` and `labels` must each hold `n` elements; `out_ap` writable.
 */
TfStatus tf_average_precision(const double *scores,
                              const uint8_t *labels,
                              size_t n,
                              double *out_ap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEMPOFIELD_H */
