/*
 * cmest - label-free confusion-matrix and metric estimation for binary
 * classifiers, plus controlled distribution-shift benchmarking.
 *
 * C API of the shared library. All objects are opaque handles created and
 * released through these functions; every fallible call returns a
 * cmest_status and leaves a thread-local message readable through
 * cmest_last_error(). Strings returned through char** out-parameters are
 * heap-allocated and must be released with cmest_string_free().
 */
#ifndef CMEST_H
#define CMEST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CMEST_API __declspec(dllexport)
#else
#define CMEST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cmest_status {
  CMEST_OK = 0,
  CMEST_ERR_INVALID = 1,     /* bad argument / violated precondition */
  CMEST_ERR_PARSE = 2,       /* malformed file or config */
  CMEST_ERR_IO = 3,          /* filesystem failure */
  CMEST_ERR_UNSUPPORTED = 4, /* combination not offered */
  CMEST_ERR_INTERNAL = 5
} cmest_status;

/* States of a metric cell. */
#define CMEST_METRIC_DEFINED 0
#define CMEST_METRIC_UNDEFINED 1   /* zero denominator; never a silent 0 */
#define CMEST_METRIC_UNSUPPORTED 2 /* method does not offer this metric */

typedef struct cmest_scoreset cmest_scoreset;
typedef struct cmest_report cmest_report;  /* metric name -> value map */
typedef struct cmest_batch cmest_batch;    /* one result per method */
typedef struct cmest_tempfit cmest_tempfit;
typedef struct cmest_sweep cmest_sweep;

CMEST_API const char* cmest_version(void);
/* Message of the last failing call on this thread ("" if none). */
CMEST_API const char* cmest_last_error(void);
CMEST_API void cmest_string_free(char* s);

/* -------- score sets -------------------------------------------------- */

/* format: "csv" or "jsonl". threshold is the decision threshold in [0,1]. */
CMEST_API cmest_status cmest_scoreset_load(const char* path, const char* format,
                                           double threshold,
                                           cmest_scoreset** out);
/* labels: NULL for an unlabelled set, otherwise one of {0,1,-1} per record
 * with -1 meaning "no label for this record". */
CMEST_API cmest_status cmest_scoreset_from_arrays(const double* scores,
                                                  const int32_t* labels,
                                                  size_t n, double threshold,
                                                  cmest_scoreset** out);
CMEST_API cmest_status cmest_scoreset_save_csv(const cmest_scoreset* set,
                                               const char* path);
CMEST_API void cmest_scoreset_free(cmest_scoreset* set);
CMEST_API size_t cmest_scoreset_size(const cmest_scoreset* set);
CMEST_API double cmest_scoreset_threshold(const cmest_scoreset* set);
CMEST_API int cmest_scoreset_labelled(const cmest_scoreset* set);

/* -------- realized metrics (labelled sets) ---------------------------- */

/* out_cm receives tp, fp, tn, fn. */
CMEST_API cmest_status cmest_realized_confusion(const cmest_scoreset* set,
                                                double out_cm[4]);
/* Counting metrics plus rank-exact AUC. */
CMEST_API cmest_status cmest_realized_report(const cmest_scoreset* set,
                                             cmest_report** out);
CMEST_API cmest_status cmest_root_brier_score(const cmest_scoreset* set,
                                              double* out);
CMEST_API cmest_status cmest_adaptive_calibration_error(
    const cmest_scoreset* set, int bins, double* out);
/* method: "rank_exact" or "quantile_100". */
CMEST_API cmest_status cmest_realized_auc(const cmest_scoreset* set,
                                          const char* method, double* out);

/* -------- metric reports ---------------------------------------------- */

/* metric: accuracy, balanced_accuracy, recall, specificity, ppv, npv, f1,
 * auc. state receives one of the CMEST_METRIC_* constants. */
CMEST_API cmest_status cmest_report_value(const cmest_report* report,
                                          const char* metric, double* value,
                                          int* state);
/* Flat header+row CSV; undefined cells serialise as `undefined`. */
CMEST_API cmest_status cmest_report_to_csv(const cmest_report* report,
                                           char** out);
CMEST_API cmest_status cmest_report_to_json(const cmest_report* report,
                                            char** out);
CMEST_API void cmest_report_free(cmest_report* report);

/* -------- label-free estimation --------------------------------------- */

/* methods_csv: comma-separated subset of
 *   cbpe, naive_atc (alias atc), cm_atc, naive_doc (alias doc), cm_doc.
 * The validation set must be fully labelled. Per-method failures are
 * recorded in the batch rather than failing the call. */
CMEST_API cmest_status cmest_estimate_all(const cmest_scoreset* val,
                                          const cmest_scoreset* test,
                                          const char* methods_csv,
                                          cmest_batch** out);
CMEST_API size_t cmest_batch_size(const cmest_batch* batch);
CMEST_API const char* cmest_batch_method(const cmest_batch* batch, size_t i);
/* Returns 1 and writes the message if method i failed, else 0. */
CMEST_API int cmest_batch_error(const cmest_batch* batch, size_t i,
                                const char** message);
/* Confusion-matrix estimate of method i (absent for naive baselines). */
CMEST_API int cmest_batch_has_confusion(const cmest_batch* batch, size_t i);
CMEST_API cmest_status cmest_batch_confusion(const cmest_batch* batch, size_t i,
                                             double out_cm[4]);
CMEST_API cmest_status cmest_batch_metric(const cmest_batch* batch, size_t i,
                                          const char* metric, double* value,
                                          int* state, int* clipped);
/* estimates.csv: method,metric,value,state,clipped rows. */
CMEST_API cmest_status cmest_batch_to_csv(const cmest_batch* batch, char** out);
CMEST_API cmest_status cmest_batch_to_json(const cmest_batch* batch, char** out);
/* confusion.csv: method,tp,fp,tn,fn rows. */
CMEST_API cmest_status cmest_batch_confusion_csv(const cmest_batch* batch,
                                                 char** out);
/* mae.csv against a labelled test set: group,metric,mae,pairs,undefined. */
CMEST_API cmest_status cmest_batch_mae_csv(const cmest_batch* batch,
                                           const cmest_scoreset* labelled_test,
                                           char** out);
CMEST_API void cmest_batch_free(cmest_batch* batch);

/* -------- temperature calibration ------------------------------------- */

/* mode: "ts"/"global" or "csts"/"classwise". */
CMEST_API cmest_status cmest_fit_temperature(const cmest_scoreset* val,
                                             const char* mode,
                                             cmest_tempfit** out);
CMEST_API cmest_status cmest_apply_temperature(const cmest_scoreset* set,
                                               const cmest_tempfit* fit,
                                               cmest_scoreset** out);
/* classwise receives 0/1; in global mode t_pos == t_neg. */
CMEST_API cmest_status cmest_tempfit_values(const cmest_tempfit* fit,
                                            int* classwise, double* t_pos,
                                            double* t_neg, double* nll_before,
                                            double* nll_after);
CMEST_API cmest_status cmest_tempfit_save(const cmest_tempfit* fit,
                                          const char* path);
CMEST_API cmest_status cmest_tempfit_load(const char* path,
                                          cmest_tempfit** out);
CMEST_API void cmest_tempfit_free(cmest_tempfit* fit);

/* -------- synthetic generation and sweeps ------------------------------ */

/* The seed derivation used for sweep cells, exposed so callers can give
 * related runs (validation set, pools) independent deterministic streams. */
CMEST_API uint64_t cmest_derive_seed(uint64_t master, uint64_t a, uint64_t b);

/* config_text: key=value lines (see README for the key set). */
CMEST_API cmest_status cmest_generate(const char* config_text,
                                      cmest_scoreset** out);
/* pool_b is the minority pool; pass NULL for prevalence sweeps. jobs is
 * the worker count; any value produces bit-identical results. */
CMEST_API cmest_status cmest_run_sweep(const char* config_text,
                                       const cmest_scoreset* val,
                                       const cmest_scoreset* pool_a,
                                       const cmest_scoreset* pool_b, int jobs,
                                       cmest_sweep** out);
CMEST_API cmest_status cmest_sweep_to_csv(const cmest_sweep* sweep, char** out);
CMEST_API cmest_status cmest_sweep_summary_csv(const cmest_sweep* sweep,
                                               char** out);
CMEST_API void cmest_sweep_free(cmest_sweep* sweep);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CMEST_H */
