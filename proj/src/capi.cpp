// C API of the shared library: thin handle/entry-point layer over the C++
// core. Every entry point catches, records the message thread-locally and
// maps the error kind onto a status code.

#include "cmest.h"

#include <cstring>
#include <new>
#include <string>

#include "calibration.hpp"
#include "config.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "scores.hpp"
#include "shiftsim.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

thread_local std::string g_last_error;

cmest_status map_kind(cmest::ErrorKind kind) {
  switch (kind) {
    case cmest::ErrorKind::invalid: return CMEST_ERR_INVALID;
    case cmest::ErrorKind::parse: return CMEST_ERR_PARSE;
    case cmest::ErrorKind::io: return CMEST_ERR_IO;
    case cmest::ErrorKind::unsupported: return CMEST_ERR_UNSUPPORTED;
  }
  return CMEST_ERR_INTERNAL;
}

template <typename Fn>
cmest_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CMEST_OK;
  } catch (const cmest::Error& e) {
    g_last_error = e.what();
    return map_kind(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CMEST_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CMEST_ERR_INTERNAL;
  }
}

cmest_status invalid_arg(const char* message) {
  g_last_error = message;
  return CMEST_ERR_INVALID;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct cmest_scoreset {
  cmest::ScoreSet set;
};
struct cmest_report {
  cmest::MetricReport report;
};
struct cmest_batch {
  std::vector<cmest::MethodOutcome> outcomes;
};
struct cmest_tempfit {
  cmest::TemperatureFit fit;
};
struct cmest_sweep {
  cmest::SweepResult result;
};

extern "C" {

const char* cmest_version(void) { return kVersion; }

const char* cmest_last_error(void) { return g_last_error.c_str(); }

void cmest_string_free(char* s) { delete[] s; }

/* -------- score sets -------------------------------------------------- */

cmest_status cmest_scoreset_load(const char* path, const char* format,
                                 double threshold, cmest_scoreset** out) {
  if (!path || !format || !out) return invalid_arg("null argument");
  return guarded([&] {
    cmest::ScoreFormat fmt;
    const std::string f = format;
    if (f == "csv")
      fmt = cmest::ScoreFormat::csv;
    else if (f == "jsonl")
      fmt = cmest::ScoreFormat::jsonl;
    else
      cmest::fail(cmest::ErrorKind::invalid,
                  "format must be 'csv' or 'jsonl', got '" + f + "'");
    *out = new cmest_scoreset{cmest::load_scores(path, fmt, threshold)};
  });
}

cmest_status cmest_scoreset_from_arrays(const double* scores,
                                        const int32_t* labels, size_t n,
                                        double threshold,
                                        cmest_scoreset** out) {
  if (!scores || !out) return invalid_arg("null argument");
  return guarded([&] {
    if (n == 0) cmest::fail(cmest::ErrorKind::invalid, "empty score array");
    if (!(threshold >= 0.0 && threshold <= 1.0))
      cmest::fail(cmest::ErrorKind::invalid, "threshold must be in [0,1]");
    cmest::ScoreSet set;
    set.threshold = threshold;
    set.records.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      if (!(scores[i] >= 0.0 && scores[i] <= 1.0))
        cmest::fail(cmest::ErrorKind::invalid,
                    "score at index " + std::to_string(i) + " outside [0,1]");
      cmest::ScoreRecord rec;
      rec.id = std::to_string(i);
      rec.raw_score = scores[i];
      if (labels && labels[i] >= 0) {
        if (labels[i] > 1)
          cmest::fail(cmest::ErrorKind::invalid,
                      "label at index " + std::to_string(i) + " must be 0/1/-1");
        rec.label = static_cast<int>(labels[i]);
      }
      set.records.push_back(std::move(rec));
    }
    *out = new cmest_scoreset{std::move(set)};
  });
}

cmest_status cmest_scoreset_save_csv(const cmest_scoreset* set,
                                     const char* path) {
  if (!set || !path) return invalid_arg("null argument");
  return guarded([&] { cmest::save_scores_csv(set->set, path); });
}

void cmest_scoreset_free(cmest_scoreset* set) { delete set; }

size_t cmest_scoreset_size(const cmest_scoreset* set) {
  return set ? set->set.size() : 0;
}

double cmest_scoreset_threshold(const cmest_scoreset* set) {
  return set ? set->set.threshold : 0.0;
}

int cmest_scoreset_labelled(const cmest_scoreset* set) {
  return set && set->set.labelled() ? 1 : 0;
}

/* -------- realized metrics --------------------------------------------- */

cmest_status cmest_realized_confusion(const cmest_scoreset* set,
                                      double out_cm[4]) {
  if (!set || !out_cm) return invalid_arg("null argument");
  return guarded([&] {
    const cmest::ConfusionMatrix cm = cmest::realized_confusion_matrix(set->set);
    out_cm[0] = cm.tp;
    out_cm[1] = cm.fp;
    out_cm[2] = cm.tn;
    out_cm[3] = cm.fn;
  });
}

cmest_status cmest_realized_report(const cmest_scoreset* set,
                                   cmest_report** out) {
  if (!set || !out) return invalid_arg("null argument");
  return guarded(
      [&] { *out = new cmest_report{cmest::realized_metrics(set->set)}; });
}

cmest_status cmest_root_brier_score(const cmest_scoreset* set, double* out) {
  if (!set || !out) return invalid_arg("null argument");
  return guarded([&] { *out = cmest::root_brier_score(set->set); });
}

cmest_status cmest_adaptive_calibration_error(const cmest_scoreset* set,
                                              int bins, double* out) {
  if (!set || !out) return invalid_arg("null argument");
  return guarded(
      [&] { *out = cmest::adaptive_calibration_error(set->set, bins); });
}

cmest_status cmest_realized_auc(const cmest_scoreset* set, const char* method,
                                double* out) {
  if (!set || !method || !out) return invalid_arg("null argument");
  return guarded([&] {
    const std::string m = method;
    cmest::AucMethod am;
    if (m == "rank_exact")
      am = cmest::AucMethod::rank_exact;
    else if (m == "quantile_100")
      am = cmest::AucMethod::quantile_100;
    else
      cmest::fail(cmest::ErrorKind::invalid,
                  "AUC method must be 'rank_exact' or 'quantile_100'");
    *out = cmest::realized_auc(set->set, am);
  });
}

/* -------- metric reports ----------------------------------------------- */

cmest_status cmest_report_value(const cmest_report* report, const char* metric,
                                double* value, int* state) {
  if (!report || !metric || !value || !state) return invalid_arg("null argument");
  return guarded([&] {
    const cmest::MetricValue& v =
        report->report.get(cmest::metric_from_name(metric));
    *value = v.value;
    switch (v.state) {
      case cmest::MetricValue::State::defined: *state = CMEST_METRIC_DEFINED; break;
      case cmest::MetricValue::State::undefined:
        *state = CMEST_METRIC_UNDEFINED;
        break;
      case cmest::MetricValue::State::unsupported:
        *state = CMEST_METRIC_UNSUPPORTED;
        break;
    }
  });
}

cmest_status cmest_report_to_csv(const cmest_report* report, char** out) {
  if (!report || !out) return invalid_arg("null argument");
  return guarded([&] {
    *out = dup_string(cmest::MetricReport::csv_header() + "\n" +
                      report->report.csv_row() + "\n");
  });
}

cmest_status cmest_report_to_json(const cmest_report* report, char** out) {
  if (!report || !out) return invalid_arg("null argument");
  return guarded([&] { *out = dup_string(report->report.to_json()); });
}

void cmest_report_free(cmest_report* report) { delete report; }

/* -------- label-free estimation ----------------------------------------- */

cmest_status cmest_estimate_all(const cmest_scoreset* val,
                                const cmest_scoreset* test,
                                const char* methods_csv, cmest_batch** out) {
  if (!val || !test || !methods_csv || !out) return invalid_arg("null argument");
  return guarded([&] {
    *out = new cmest_batch{
        cmest::estimate_all(cmest::parse_methods(methods_csv), val->set,
                            test->set)};
  });
}

size_t cmest_batch_size(const cmest_batch* batch) {
  return batch ? batch->outcomes.size() : 0;
}

const char* cmest_batch_method(const cmest_batch* batch, size_t i) {
  if (!batch || i >= batch->outcomes.size()) return "";
  return cmest::source_name(batch->outcomes[i].method);
}

int cmest_batch_error(const cmest_batch* batch, size_t i,
                      const char** message) {
  if (!batch || i >= batch->outcomes.size()) return 0;
  const cmest::MethodOutcome& mo = batch->outcomes[i];
  if (mo.ok()) return 0;
  if (message) *message = mo.error.c_str();
  return 1;
}

int cmest_batch_has_confusion(const cmest_batch* batch, size_t i) {
  if (!batch || i >= batch->outcomes.size()) return 0;
  const cmest::MethodOutcome& mo = batch->outcomes[i];
  return mo.ok() && mo.result->cm ? 1 : 0;
}

cmest_status cmest_batch_confusion(const cmest_batch* batch, size_t i,
                                   double out_cm[4]) {
  if (!batch || !out_cm) return invalid_arg("null argument");
  return guarded([&] {
    if (i >= batch->outcomes.size())
      cmest::fail(cmest::ErrorKind::invalid, "batch index out of range");
    const cmest::MethodOutcome& mo = batch->outcomes[i];
    if (!mo.ok()) cmest::fail(cmest::ErrorKind::invalid, mo.error);
    if (!mo.result->cm)
      cmest::fail(cmest::ErrorKind::unsupported,
                  std::string(cmest::source_name(mo.method)) +
                      " does not produce a confusion matrix");
    out_cm[0] = mo.result->cm->tp;
    out_cm[1] = mo.result->cm->fp;
    out_cm[2] = mo.result->cm->tn;
    out_cm[3] = mo.result->cm->fn;
  });
}

cmest_status cmest_batch_metric(const cmest_batch* batch, size_t i,
                                const char* metric, double* value, int* state,
                                int* clipped) {
  if (!batch || !metric || !value || !state || !clipped)
    return invalid_arg("null argument");
  return guarded([&] {
    if (i >= batch->outcomes.size())
      cmest::fail(cmest::ErrorKind::invalid, "batch index out of range");
    const cmest::MethodOutcome& mo = batch->outcomes[i];
    if (!mo.ok()) cmest::fail(cmest::ErrorKind::invalid, mo.error);
    const cmest::MetricValue& v =
        mo.result->metrics.get(cmest::metric_from_name(metric));
    *value = v.value;
    *clipped = v.clipped ? 1 : 0;
    switch (v.state) {
      case cmest::MetricValue::State::defined: *state = CMEST_METRIC_DEFINED; break;
      case cmest::MetricValue::State::undefined:
        *state = CMEST_METRIC_UNDEFINED;
        break;
      case cmest::MetricValue::State::unsupported:
        *state = CMEST_METRIC_UNSUPPORTED;
        break;
    }
  });
}

cmest_status cmest_batch_to_csv(const cmest_batch* batch, char** out) {
  if (!batch || !out) return invalid_arg("null argument");
  return guarded(
      [&] { *out = dup_string(cmest::estimates_to_csv(batch->outcomes)); });
}

cmest_status cmest_batch_to_json(const cmest_batch* batch, char** out) {
  if (!batch || !out) return invalid_arg("null argument");
  return guarded(
      [&] { *out = dup_string(cmest::estimates_to_json(batch->outcomes)); });
}

cmest_status cmest_batch_confusion_csv(const cmest_batch* batch, char** out) {
  if (!batch || !out) return invalid_arg("null argument");
  return guarded(
      [&] { *out = dup_string(cmest::confusions_to_csv(batch->outcomes)); });
}

cmest_status cmest_batch_mae_csv(const cmest_batch* batch,
                                 const cmest_scoreset* labelled_test,
                                 char** out) {
  if (!batch || !labelled_test || !out) return invalid_arg("null argument");
  return guarded([&] {
    const cmest::MetricReport realized =
        cmest::realized_metrics(labelled_test->set);
    std::vector<cmest::MaePair> pairs;
    for (const cmest::MethodOutcome& mo : batch->outcomes) {
      if (!mo.ok()) continue;
      pairs.push_back({0.0, mo.method, realized, mo.result->metrics});
    }
    *out = dup_string(cmest::mae_rows_to_csv(
        cmest::mae_report(pairs, cmest::MaeGroupBy::method)));
  });
}

void cmest_batch_free(cmest_batch* batch) { delete batch; }

/* -------- temperature calibration --------------------------------------- */

cmest_status cmest_fit_temperature(const cmest_scoreset* val, const char* mode,
                                   cmest_tempfit** out) {
  if (!val || !mode || !out) return invalid_arg("null argument");
  return guarded([&] {
    *out = new cmest_tempfit{cmest::fit_temperature(
        val->set, cmest::calibration_mode_from_name(mode))};
  });
}

cmest_status cmest_apply_temperature(const cmest_scoreset* set,
                                     const cmest_tempfit* fit,
                                     cmest_scoreset** out) {
  if (!set || !fit || !out) return invalid_arg("null argument");
  return guarded([&] {
    *out = new cmest_scoreset{cmest::apply_temperature(set->set, fit->fit)};
  });
}

cmest_status cmest_tempfit_values(const cmest_tempfit* fit, int* classwise,
                                  double* t_pos, double* t_neg,
                                  double* nll_before, double* nll_after) {
  if (!fit) return invalid_arg("null argument");
  return guarded([&] {
    if (classwise)
      *classwise = fit->fit.mode == cmest::CalibrationMode::classwise ? 1 : 0;
    if (t_pos) *t_pos = fit->fit.t_pos;
    if (t_neg) *t_neg = fit->fit.t_neg;
    if (nll_before) *nll_before = fit->fit.nll_before;
    if (nll_after) *nll_after = fit->fit.nll_after;
  });
}

cmest_status cmest_tempfit_save(const cmest_tempfit* fit, const char* path) {
  if (!fit || !path) return invalid_arg("null argument");
  return guarded([&] { fit->fit.save(path); });
}

cmest_status cmest_tempfit_load(const char* path, cmest_tempfit** out) {
  if (!path || !out) return invalid_arg("null argument");
  return guarded(
      [&] { *out = new cmest_tempfit{cmest::TemperatureFit::load(path)}; });
}

void cmest_tempfit_free(cmest_tempfit* fit) { delete fit; }

/* -------- synthetic generation and sweeps -------------------------------- */

uint64_t cmest_derive_seed(uint64_t master, uint64_t a, uint64_t b) {
  return cmest::derive_seed(master, a, b);
}

cmest_status cmest_generate(const char* config_text, cmest_scoreset** out) {
  if (!config_text || !out) return invalid_arg("null argument");
  return guarded([&] {
    const cmest::ConfigMap cfg =
        cmest::parse_config_text(config_text, "generator config");
    *out = new cmest_scoreset{
        cmest::generate_synthetic(cmest::GeneratorSpec::from_config(cfg))};
  });
}

cmest_status cmest_run_sweep(const char* config_text, const cmest_scoreset* val,
                             const cmest_scoreset* pool_a,
                             const cmest_scoreset* pool_b, int jobs,
                             cmest_sweep** out) {
  if (!config_text || !val || !pool_a || !out) return invalid_arg("null argument");
  return guarded([&] {
    const cmest::SweepConfig sweep_cfg = cmest::SweepConfig::from_config(
        cmest::parse_config_text(config_text, "sweep config"));
    *out = new cmest_sweep{cmest::run_sweep(
        sweep_cfg, val->set, pool_a->set, pool_b ? &pool_b->set : nullptr,
        jobs)};
  });
}

cmest_status cmest_sweep_to_csv(const cmest_sweep* sweep, char** out) {
  if (!sweep || !out) return invalid_arg("null argument");
  return guarded([&] { *out = dup_string(sweep->result.to_csv()); });
}

cmest_status cmest_sweep_summary_csv(const cmest_sweep* sweep, char** out) {
  if (!sweep || !out) return invalid_arg("null argument");
  return guarded([&] { *out = dup_string(sweep->result.summary_csv()); });
}

void cmest_sweep_free(cmest_sweep* sweep) { delete sweep; }

}  // extern "C"
