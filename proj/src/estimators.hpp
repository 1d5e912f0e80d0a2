#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metrics.hpp"
#include "scores.hpp"

namespace cmest {

enum class Side { global, positive, negative };

// Threshold learned on a collection of predicted-class confidences so that
// the fraction of values strictly above it matches `target`. value == -1
// is the sentinel for "everything passes" (target 1.0).
struct AtcThreshold {
  double value = -1.0;
  Side side = Side::global;
  double target = 0.0;
  double achieved = 0.0;  // fraction above on the learning set
  std::size_t ties = 0;   // learning values equal to `value`
};

// Confidence-gap offset used by the difference-of-confidences family.
struct DocOffset {
  double delta = 0.0;
  Side side = Side::global;
  double base_metric = 0.0;
};

// One estimator's output: an optional confusion-matrix estimate (absent
// for the naive baselines, which estimate each metric directly) and the
// per-metric report. When the matrix is present, the counting metrics are
// exactly counting_metrics(cm).
struct EstimationResult {
  Source method = Source::cbpe;
  std::optional<ConfusionMatrix> cm;
  MetricReport metrics;
};

// estimate_all aggregates per-method failures instead of failing fast.
struct MethodOutcome {
  Source method = Source::cbpe;
  std::optional<EstimationResult> result;
  std::string error;

  bool ok() const { return result.has_value(); }
};

// Mean predicted-class confidence over both prediction sides pooled.
double cbpe_accuracy(const PredictionSplit& test_split);

struct PvEstimate {
  MetricValue ppv;
  MetricValue npv;
};

// Per-side mean confidences; an empty side yields an undefined estimate
// (the confusion matrix then gets zero entries from the zero count).
PvEstimate cbpe_pv(const PredictionSplit& test_split);

// Realized PPV/NPV of a labelled split, as integer-count ratios.
PvEstimate realized_pv(const PredictionSplit& split);

// Confusion matrix point estimates: tp = n_pos * ppv, fp = n_pos - tp,
// tn = n_neg * npv, fn = n_neg - tn. Undefined estimates are only legal
// alongside a zero count.
ConfusionMatrix cm_from_pv(std::size_t n_pos, std::size_t n_neg,
                           const PvEstimate& pv, Source source);

AtcThreshold learn_atc_threshold(std::span<const double> confidences,
                                 double target, Side side = Side::global);

// Fraction of values strictly above the learned threshold.
double atc_estimate(std::span<const double> confidences,
                    const AtcThreshold& th);

// Per-side threshold estimator: thresholds learned on the validation
// prediction sides against realized validation PPV/NPV, applied to the
// test sides, then assembled into a confusion matrix.
EstimationResult cm_atc(const PredictionSplit& val_split,
                        const PredictionSplit& test_split);

// base - (mean(val) - mean(test)), clipped to [0,1]; flag reports whether
// clipping fired.
std::pair<double, bool> doc_estimate(double base_metric,
                                     std::span<const double> val_confidences,
                                     std::span<const double> test_confidences);

// Per-side confidence-gap estimator for PPV/NPV, assembled into a
// confusion matrix.
EstimationResult cm_doc(const PredictionSplit& val_split,
                        const PredictionSplit& test_split);

enum class NaiveMethod { atc, doc };

// Original single-threshold / single-offset estimators with accuracy
// replaced by an arbitrary counting metric. Returns the estimate and a
// clipped flag (always false for atc).
std::pair<double, bool> naive_estimate(NaiveMethod method, Metric metric,
                                       const ScoreSet& val,
                                       const ScoreSet& test);

// Multi-threshold AUC estimate: evaluates the method's confusion-matrix
// estimate at the 100 quantile thresholds j/101 of the test raw scores,
// integrates the resulting ROC curve, clips to [0,1]. Degenerate
// thresholds are skipped; fewer than 2 usable points is an error.
// Supported methods: cbpe, cm_atc, cm_doc.
std::pair<double, bool> estimate_auc(Source method, const ScoreSet& val,
                                     const ScoreSet& test);

// Runs every requested method; validation must be fully labelled. AUC is
// filled in for the methods that support it and flagged unsupported for
// the naive baselines. Per-method errors are captured, not thrown.
std::vector<MethodOutcome> estimate_all(const std::vector<Source>& methods,
                                        const ScoreSet& val,
                                        const ScoreSet& test);

// Method-tag helpers. Accepts the aliases "atc" and "doc" for the naive
// baselines.
Source method_from_name(const std::string& name);
std::vector<Source> parse_methods(const std::string& comma_separated);
inline constexpr const char* kDefaultMethods =
    "cbpe,naive_atc,cm_atc,naive_doc,cm_doc";

// estimates.csv body: one row per method x metric, flags as explicit
// columns. Failed methods serialise with state `error`.
std::string estimates_to_csv(const std::vector<MethodOutcome>& outcomes);
std::string estimates_to_json(const std::vector<MethodOutcome>& outcomes);
// confusion.csv body: one row per method that produced a matrix estimate.
std::string confusions_to_csv(const std::vector<MethodOutcome>& outcomes);

}  // namespace cmest
