#pragma once

#include <array>
#include <string>

#include "scores.hpp"

namespace cmest {

enum class Source {
  realized,
  cbpe,
  cm_atc,
  cm_doc,
  naive_atc,
  naive_doc,
};

const char* source_name(Source s);

// Confusion matrix with real-valued entries: integer counts when realized,
// fractional when estimated. By construction tp + fp and tn + fn equal the
// positive and negative prediction counts of the originating split.
struct ConfusionMatrix {
  double tp = 0.0;
  double fp = 0.0;
  double tn = 0.0;
  double fn = 0.0;
  Source source = Source::realized;

  double total() const { return tp + fp + tn + fn; }
};

enum class Metric : int {
  accuracy = 0,
  balanced_accuracy,
  recall,
  specificity,
  ppv,
  npv,
  f1,
  auc,
};

inline constexpr int kMetricCount = 8;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics = {
    Metric::accuracy, Metric::balanced_accuracy, Metric::recall,
    Metric::specificity, Metric::ppv, Metric::npv, Metric::f1, Metric::auc};

// The counting metrics, i.e. everything derivable from a confusion matrix
// at a fixed threshold (all metrics except AUC).
inline constexpr std::array<Metric, 7> kCountingMetrics = {
    Metric::accuracy, Metric::balanced_accuracy, Metric::recall,
    Metric::specificity, Metric::ppv, Metric::npv, Metric::f1};

const char* metric_name(Metric m);
Metric metric_from_name(const std::string& name);

// A metric cell is either a defined value in [0,1], undefined (a zero
// denominator somewhere), or unsupported (the producing method does not
// offer this metric). Undefined is a value state, never a silent zero.
struct MetricValue {
  enum class State { defined, undefined, unsupported };
  double value = 0.0;
  State state = State::unsupported;
  bool clipped = false;

  bool defined() const { return state == State::defined; }

  static MetricValue of(double v) { return {v, State::defined, false}; }
  static MetricValue of_clipped(double v, bool clipped) {
    return {v, State::defined, clipped};
  }
  static MetricValue undef() { return {0.0, State::undefined, false}; }
  static MetricValue unsup() { return {0.0, State::unsupported, false}; }
};

// Named metric -> value map with a fixed column order.
struct MetricReport {
  std::array<MetricValue, kMetricCount> values{};

  const MetricValue& get(Metric m) const {
    return values[static_cast<int>(m)];
  }
  void set(Metric m, MetricValue v) { values[static_cast<int>(m)] = v; }

  // Flat CSV row; undefined cells serialise as the literal `undefined`,
  // unsupported ones as `unsupported`.
  static std::string csv_header();
  std::string csv_row() const;
  std::string to_json() const;
};

// Formats a cell the way reports serialise it.
std::string metric_value_text(const MetricValue& v);

// Integer-count confusion matrix of a fully labelled set at its threshold.
ConfusionMatrix realized_confusion_matrix(const ScoreSet& set);

// All counting metrics of a confusion matrix. Zero-denominator cells come
// back undefined; the AUC slot is left unsupported (it is not a counting
// metric).
MetricReport counting_metrics(const ConfusionMatrix& cm);

enum class AucMethod { rank_exact, quantile_100 };

// rank_exact is the Mann-Whitney statistic with ties counted half;
// quantile_100 integrates the ROC curve evaluated at the 100 score
// quantiles j/101, with (0,0) and (1,1) appended. Requires both classes.
double realized_auc(const ScoreSet& set, AucMethod method);

// Counting metrics plus rank-exact AUC (undefined for single-class sets).
MetricReport realized_metrics(const ScoreSet& set);

// sqrt(mean (raw_score - label)^2).
double root_brier_score(const ScoreSet& set);

// Mean |mean score - positive fraction| over `bins` equal-frequency bins
// of the raw score; surplus records go to the lowest bins.
double adaptive_calibration_error(const ScoreSet& set, int bins);

inline constexpr int kDefaultAceBins = 15;

}  // namespace cmest
