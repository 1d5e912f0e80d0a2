#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace cmest {

const char* source_name(Source s) {
  switch (s) {
    case Source::realized: return "realized";
    case Source::cbpe: return "cbpe";
    case Source::cm_atc: return "cm_atc";
    case Source::cm_doc: return "cm_doc";
    case Source::naive_atc: return "naive_atc";
    case Source::naive_doc: return "naive_doc";
  }
  return "?";
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::accuracy: return "accuracy";
    case Metric::balanced_accuracy: return "balanced_accuracy";
    case Metric::recall: return "recall";
    case Metric::specificity: return "specificity";
    case Metric::ppv: return "ppv";
    case Metric::npv: return "npv";
    case Metric::f1: return "f1";
    case Metric::auc: return "auc";
  }
  return "?";
}

Metric metric_from_name(const std::string& name) {
  for (Metric m : kAllMetrics)
    if (name == metric_name(m)) return m;
  fail(ErrorKind::invalid, "unknown metric '" + name + "'");
}

std::string metric_value_text(const MetricValue& v) {
  switch (v.state) {
    case MetricValue::State::defined: return fmt_double(v.value);
    case MetricValue::State::undefined: return "undefined";
    case MetricValue::State::unsupported: return "unsupported";
  }
  return "?";
}

std::string MetricReport::csv_header() {
  std::string out;
  for (Metric m : kAllMetrics) {
    if (!out.empty()) out += ',';
    out += metric_name(m);
  }
  return out;
}

std::string MetricReport::csv_row() const {
  std::string out;
  for (Metric m : kAllMetrics) {
    if (!out.empty()) out += ',';
    out += metric_value_text(get(m));
  }
  return out;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json obj;
  for (Metric m : kAllMetrics) {
    const MetricValue& v = get(m);
    if (v.defined())
      obj[metric_name(m)] = v.value;
    else
      obj[metric_name(m)] = metric_value_text(v);
  }
  return obj.dump();
}

ConfusionMatrix realized_confusion_matrix(const ScoreSet& set) {
  set.require_labelled("realized confusion matrix");
  ConfusionMatrix cm;
  cm.source = Source::realized;
  for (const auto& r : set.records) {
    const bool pred_pos = r.raw_score >= set.threshold;
    const bool is_pos = *r.label == 1;
    if (pred_pos)
      (is_pos ? cm.tp : cm.fp) += 1.0;
    else
      (is_pos ? cm.fn : cm.tn) += 1.0;
  }
  return cm;
}

namespace {

MetricValue ratio(double num, double den) {
  if (den == 0.0) return MetricValue::undef();
  return MetricValue::of(num / den);
}

}  // namespace

MetricReport counting_metrics(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.fp < 0 || cm.tn < 0 || cm.fn < 0)
    fail(ErrorKind::invalid, "confusion matrix entries must be >= 0");
  MetricReport rep;
  rep.set(Metric::accuracy, ratio(cm.tp + cm.tn, cm.total()));
  const MetricValue recall = ratio(cm.tp, cm.tp + cm.fn);
  const MetricValue specificity = ratio(cm.tn, cm.tn + cm.fp);
  rep.set(Metric::recall, recall);
  rep.set(Metric::specificity, specificity);
  rep.set(Metric::balanced_accuracy,
          recall.defined() && specificity.defined()
              ? MetricValue::of((recall.value + specificity.value) / 2.0)
              : MetricValue::undef());
  const MetricValue ppv = ratio(cm.tp, cm.tp + cm.fp);
  rep.set(Metric::ppv, ppv);
  rep.set(Metric::npv, ratio(cm.tn, cm.tn + cm.fn));
  rep.set(Metric::f1, ppv.defined() && recall.defined()
                          ? ratio(2.0 * ppv.value * recall.value,
                                  ppv.value + recall.value)
                          : MetricValue::undef());
  rep.set(Metric::auc, MetricValue::unsup());
  return rep;
}

namespace {

struct LabelledScores {
  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

LabelledScores collect_labelled(const ScoreSet& set, const char* what) {
  set.require_labelled(what);
  LabelledScores out;
  out.scores.reserve(set.size());
  out.labels.reserve(set.size());
  for (const auto& r : set.records) {
    out.scores.push_back(r.raw_score);
    out.labels.push_back(*r.label);
    if (*r.label == 1)
      ++out.n_pos;
    else
      ++out.n_neg;
  }
  return out;
}

double rank_auc(const LabelledScores& data) {
  const std::size_t n = data.scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return data.scores[a] < data.scores[b];
  });
  // Midranks over tie groups.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && data.scores[idx[j + 1]] == data.scores[idx[i]]) ++j;
    const double rank = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (data.labels[idx[k]] == 1) pos_rank_sum += rank;
    i = j + 1;
  }
  const auto p = static_cast<double>(data.n_pos);
  const auto q = static_cast<double>(data.n_neg);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

// Trapezoidal area of (fpr, tpr) points; sorts by fpr with tpr breaking
// ties; callers append the (0,0) and (1,1) anchors themselves.
double trapezoid_roc(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) *
            (pts[i].second + pts[i - 1].second) / 2.0;
  }
  return area;
}

double quantile_auc(const LabelledScores& data) {
  std::vector<double> sorted = data.scores;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> pts;
  pts.reserve(102);
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  for (int j = 1; j <= 100; ++j) {
    const double theta =
        sorted_quantile(sorted, static_cast<double>(j) / 101.0);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < data.scores.size(); ++i) {
      if (data.scores[i] >= theta) {
        if (data.labels[i] == 1)
          ++tp;
        else
          ++fp;
      }
    }
    pts.emplace_back(static_cast<double>(fp) / static_cast<double>(data.n_neg),
                     static_cast<double>(tp) / static_cast<double>(data.n_pos));
  }
  return trapezoid_roc(std::move(pts));
}

}  // namespace

double realized_auc(const ScoreSet& set, AucMethod method) {
  const auto data = collect_labelled(set, "realized AUC");
  if (data.n_pos == 0 || data.n_neg == 0)
    fail(ErrorKind::invalid, "AUC undefined: set contains a single class");
  return method == AucMethod::rank_exact ? rank_auc(data) : quantile_auc(data);
}

MetricReport realized_metrics(const ScoreSet& set) {
  MetricReport rep = counting_metrics(realized_confusion_matrix(set));
  const auto data = collect_labelled(set, "realized metrics");
  rep.set(Metric::auc, data.n_pos == 0 || data.n_neg == 0
                           ? MetricValue::undef()
                           : MetricValue::of(rank_auc(data)));
  return rep;
}

double root_brier_score(const ScoreSet& set) {
  set.require_labelled("root Brier score");
  double sum = 0.0;
  for (const auto& r : set.records) {
    const double d = r.raw_score - static_cast<double>(*r.label);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(set.size()));
}

double adaptive_calibration_error(const ScoreSet& set, int bins) {
  set.require_labelled("adaptive calibration error");
  if (bins < 1) fail(ErrorKind::invalid, "ACE needs bins >= 1");
  const std::size_t n = set.size();
  if (n < static_cast<std::size_t>(bins))
    fail(ErrorKind::invalid, "ACE needs at least as many records as bins (" +
                                 std::to_string(n) + " < " +
                                 std::to_string(bins) + ")");
  // Sort by (score, label) so the binning depends only on the multiset of
  // pairs, not on input order.
  std::vector<std::pair<double, int>> pairs;
  pairs.reserve(n);
  for (const auto& r : set.records) pairs.emplace_back(r.raw_score, *r.label);
  std::sort(pairs.begin(), pairs.end());

  const std::size_t base = n / static_cast<std::size_t>(bins);
  const std::size_t extra = n % static_cast<std::size_t>(bins);
  double total = 0.0;
  std::size_t at = 0;
  for (int b = 0; b < bins; ++b) {
    const std::size_t count =
        base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
    double score_sum = 0.0;
    double label_sum = 0.0;
    for (std::size_t k = 0; k < count; ++k, ++at) {
      score_sum += pairs[at].first;
      label_sum += static_cast<double>(pairs[at].second);
    }
    total += std::abs(score_sum - label_sum) / static_cast<double>(count);
  }
  return total / static_cast<double>(bins);
}

}  // namespace cmest
