#include "estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace cmest {

namespace {

const char* side_name(Side s) {
  switch (s) {
    case Side::global: return "global";
    case Side::positive: return "positive";
    case Side::negative: return "negative";
  }
  return "?";
}

void require_split_labels(const PredictionSplit& split, const char* what) {
  if (split.labels_pos.size() != split.positives.size() ||
      split.labels_neg.size() != split.negatives.size())
    fail(ErrorKind::invalid,
         std::string(what) + ": validation split carries no labels");
}

}  // namespace

double cbpe_accuracy(const PredictionSplit& test_split) {
  std::vector<double> pooled;
  pooled.reserve(test_split.n_pos() + test_split.n_neg());
  pooled.insert(pooled.end(), test_split.positives.begin(),
                test_split.positives.end());
  pooled.insert(pooled.end(), test_split.negatives.begin(),
                test_split.negatives.end());
  if (pooled.empty()) fail(ErrorKind::invalid, "cbpe_accuracy: empty split");
  return stable_mean(pooled);
}

PvEstimate cbpe_pv(const PredictionSplit& test_split) {
  PvEstimate pv;
  pv.ppv = test_split.positives.empty()
               ? MetricValue::undef()
               : MetricValue::of(stable_mean(test_split.positives));
  pv.npv = test_split.negatives.empty()
               ? MetricValue::undef()
               : MetricValue::of(stable_mean(test_split.negatives));
  return pv;
}

PvEstimate realized_pv(const PredictionSplit& split) {
  require_split_labels(split, "realized_pv");
  PvEstimate pv;
  if (split.n_pos() > 0) {
    std::size_t tp = 0;
    for (int y : split.labels_pos) tp += static_cast<std::size_t>(y);
    pv.ppv = MetricValue::of(static_cast<double>(tp) /
                             static_cast<double>(split.n_pos()));
  } else {
    pv.ppv = MetricValue::undef();
  }
  if (split.n_neg() > 0) {
    std::size_t tn = 0;
    for (int y : split.labels_neg) tn += static_cast<std::size_t>(1 - y);
    pv.npv = MetricValue::of(static_cast<double>(tn) /
                             static_cast<double>(split.n_neg()));
  } else {
    pv.npv = MetricValue::undef();
  }
  return pv;
}

ConfusionMatrix cm_from_pv(std::size_t n_pos, std::size_t n_neg,
                           const PvEstimate& pv, Source source) {
  auto check = [](const MetricValue& v, std::size_t count, const char* name) {
    if (!v.defined()) {
      if (count > 0)
        fail(ErrorKind::invalid,
             std::string("cm_from_pv: ") + name +
                 " undefined with a non-zero prediction count");
      return;
    }
    if (!(v.value >= 0.0 && v.value <= 1.0))
      fail(ErrorKind::invalid, std::string("cm_from_pv: ") + name + " " +
                                   fmt_double(v.value) +
                                   " outside [0,1]; clip before assembling");
  };
  check(pv.ppv, n_pos, "ppv");
  check(pv.npv, n_neg, "npv");
  ConfusionMatrix cm;
  cm.source = source;
  cm.tp = n_pos > 0 ? static_cast<double>(n_pos) * pv.ppv.value : 0.0;
  cm.fp = static_cast<double>(n_pos) - cm.tp;
  cm.tn = n_neg > 0 ? static_cast<double>(n_neg) * pv.npv.value : 0.0;
  cm.fn = static_cast<double>(n_neg) - cm.tn;
  return cm;
}

AtcThreshold learn_atc_threshold(std::span<const double> confidences,
                                 double target, Side side) {
  if (confidences.empty())
    fail(ErrorKind::invalid, std::string("learn_atc_threshold: empty ") +
                                 side_name(side) + " learning set");
  if (!(target >= 0.0 && target <= 1.0))
    fail(ErrorKind::invalid,
         "learn_atc_threshold: target " + fmt_double(target) + " outside [0,1]");
  std::vector<double> sorted(confidences.begin(), confidences.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto k = std::llround(n * (1.0 - target));
  k = std::clamp<long long>(k, 0, static_cast<long long>(sorted.size()));

  AtcThreshold th;
  th.side = side;
  th.target = target;
  if (k == 0) {
    th.value = -1.0;  // sentinel: everything passes the strict comparison
    th.achieved = 1.0;
    th.ties = 0;
    return th;
  }
  th.value = sorted[static_cast<std::size_t>(k - 1)];
  auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), th.value);
  th.achieved = static_cast<double>(above) / n;
  auto eq = std::equal_range(sorted.begin(), sorted.end(), th.value);
  th.ties = static_cast<std::size_t>(eq.second - eq.first) - 1;
  return th;
}

double atc_estimate(std::span<const double> confidences,
                    const AtcThreshold& th) {
  if (confidences.empty())
    fail(ErrorKind::invalid, "atc_estimate: empty test collection");
  std::size_t above = 0;
  for (double v : confidences)
    if (v > th.value) ++above;
  return static_cast<double>(above) / static_cast<double>(confidences.size());
}

EstimationResult cm_atc(const PredictionSplit& val_split,
                        const PredictionSplit& test_split) {
  require_split_labels(val_split, "cm_atc");
  if (val_split.n_pos() == 0)
    fail(ErrorKind::invalid, "cm_atc: validation positive side empty");
  if (val_split.n_neg() == 0)
    fail(ErrorKind::invalid, "cm_atc: validation negative side empty");
  const PvEstimate val_pv = realized_pv(val_split);
  const AtcThreshold t_pos =
      learn_atc_threshold(val_split.positives, val_pv.ppv.value, Side::positive);
  const AtcThreshold t_neg =
      learn_atc_threshold(val_split.negatives, val_pv.npv.value, Side::negative);

  PvEstimate pv;
  pv.ppv = test_split.n_pos() > 0
               ? MetricValue::of(atc_estimate(test_split.positives, t_pos))
               : MetricValue::undef();
  pv.npv = test_split.n_neg() > 0
               ? MetricValue::of(atc_estimate(test_split.negatives, t_neg))
               : MetricValue::undef();

  EstimationResult res;
  res.method = Source::cm_atc;
  res.cm = cm_from_pv(test_split.n_pos(), test_split.n_neg(), pv, Source::cm_atc);
  res.metrics = counting_metrics(*res.cm);
  return res;
}

std::pair<double, bool> doc_estimate(double base_metric,
                                     std::span<const double> val_confidences,
                                     std::span<const double> test_confidences) {
  if (!(base_metric >= 0.0 && base_metric <= 1.0))
    fail(ErrorKind::invalid,
         "doc_estimate: base metric " + fmt_double(base_metric) + " outside [0,1]");
  if (val_confidences.empty())
    fail(ErrorKind::invalid, "doc_estimate: empty validation collection");
  if (test_confidences.empty())
    fail(ErrorKind::invalid, "doc_estimate: empty test collection");
  const double delta =
      stable_mean(val_confidences) - stable_mean(test_confidences);
  return clip01(base_metric - delta);
}

EstimationResult cm_doc(const PredictionSplit& val_split,
                        const PredictionSplit& test_split) {
  require_split_labels(val_split, "cm_doc");
  if (val_split.n_pos() == 0)
    fail(ErrorKind::invalid, "cm_doc: validation positive side empty");
  if (val_split.n_neg() == 0)
    fail(ErrorKind::invalid, "cm_doc: validation negative side empty");
  if (test_split.n_pos() == 0)
    fail(ErrorKind::invalid, "cm_doc: test positive side empty");
  if (test_split.n_neg() == 0)
    fail(ErrorKind::invalid, "cm_doc: test negative side empty");
  const PvEstimate val_pv = realized_pv(val_split);
  const auto [ppv, ppv_clipped] =
      doc_estimate(val_pv.ppv.value, val_split.positives, test_split.positives);
  const auto [npv, npv_clipped] =
      doc_estimate(val_pv.npv.value, val_split.negatives, test_split.negatives);

  PvEstimate pv;
  pv.ppv = MetricValue::of_clipped(ppv, ppv_clipped);
  pv.npv = MetricValue::of_clipped(npv, npv_clipped);

  EstimationResult res;
  res.method = Source::cm_doc;
  res.cm = cm_from_pv(test_split.n_pos(), test_split.n_neg(), pv, Source::cm_doc);
  res.metrics = counting_metrics(*res.cm);
  auto flag = [&](Metric m, bool clipped) {
    MetricValue v = res.metrics.get(m);
    v.clipped = clipped;
    res.metrics.set(m, v);
  };
  flag(Metric::ppv, ppv_clipped);
  flag(Metric::npv, npv_clipped);
  return res;
}

std::pair<double, bool> naive_estimate(NaiveMethod method, Metric metric,
                                       const ScoreSet& val,
                                       const ScoreSet& test) {
  if (metric == Metric::auc)
    fail(ErrorKind::unsupported,
         "naive baselines are defined for counting metrics only");
  if (test.empty()) fail(ErrorKind::invalid, "naive_estimate: empty test set");
  const MetricValue base =
      counting_metrics(realized_confusion_matrix(val)).get(metric);
  if (!base.defined())
    fail(ErrorKind::invalid, std::string("naive_estimate: validation ") +
                                 metric_name(metric) + " undefined");
  const std::vector<double> conf_val = predicted_confidences(val);
  const std::vector<double> conf_test = predicted_confidences(test);
  if (method == NaiveMethod::atc) {
    const AtcThreshold th = learn_atc_threshold(conf_val, base.value);
    return {atc_estimate(conf_test, th), false};
  }
  return doc_estimate(base.value, conf_val, conf_test);
}

// ---------------------------------------------------------------------------
// Multi-threshold AUC estimation.
//
// The 100-threshold loop re-splits both sets at every quantile. Doing that
// through split_predictions would sort the validation set 100 times, so the
// loop runs on a pre-sorted view instead: scores ascending, negative-side
// confidences (1 - score) descending, plus prefix sums for means and label
// counts. A cut index c at threshold theta puts [0,c) on the negative side
// and [c,n) on the positive side, which reproduces the raw_score >= theta
// partition exactly.

namespace {

struct RankedSet {
  std::vector<double> score;       // ascending
  std::vector<double> negconf;     // 1 - score[i], non-increasing
  std::vector<double> score_pre;   // score_pre[i] = sum score[0..i)
  std::vector<double> negconf_pre; // prefix sums of negconf
  std::vector<long long> label_pre;  // prefix sums of labels, empty if none
  std::size_t n = 0;

  static RankedSet build(const ScoreSet& set, bool with_labels) {
    RankedSet r;
    r.n = set.size();
    std::vector<std::size_t> idx(r.n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return set.records[a].raw_score < set.records[b].raw_score;
    });
    r.score.reserve(r.n);
    r.negconf.reserve(r.n);
    for (std::size_t i : idx) r.score.push_back(set.records[i].raw_score);
    for (double s : r.score) r.negconf.push_back(1.0 - s);
    r.score_pre.assign(r.n + 1, 0.0);
    r.negconf_pre.assign(r.n + 1, 0.0);
    for (std::size_t i = 0; i < r.n; ++i) {
      r.score_pre[i + 1] = r.score_pre[i] + r.score[i];
      r.negconf_pre[i + 1] = r.negconf_pre[i] + r.negconf[i];
    }
    if (with_labels) {
      r.label_pre.assign(r.n + 1, 0);
      for (std::size_t i = 0; i < r.n; ++i)
        r.label_pre[i + 1] = r.label_pre[i] + *set.records[idx[i]].label;
    }
    return r;
  }

  std::size_t cut(double theta) const {
    return static_cast<std::size_t>(
        std::lower_bound(score.begin(), score.end(), theta) - score.begin());
  }
  // Mean of the positive side [c,n) raw scores.
  double pos_mean(std::size_t c) const {
    return (score_pre[n] - score_pre[c]) / static_cast<double>(n - c);
  }
  // Mean of the negative side [0,c) confidences.
  double neg_mean(std::size_t c) const {
    return negconf_pre[c] / static_cast<double>(c);
  }
  long long labels_above(std::size_t c) const {
    return label_pre[n] - label_pre[c];
  }
};

struct ThresholdCm {
  double tp, fp, tn, fn;
};

// Strictly-above count on the ascending positive side / descending
// negative side, mirroring atc_estimate's comparison.
double frac_above_pos(const RankedSet& r, std::size_t c, double thr) {
  auto b = r.score.begin() + static_cast<std::ptrdiff_t>(c);
  auto above = r.score.end() - std::upper_bound(b, r.score.end(), thr);
  return static_cast<double>(above) / static_cast<double>(r.n - c);
}
double frac_above_neg(const RankedSet& r, std::size_t c, double thr) {
  auto b = r.negconf.begin();
  auto e = r.negconf.begin() + static_cast<std::ptrdiff_t>(c);
  auto above = std::lower_bound(b, e, thr, std::greater<double>()) - b;
  return static_cast<double>(above) / static_cast<double>(c);
}

std::optional<ThresholdCm> cm_at_threshold(Source method, const RankedSet& rval,
                                           const RankedSet& rtest,
                                           double theta) {
  const std::size_t ct = rtest.cut(theta);
  const std::size_t npos_t = rtest.n - ct;
  const std::size_t nneg_t = ct;

  double ppv = 0.0, npv = 0.0;
  bool ppv_def = false, npv_def = false;

  if (method == Source::cbpe) {
    if (npos_t > 0) {
      ppv = rtest.pos_mean(ct);
      ppv_def = true;
    }
    if (nneg_t > 0) {
      npv = rtest.neg_mean(ct);
      npv_def = true;
    }
  } else {
    const std::size_t cv = rval.cut(theta);
    const std::size_t npos_v = rval.n - cv;
    const std::size_t nneg_v = cv;
    if (npos_v == 0 || nneg_v == 0) return std::nullopt;
    const double ppv_val = static_cast<double>(rval.labels_above(cv)) /
                           static_cast<double>(npos_v);
    const double npv_val =
        static_cast<double>(static_cast<long long>(cv) - rval.label_pre[cv]) /
        static_cast<double>(nneg_v);
    if (method == Source::cm_doc) {
      if (npos_t == 0 || nneg_t == 0) return std::nullopt;
      ppv = clip01(ppv_val - (rval.pos_mean(cv) - rtest.pos_mean(ct))).first;
      npv = clip01(npv_val - (rval.neg_mean(cv) - rtest.neg_mean(ct))).first;
      ppv_def = npv_def = true;
    } else {  // cm_atc
      auto learn_k = [](std::size_t n_side, double target) {
        auto k = std::llround(static_cast<double>(n_side) * (1.0 - target));
        return std::clamp<long long>(k, 0, static_cast<long long>(n_side));
      };
      if (npos_t > 0) {
        const long long k = learn_k(npos_v, ppv_val);
        ppv = k == 0 ? 1.0
                     : frac_above_pos(rtest, ct,
                                      rval.score[cv + static_cast<std::size_t>(k) - 1]);
        ppv_def = true;
      }
      if (nneg_t > 0) {
        const long long k = learn_k(nneg_v, npv_val);
        npv = k == 0 ? 1.0
                     : frac_above_neg(rtest, ct,
                                      rval.negconf[cv - static_cast<std::size_t>(k)]);
        npv_def = true;
      }
    }
  }

  ThresholdCm cm{};
  cm.tp = ppv_def ? static_cast<double>(npos_t) * ppv : 0.0;
  cm.fp = static_cast<double>(npos_t) - cm.tp;
  cm.tn = npv_def ? static_cast<double>(nneg_t) * npv : 0.0;
  cm.fn = static_cast<double>(nneg_t) - cm.tn;
  return cm;
}

double trapezoid_sorted_roc(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].first - pts[i - 1].first) *
            (pts[i].second + pts[i - 1].second) / 2.0;
  return area;
}

}  // namespace

std::pair<double, bool> estimate_auc(Source method, const ScoreSet& val,
                                     const ScoreSet& test) {
  if (method != Source::cbpe && method != Source::cm_atc &&
      method != Source::cm_doc)
    fail(ErrorKind::unsupported, std::string("AUC estimation not offered for ") +
                                     source_name(method));
  if (test.empty()) fail(ErrorKind::invalid, "estimate_auc: empty test set");
  const bool needs_val = method != Source::cbpe;
  RankedSet rval;
  if (needs_val) {
    val.require_labelled("estimate_auc validation set");
    rval = RankedSet::build(val, true);
  }
  const RankedSet rtest = RankedSet::build(test, false);

  std::vector<std::pair<double, double>> pts;
  pts.reserve(102);
  for (int j = 1; j <= 100; ++j) {
    const double theta =
        sorted_quantile(rtest.score, static_cast<double>(j) / 101.0);
    const auto cm = cm_at_threshold(method, rval, rtest, theta);
    if (!cm) continue;
    const double pos_den = cm->tp + cm->fn;
    const double neg_den = cm->fp + cm->tn;
    if (pos_den == 0.0 || neg_den == 0.0) continue;
    pts.emplace_back(cm->fp / neg_den, cm->tp / pos_den);
  }
  if (pts.size() < 2)
    fail(ErrorKind::unsupported,
         "AUC estimate unsupported: fewer than 2 usable ROC points (" +
             std::to_string(pts.size()) + ")");
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  return clip01(trapezoid_sorted_roc(std::move(pts)));
}

namespace {

EstimationResult run_cm_method(Source method, const PredictionSplit& val_split,
                               const PredictionSplit& test_split) {
  switch (method) {
    case Source::cbpe: {
      EstimationResult res;
      res.method = Source::cbpe;
      res.cm = cm_from_pv(test_split.n_pos(), test_split.n_neg(),
                          cbpe_pv(test_split), Source::cbpe);
      res.metrics = counting_metrics(*res.cm);
      return res;
    }
    case Source::cm_atc: return cm_atc(val_split, test_split);
    case Source::cm_doc: return cm_doc(val_split, test_split);
    default: fail(ErrorKind::invalid, "not a confusion-matrix method");
  }
}

}  // namespace

std::vector<MethodOutcome> estimate_all(const std::vector<Source>& methods,
                                        const ScoreSet& val,
                                        const ScoreSet& test) {
  val.require_labelled("estimate_all validation set");
  if (test.empty()) fail(ErrorKind::invalid, "estimate_all: empty test set");
  const PredictionSplit val_split = split_predictions(val);
  const PredictionSplit test_split = split_predictions(test);

  std::vector<MethodOutcome> out;
  out.reserve(methods.size());
  for (Source method : methods) {
    MethodOutcome mo;
    mo.method = method;
    try {
      if (method == Source::naive_atc || method == Source::naive_doc) {
        const NaiveMethod nm = method == Source::naive_atc ? NaiveMethod::atc
                                                           : NaiveMethod::doc;
        EstimationResult res;
        res.method = method;
        for (Metric m : kCountingMetrics) {
          try {
            const auto [v, clipped] = naive_estimate(nm, m, val, test);
            res.metrics.set(m, MetricValue::of_clipped(v, clipped));
          } catch (const Error&) {
            res.metrics.set(m, MetricValue::undef());
          }
        }
        res.metrics.set(Metric::auc, MetricValue::unsup());
        mo.result = std::move(res);
      } else if (method == Source::realized) {
        fail(ErrorKind::invalid, "'realized' is not an estimation method");
      } else {
        EstimationResult res = run_cm_method(method, val_split, test_split);
        try {
          const auto [auc, clipped] = estimate_auc(method, val, test);
          res.metrics.set(Metric::auc, MetricValue::of_clipped(auc, clipped));
        } catch (const Error&) {
          res.metrics.set(Metric::auc, MetricValue::undef());
        }
        mo.result = std::move(res);
      }
    } catch (const Error& e) {
      mo.result.reset();
      mo.error = e.what();
    }
    out.push_back(std::move(mo));
  }
  return out;
}

Source method_from_name(const std::string& name) {
  if (name == "cbpe") return Source::cbpe;
  if (name == "cm_atc") return Source::cm_atc;
  if (name == "cm_doc") return Source::cm_doc;
  if (name == "naive_atc" || name == "atc") return Source::naive_atc;
  if (name == "naive_doc" || name == "doc") return Source::naive_doc;
  fail(ErrorKind::invalid, "unknown estimation method '" + name + "'");
}

std::vector<Source> parse_methods(const std::string& comma_separated) {
  std::vector<Source> out;
  for (const std::string& part : split(comma_separated, ',')) {
    const std::string name = trim(part);
    if (name.empty()) continue;
    out.push_back(method_from_name(name));
  }
  return out;
}

std::string estimates_to_csv(const std::vector<MethodOutcome>& outcomes) {
  std::string out = "method,metric,value,state,clipped\n";
  for (const auto& mo : outcomes) {
    for (Metric m : kAllMetrics) {
      out += source_name(mo.method);
      out += ',';
      out += metric_name(m);
      if (!mo.ok()) {
        out += ",error,error,0\n";
        continue;
      }
      const MetricValue& v = mo.result->metrics.get(m);
      out += ',';
      out += metric_value_text(v);
      out += ',';
      switch (v.state) {
        case MetricValue::State::defined: out += "defined"; break;
        case MetricValue::State::undefined: out += "undefined"; break;
        case MetricValue::State::unsupported: out += "unsupported"; break;
      }
      out += v.clipped ? ",1\n" : ",0\n";
    }
  }
  return out;
}

std::string estimates_to_json(const std::vector<MethodOutcome>& outcomes) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& mo : outcomes) {
    nlohmann::ordered_json obj;
    obj["method"] = source_name(mo.method);
    if (!mo.ok()) {
      obj["error"] = mo.error;
      arr.push_back(std::move(obj));
      continue;
    }
    if (mo.result->cm) {
      obj["cm"] = {{"tp", mo.result->cm->tp},
                   {"fp", mo.result->cm->fp},
                   {"tn", mo.result->cm->tn},
                   {"fn", mo.result->cm->fn}};
    }
    obj["metrics"] = nlohmann::ordered_json::parse(mo.result->metrics.to_json());
    nlohmann::ordered_json clipped = nlohmann::ordered_json::array();
    for (Metric m : kAllMetrics)
      if (mo.result->metrics.get(m).clipped) clipped.push_back(metric_name(m));
    obj["clipped"] = std::move(clipped);
    arr.push_back(std::move(obj));
  }
  return arr.dump(2);
}

std::string confusions_to_csv(const std::vector<MethodOutcome>& outcomes) {
  std::string out = "method,tp,fp,tn,fn\n";
  for (const auto& mo : outcomes) {
    if (!mo.ok() || !mo.result->cm) continue;
    const ConfusionMatrix& cm = *mo.result->cm;
    out += source_name(mo.method);
    out += ',';
    out += fmt_double(cm.tp);
    out += ',';
    out += fmt_double(cm.fp);
    out += ',';
    out += fmt_double(cm.tn);
    out += ',';
    out += fmt_double(cm.fn);
    out += '\n';
  }
  return out;
}

}  // namespace cmest
