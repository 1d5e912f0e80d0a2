#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "metrics.hpp"
#include "testutil.hpp"

using namespace cmest;

namespace {

ScoreSet make_set(std::vector<double> scores, std::vector<int> labels,
                  double t = 0.5) {
  ScoreSet set;
  set.threshold = t;
  for (std::size_t i = 0; i < scores.size(); ++i)
    set.records.push_back({"r" + std::to_string(i), scores[i],
                           labels.empty() ? std::optional<int>{} : labels[i],
                           {}});
  return set;
}

}  // namespace

TEST_CASE("realized confusion matrix") {
  ConfusionMatrix cm = realized_confusion_matrix(
      make_set({0.9, 0.6, 0.3}, {1, 0, 0}));
  CHECK(cm.tp == 1);
  CHECK(cm.fp == 1);
  CHECK(cm.tn == 1);
  CHECK(cm.fn == 0);

  ConfusionMatrix all_pos = realized_confusion_matrix(make_set({0.9, 0.8}, {1, 1}));
  CHECK(all_pos.tp == 2);
  CHECK(all_pos.fp + all_pos.tn + all_pos.fn == 0);

  CHECK_THROWS_AS(realized_confusion_matrix(make_set({0.9}, {})), Error);
}

TEST_CASE("counting metrics from a hand-checked matrix") {
  // tp=8 fp=2 tn=3 fn=2: recall 8/10, specificity 3/5, ppv 8/10,
  // accuracy 11/15, balanced (0.8+0.6)/2, f1 2*.8*.8/1.6.
  MetricReport rep = counting_metrics({8, 2, 3, 2, Source::realized});
  CHECK(rep.get(Metric::recall).value == doctest::Approx(0.8));
  CHECK(rep.get(Metric::specificity).value == doctest::Approx(0.6));
  CHECK(rep.get(Metric::ppv).value == doctest::Approx(0.8));
  CHECK(rep.get(Metric::accuracy).value == doctest::Approx(11.0 / 15.0));
  CHECK(rep.get(Metric::balanced_accuracy).value == doctest::Approx(0.7));
  CHECK(rep.get(Metric::f1).value == doctest::Approx(0.8));
  CHECK(rep.get(Metric::auc).state == MetricValue::State::unsupported);

  SUBCASE("zero denominators flagged undefined") {
    MetricReport r2 = counting_metrics({0, 0, 3, 2, Source::realized});
    CHECK(r2.get(Metric::ppv).state == MetricValue::State::undefined);
    CHECK(r2.get(Metric::specificity).defined());
  }
  SUBCASE("all-ones matrix gives 0.5 everywhere") {
    MetricReport r3 = counting_metrics({1, 1, 1, 1, Source::realized});
    for (Metric m : {Metric::accuracy, Metric::recall, Metric::specificity,
                     Metric::ppv, Metric::npv})
      CHECK(r3.get(m).value == 0.5);
  }
  SUBCASE("negative entries rejected") {
    CHECK_THROWS_AS(counting_metrics({-1, 0, 0, 0, Source::realized}), Error);
  }
}

TEST_CASE("counting metrics agree with the per-record reference on fuzzed sets") {
  std::mt19937 rng(23);
  for (int it = 0; it < 300; ++it) {
    ScoreSet set = testutil::random_set(rng, 1 + it % 50);
    const testutil::RefMetrics ref = testutil::reference_metrics(set);
    const MetricReport rep = counting_metrics(realized_confusion_matrix(set));
    auto check = [&](Metric m, const std::optional<double>& expected) {
      const MetricValue& v = rep.get(m);
      if (expected) {
        REQUIRE(v.defined());
        CHECK(v.value == *expected);
      } else {
        CHECK(!v.defined());
      }
    };
    check(Metric::accuracy, ref.accuracy);
    check(Metric::balanced_accuracy, ref.balanced_accuracy);
    check(Metric::recall, ref.recall);
    check(Metric::specificity, ref.specificity);
    check(Metric::ppv, ref.ppv);
    check(Metric::npv, ref.npv);
    check(Metric::f1, ref.f1);
  }
}

TEST_CASE("rank AUC") {
  CHECK(realized_auc(make_set({0.9, 0.1}, {1, 0}), AucMethod::rank_exact) == 1.0);
  CHECK(realized_auc(make_set({0.1, 0.9}, {1, 0}), AucMethod::rank_exact) == 0.0);
  // Ties count half.
  CHECK(realized_auc(make_set({0.5, 0.5}, {1, 0}), AucMethod::rank_exact) == 0.5);
  CHECK_THROWS_WITH_AS(
      realized_auc(make_set({0.4, 0.6}, {1, 1}), AucMethod::rank_exact),
      doctest::Contains("AUC undefined"), Error);

  SUBCASE("matches the pairwise reference") {
    std::mt19937 rng(31);
    for (int it = 0; it < 50; ++it) {
      ScoreSet set = testutil::random_dyadic_set(rng, 30);
      const auto cm = realized_confusion_matrix(set);
      if (cm.tp + cm.fn == 0 || cm.tn + cm.fp == 0) continue;
      CHECK(realized_auc(set, AucMethod::rank_exact) ==
            doctest::Approx(testutil::reference_rank_auc(set)).epsilon(1e-12));
    }
  }
  SUBCASE("invariant under strictly monotone score transforms") {
    std::mt19937 rng(37);
    ScoreSet set = testutil::random_dyadic_set(rng, 200);
    const double before = realized_auc(set, AucMethod::rank_exact);
    ScoreSet squeezed = set;
    for (auto& r : squeezed.records) r.raw_score = r.raw_score * 0.5 + 0.25;
    CHECK(realized_auc(squeezed, AucMethod::rank_exact) == before);
  }
}

TEST_CASE("quantile AUC") {
  CHECK(realized_auc(make_set({0.9, 0.1}, {1, 0}), AucMethod::quantile_100) == 1.0);
  CHECK(realized_auc(make_set({0.1, 0.9}, {1, 0}), AucMethod::quantile_100) == 0.0);

  SUBCASE("close to the rank oracle at scale") {
    std::mt19937 rng(41);
    ScoreSet set = testutil::random_set(rng, 10000);
    const double rank = realized_auc(set, AucMethod::rank_exact);
    const double quant = realized_auc(set, AucMethod::quantile_100);
    CHECK(std::abs(rank - quant) < 0.01);
  }
}

TEST_CASE("complement symmetry: flipped labels and scores swap the paired metrics") {
  std::mt19937 rng(43);
  for (int it = 0; it < 100; ++it) {
    ScoreSet set = testutil::random_dyadic_set(rng, 2 + it % 60);
    ScoreSet flipped = set;
    for (auto& r : flipped.records) {
      r.raw_score = 1.0 - r.raw_score;  // exact on the grid
      r.label = 1 - *r.label;
    }
    // t' = 1 - t keeps the prediction partition mirrored; the grid avoids
    // exact-threshold ties, where the >= convention breaks the mirror.
    flipped.threshold = 0.5;
    const MetricReport a = counting_metrics(realized_confusion_matrix(set));
    const MetricReport b = counting_metrics(realized_confusion_matrix(flipped));
    auto same = [](const MetricValue& x, const MetricValue& y) {
      return x.defined() == y.defined() && (!x.defined() || x.value == y.value);
    };
    CHECK(same(a.get(Metric::recall), b.get(Metric::specificity)));
    CHECK(same(a.get(Metric::specificity), b.get(Metric::recall)));
    CHECK(same(a.get(Metric::ppv), b.get(Metric::npv)));
    CHECK(same(a.get(Metric::npv), b.get(Metric::ppv)));
    const auto cm = realized_confusion_matrix(set);
    if (cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0)
      CHECK(realized_auc(set, AucMethod::rank_exact) ==
            realized_auc(flipped, AucMethod::rank_exact));
  }
}

TEST_CASE("root Brier score") {
  CHECK(root_brier_score(make_set({1.0, 0.0}, {1, 0})) == 0.0);
  CHECK(root_brier_score(make_set({0.5}, {1})) == 0.5);
  CHECK(root_brier_score(make_set({0.8, 0.8}, {1, 0})) ==
        doctest::Approx(std::sqrt((0.04 + 0.64) / 2.0)));
}

TEST_CASE("adaptive calibration error") {
  SUBCASE("single bin, consistent scores") {
    std::vector<double> scores(10, 0.7);
    std::vector<int> labels(10, 0);
    for (int i = 0; i < 7; ++i) labels[static_cast<std::size_t>(i)] = 1;
    CHECK(adaptive_calibration_error(make_set(scores, labels), 1) ==
          doctest::Approx(0.0));
  }
  SUBCASE("maximal single-bin gap") {
    CHECK(adaptive_calibration_error(make_set({0.9, 0.9}, {0, 0}), 1) ==
          doctest::Approx(0.9));
  }
  SUBCASE("remainder records go to the lowest bins") {
    // n=5, bins=2 -> bin sizes 3 and 2 over sorted scores.
    // sorted scores .1 .2 .3 | .8 .9 with labels 0 0 1 | 1 1
    const double ace = adaptive_calibration_error(
        make_set({0.8, 0.1, 0.9, 0.2, 0.3}, {1, 0, 1, 0, 1}), 2);
    const double bin1 = std::abs((0.1 + 0.2 + 0.3) / 3.0 - 1.0 / 3.0);
    const double bin2 = std::abs((0.8 + 0.9) / 2.0 - 1.0);
    CHECK(ace == doctest::Approx((bin1 + bin2) / 2.0));
  }
  SUBCASE("more bins than records rejected") {
    CHECK_THROWS_AS(adaptive_calibration_error(make_set({0.5}, {1}), 2), Error);
    CHECK_THROWS_AS(adaptive_calibration_error(make_set({0.5}, {1}), 0), Error);
  }
  SUBCASE("near zero on a large calibrated set") {
    std::mt19937 rng(47);
    ScoreSet set = testutil::random_set(rng, 20000);
    CHECK(adaptive_calibration_error(set, 15) < 0.015);
  }
}

TEST_CASE("report serialisation") {
  MetricReport rep = counting_metrics({0, 0, 3, 2, Source::realized});
  const std::string row = rep.csv_row();
  CHECK(MetricReport::csv_header() ==
        "accuracy,balanced_accuracy,recall,specificity,ppv,npv,f1,auc");
  CHECK(row.find("undefined") != std::string::npos);   // ppv, recall, ...
  CHECK(row.find("unsupported") != std::string::npos); // auc slot
  CHECK(rep.to_json().find("\"ppv\":\"undefined\"") != std::string::npos);
}
