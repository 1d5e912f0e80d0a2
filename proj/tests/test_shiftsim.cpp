#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "error.hpp"
#include "rng.hpp"
#include "shiftsim.hpp"
#include "testutil.hpp"
#include "util.hpp"

using namespace cmest;

namespace {

GeneratorSpec basic_spec(std::size_t n, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.n = n;
  spec.prevalence = 0.5;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("latent laws") {
  CHECK(LatentLaw::parse("uniform").mean() == 0.5);
  LatentLaw beta = LatentLaw::parse("beta:2,6");
  CHECK(beta.mean() == doctest::Approx(0.25));
  CHECK(beta.text() == "beta:2,6");
  CHECK_THROWS_AS(LatentLaw::parse("beta:2"), Error);
  CHECK_THROWS_AS(LatentLaw::parse("beta:0,1"), Error);
  CHECK_THROWS_AS(LatentLaw::parse("gauss"), Error);
}

TEST_CASE("generator") {
  SUBCASE("fixed seed reproduces the set bit for bit") {
    ScoreSet a = generate_synthetic(basic_spec(10, 99));
    ScoreSet b = generate_synthetic(basic_spec(10, 99));
    REQUIRE(a.size() == 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.records[i].id == b.records[i].id);
      CHECK(a.records[i].raw_score == b.records[i].raw_score);
      CHECK(a.records[i].label == b.records[i].label);
    }
  }
  SUBCASE("requested prevalence away from the latent mean is hit exactly") {
    GeneratorSpec spec = basic_spec(1000, 3);
    spec.prevalence = 0.38;
    ScoreSet set = generate_synthetic(spec);
    CHECK(set.size() == 1000);
    std::size_t pos = 0;
    for (const auto& r : set.records) pos += static_cast<std::size_t>(*r.label);
    CHECK(pos == 380);
  }
  SUBCASE("unreachable prevalence fails after bounded attempts") {
    GeneratorSpec spec = basic_spec(100, 3);
    spec.law = LatentLaw::parse("beta:50,1");  // almost surely positive
    spec.prevalence = 0.05;
    CHECK_THROWS_WITH_AS(generate_synthetic(spec),
                         doctest::Contains("unreachable"), Error);
  }
  SUBCASE("scores live in (0,1) and labels are Bernoulli in q") {
    ScoreSet set = generate_synthetic(basic_spec(5000, 5));
    for (const auto& r : set.records) {
      CHECK(r.raw_score > 0.0);
      CHECK(r.raw_score < 1.0);
    }
  }
  SUBCASE("calibrated generator: per-bin agreement on 15 equal-mass bins") {
    ScoreSet set = generate_synthetic(basic_spec(100000, 7));
    std::vector<std::pair<double, int>> pairs;
    for (const auto& r : set.records) pairs.emplace_back(r.raw_score, *r.label);
    std::sort(pairs.begin(), pairs.end());
    const std::size_t per = pairs.size() / 15;
    for (int b = 0; b < 15; ++b) {
      double s = 0.0, y = 0.0;
      for (std::size_t k = static_cast<std::size_t>(b) * per;
           k < static_cast<std::size_t>(b + 1) * per; ++k) {
        s += pairs[k].first;
        y += pairs[k].second;
      }
      CHECK(std::abs(s - y) / static_cast<double>(per) < 0.02);
    }
  }
  SUBCASE("groups tagged and sized by the majority fraction") {
    GeneratorSpec spec = basic_spec(1000, 9);
    spec.groups = {{LatentLaw::parse("beta:0.5,0.5"), 1.0},
                   {LatentLaw::parse("beta:5,5"), 2.0}};
    spec.majority_fraction = 0.8;
    ScoreSet set = generate_synthetic(spec);
    std::size_t maj = 0, min = 0;
    for (const auto& r : set.records) {
      REQUIRE(r.group.has_value());
      (*r.group == "majority" ? maj : min) += 1;
    }
    CHECK(maj == 800);
    CHECK(min == 200);
  }
  SUBCASE("config parsing applies defaults and rejects unknown keys") {
    GeneratorSpec spec = GeneratorSpec::from_config(
        parse_config_text("n=50\nprevalence=0.3\nlatent=beta:2,2\n", "mem"));
    CHECK(spec.n == 50);
    CHECK(spec.law.kind == LatentLaw::Kind::beta);
    CHECK_THROWS_AS(GeneratorSpec::from_config(
                        parse_config_text("bogus=1\n", "mem")),
                    Error);
    CHECK_THROWS_AS(GeneratorSpec::from_config(
                        parse_config_text("prevalence=0\n", "mem")),
                    Error);
  }
}

TEST_CASE("prevalence resampling") {
  std::mt19937 rng(111);
  ScoreSet pool = testutil::random_set(rng, 10000);

  SUBCASE("exact positive counts at both extremes") {
    ScoreSet low = resample_prevalence(pool, 0.05, 1000, 1);
    ScoreSet high = resample_prevalence(pool, 0.95, 1000, 1);
    auto count_pos = [](const ScoreSet& s) {
      std::size_t pos = 0;
      for (const auto& r : s.records) pos += static_cast<std::size_t>(*r.label);
      return pos;
    };
    CHECK(low.size() == 1000);
    CHECK(count_pos(low) == 50);
    CHECK(count_pos(high) == 950);
  }
  SUBCASE("bootstrap at the pool prevalence concentrates on pool accuracy") {
    const double pool_acc =
        counting_metrics(realized_confusion_matrix(pool)).get(Metric::accuracy).value;
    const double target = pool.prevalence();
    double err_sum = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      ScoreSet draw =
          resample_prevalence(pool, target, 1000, static_cast<std::uint64_t>(rep));
      const double acc = counting_metrics(realized_confusion_matrix(draw))
                             .get(Metric::accuracy)
                             .value;
      err_sum += std::abs(acc - pool_acc);
    }
    CHECK(err_sum / 50.0 < 0.02);
  }
  SUBCASE("exact prevalence property on fuzzed targets") {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int it = 0; it < 50; ++it) {
      const double target = uni(rng);
      const std::size_t n = 20 + static_cast<std::size_t>(it) * 7;
      ScoreSet draw = resample_prevalence(pool, target, n, 77);
      std::size_t pos = 0;
      for (const auto& r : draw.records) pos += static_cast<std::size_t>(*r.label);
      CHECK(pos == static_cast<std::size_t>(
                       std::llround(static_cast<double>(n) * target)));
    }
  }
  SUBCASE("degenerate pools and tiny n rejected") {
    ScoreSet single;
    single.records.push_back({"a", 0.9, 1, {}});
    for (int i = 0; i < 30; ++i) single.records.push_back({"b", 0.8, 1, {}});
    CHECK_THROWS_AS(resample_prevalence(single, 0.5, 100, 1), Error);
    CHECK_THROWS_AS(resample_prevalence(pool, 0.5, 19, 1), Error);
  }
}

TEST_CASE("group mixing") {
  std::mt19937 rng(113);
  ScoreSet majority = testutil::random_set(rng, 4000);
  ScoreSet minority = testutil::random_set(rng, 4000);

  SUBCASE("block sizes and exact reference prevalence") {
    ScoreSet mixed = mix_groups(majority, minority, 0.8, 1000, 5, 0.38);
    CHECK(mixed.size() == 1000);
    std::size_t maj = 0, pos = 0;
    for (const auto& r : mixed.records) {
      maj += static_cast<std::size_t>(*r.group == "majority");
      pos += static_cast<std::size_t>(*r.label);
    }
    CHECK(maj == 800);
    CHECK(pos == 380);
  }
  SUBCASE("fraction one draws from the majority pool only") {
    ScoreSet mixed = mix_groups(majority, minority, 1.0, 500, 5, 0.5);
    for (const auto& r : mixed.records) CHECK(*r.group == "majority");
  }
  SUBCASE("threshold mismatch rejected") {
    ScoreSet other = minority;
    other.threshold = 0.4;
    CHECK_THROWS_AS(mix_groups(majority, other, 0.5, 100, 1, 0.5), Error);
  }
  SUBCASE("infeasible stratification names the missing class") {
    ScoreSet neg_only;
    neg_only.threshold = 0.5;
    for (int i = 0; i < 50; ++i)
      neg_only.records.push_back({"n" + std::to_string(i), 0.2, 0, {}});
    CHECK_THROWS_AS(mix_groups(neg_only, minority, 0.9, 100, 1, 0.9), Error);
  }
}

TEST_CASE("axis parsing") {
  CHECK(parse_axis("0.05:0.95:0.05").size() == 19);
  CHECK(parse_axis("0:1:0.1").size() == 11);
  CHECK(parse_axis("0.05:0.95:0.05")[2] == 0.15);
  CHECK(fmt_double(parse_axis("0.05:0.95:0.05")[6]) == "0.35");
  CHECK(parse_axis("0.1,0.5,0.9") == std::vector<double>{0.1, 0.5, 0.9});
  CHECK_THROWS_AS(parse_axis("0.5,0.4"), Error);
  CHECK_THROWS_AS(parse_axis("1:0:0.1"), Error);
  CHECK_THROWS_AS(parse_axis(""), Error);
}

TEST_CASE("seed derivation separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 30; ++a)
    for (std::uint64_t b = 0; b < 30; ++b)
      seen.insert(derive_seed(42, a, b));
  CHECK(seen.size() == 900);
  CHECK(derive_seed(42, 1, 2) != derive_seed(43, 1, 2));
}

TEST_CASE("sweeps") {
  GeneratorSpec gen = basic_spec(3000, 201);
  gen.prevalence = 0.4;
  ScoreSet pool = generate_synthetic(gen);
  gen.seed = 202;
  ScoreSet val = generate_synthetic(gen);

  SweepConfig cfg;
  cfg.kind = SweepConfig::Kind::prevalence;
  cfg.axis = {0.2, 0.5, 0.8};
  cfg.repetitions = 4;
  cfg.sample_n = 400;
  cfg.master_seed = 7;
  cfg.ace_bins = 10;
  cfg.methods = parse_methods(kDefaultMethods);

  SUBCASE("shape, determinism and parallel equivalence") {
    SweepResult serial = run_sweep(cfg, val, pool, nullptr, 1);
    SweepResult parallel = run_sweep(cfg, val, pool, nullptr, 4);
    REQUIRE(serial.levels.size() == 3);
    CHECK(serial.to_csv() == parallel.to_csv());
    CHECK(serial.summary_csv() == parallel.summary_csv());
    CHECK(serial.to_csv().rfind(
              "level,repetition_mean,metric,method,realized,estimated,rbs,ace\n",
              0) == 0);
    // 3 levels x 5 methods x 8 metrics rows plus the header.
    const std::string csv = serial.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 5 * 8);
    // Realized means sit in [0,1] where defined.
    for (const auto& level : serial.levels) {
      for (const auto& vm : level.realized)
        if (vm.defined()) CHECK((vm.mean() >= 0.0 && vm.mean() <= 1.0));
      CHECK(level.rbs_mean > 0.0);
    }
  }
  SUBCASE("covariate sweeps need the minority pool") {
    cfg.kind = SweepConfig::Kind::covariate;
    CHECK_THROWS_AS(run_sweep(cfg, val, pool, nullptr, 1), Error);
  }
  SUBCASE("constructor failures carry level and repetition") {
    SweepConfig bad = cfg;
    bad.sample_n = 10;  // below the resampler's minimum
    CHECK_THROWS_WITH_AS(run_sweep(bad, val, pool, nullptr, 1),
                         doctest::Contains("level 0.2 repetition 0"), Error);
  }
  SUBCASE("config parse with defaults") {
    SweepConfig parsed = SweepConfig::from_config(
        parse_config_text("kind=prevalence\nreps=2\nn=100\n", "mem"));
    CHECK(parsed.axis.size() == 19);
    CHECK(parsed.repetitions == 2);
    SweepConfig cov = SweepConfig::from_config(
        parse_config_text("kind=covariate\n", "mem"));
    CHECK(cov.axis.size() == 11);
    CHECK_THROWS_AS(SweepConfig::from_config(
                        parse_config_text("kind=volume\n", "mem")),
                    Error);
  }
}

TEST_CASE("mae report") {
  MetricReport a, b;
  a.set(Metric::accuracy, MetricValue::of(0.8));
  b.set(Metric::accuracy, MetricValue::of(0.9));
  MetricReport c, d;
  c.set(Metric::accuracy, MetricValue::of(0.6));
  d.set(Metric::accuracy, MetricValue::of(0.5));

  SUBCASE("identical pairs give zero") {
    auto rows = mae_report({{0.0, Source::cm_doc, a, a}}, MaeGroupBy::method);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].stats.mae() == 0.0);
  }
  SUBCASE("hand-checked pooled mae") {
    auto rows = mae_report(
        {{0.0, Source::cbpe, a, b}, {0.0, Source::cbpe, c, d}}, MaeGroupBy::metric);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].group == "accuracy");
    CHECK(rows[0].stats.mae() == doctest::Approx(0.1));
    CHECK(rows[0].stats.pairs == 2);
  }
  SUBCASE("undefined pairs counted separately") {
    MetricReport undef;
    undef.set(Metric::accuracy, MetricValue::undef());
    auto rows = mae_report({{0.0, Source::cbpe, a, b},
                            {0.0, Source::cbpe, c, d},
                            {0.0, Source::cbpe, a, undef}},
                           MaeGroupBy::metric);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].stats.pairs == 2);
    CHECK(rows[0].stats.undefined == 1);
  }
  SUBCASE("no defined pairs is an error") {
    MetricReport undef;
    undef.set(Metric::accuracy, MetricValue::undef());
    CHECK_THROWS_AS(mae_report({{0.0, Source::cbpe, a, undef}}, MaeGroupBy::method),
                    Error);
    CHECK_THROWS_AS(mae_report({}, MaeGroupBy::method), Error);
  }
  SUBCASE("csv layout") {
    auto rows = mae_report({{0.0, Source::cm_doc, a, a}}, MaeGroupBy::method);
    CHECK(mae_rows_to_csv(rows) ==
          "group,metric,mae,pairs,undefined\ncm_doc,accuracy,0,1,0\n");
  }
}
