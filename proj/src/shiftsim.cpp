#include "shiftsim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "error.hpp"
#include "rng.hpp"
#include "util.hpp"

namespace cmest {

double LatentLaw::mean() const {
  return kind == Kind::uniform ? 0.5 : a / (a + b);
}

LatentLaw LatentLaw::parse(const std::string& text) {
  const std::string s = trim(text);
  if (s == "uniform") return {};
  if (s.rfind("beta:", 0) == 0) {
    auto parts = split(s.substr(5), ',');
    if (parts.size() != 2)
      fail(ErrorKind::parse, "latent law '" + text + "': expected beta:a,b");
    LatentLaw law;
    law.kind = Kind::beta;
    auto parse_param = [&](const std::string& p) {
      const std::string t = trim(p);
      double v = 0.0;
      auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size() || v <= 0.0)
        fail(ErrorKind::parse,
             "latent law '" + text + "': parameters must be positive numbers");
      return v;
    };
    law.a = parse_param(parts[0]);
    law.b = parse_param(parts[1]);
    return law;
  }
  fail(ErrorKind::parse,
       "latent law '" + text + "': expected 'uniform' or 'beta:a,b'");
}

std::string LatentLaw::text() const {
  if (kind == Kind::uniform) return "uniform";
  return "beta:" + fmt_double(a) + "," + fmt_double(b);
}

GeneratorSpec GeneratorSpec::from_config(const ConfigMap& cfg) {
  config_check_keys(
      cfg,
      {"n", "prevalence", "latent", "distortion", "seed", "threshold", "groups",
       "majority_latent", "majority_distortion", "minority_latent",
       "minority_distortion", "majority_fraction"},
      "generator config");
  GeneratorSpec spec;
  const auto n = config_get_int(cfg, "n", 1000);
  if (n < 1) fail(ErrorKind::invalid, "generator: n must be >= 1");
  spec.n = static_cast<std::size_t>(n);
  spec.prevalence = config_get_double(cfg, "prevalence", 0.5);
  spec.law = LatentLaw::parse(config_get(cfg, "latent", "uniform"));
  spec.distortion = config_get_double(cfg, "distortion", 1.0);
  spec.seed = config_get_u64(cfg, "seed", kDefaultSeed);
  spec.threshold = config_get_double(cfg, "threshold", 0.5);
  spec.majority_fraction = config_get_double(cfg, "majority_fraction", 0.5);
  const std::string groups = config_get(cfg, "groups", "none");
  if (groups == "majority_minority") {
    GroupSpec maj{LatentLaw::parse(config_get(cfg, "majority_latent", "beta:0.5,0.5")),
                  config_get_double(cfg, "majority_distortion", 1.0)};
    GroupSpec min{LatentLaw::parse(config_get(cfg, "minority_latent", "beta:5,5")),
                  config_get_double(cfg, "minority_distortion", 2.0)};
    spec.groups = {maj, min};
  } else if (groups != "none") {
    fail(ErrorKind::parse,
         "generator: groups must be 'none' or 'majority_minority'");
  }
  if (!(spec.prevalence > 0.0 && spec.prevalence < 1.0))
    fail(ErrorKind::invalid, "generator: prevalence must be in (0,1)");
  if (!(spec.distortion > 0.0))
    fail(ErrorKind::invalid, "generator: distortion must be > 0");
  return spec;
}

namespace {

double latent_sample(const LatentLaw& law, Rng& rng) {
  return law.kind == LatentLaw::Kind::uniform ? rng.uniform01()
                                              : rng.beta(law.a, law.b);
}

ScoreRecord make_record(std::size_t index, double q, int label,
                        double distortion) {
  ScoreRecord rec;
  rec.id = "s" + std::to_string(index);
  rec.raw_score = sigmoid(distortion * clamped_logit(q));
  rec.label = label;
  return rec;
}

void generate_block(const LatentLaw& law, double distortion, double prevalence,
                    std::size_t n, Rng& rng, std::size_t index_base,
                    const std::optional<std::string>& group,
                    std::vector<ScoreRecord>& out) {
  const bool natural = std::abs(prevalence - law.mean()) < 1e-9;
  if (natural) {
    for (std::size_t i = 0; i < n; ++i) {
      const double q = latent_sample(law, rng);
      const int y = rng.bernoulli(q) ? 1 : 0;
      ScoreRecord rec = make_record(index_base + i, q, y, distortion);
      rec.group = group;
      out.push_back(std::move(rec));
    }
    return;
  }
  const std::size_t need_pos =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * prevalence));
  const std::size_t need_neg = n - need_pos;
  std::size_t have_pos = 0, have_neg = 0, attempts = 0;
  const std::size_t max_attempts = 10 * n;
  std::size_t index = index_base;
  while (have_pos < need_pos || have_neg < need_neg) {
    if (attempts++ >= max_attempts)
      fail(ErrorKind::invalid,
           "generator: prevalence " + fmt_double(prevalence) +
               " unreachable with latent law " + law.text() + " within " +
               std::to_string(max_attempts) + " attempts");
    const double q = latent_sample(law, rng);
    const int y = rng.bernoulli(q) ? 1 : 0;
    if (y == 1) {
      if (have_pos == need_pos) continue;
      ++have_pos;
    } else {
      if (have_neg == need_neg) continue;
      ++have_neg;
    }
    ScoreRecord rec = make_record(index++, q, y, distortion);
    rec.group = group;
    out.push_back(std::move(rec));
  }
}

}  // namespace

ScoreSet generate_synthetic(const GeneratorSpec& spec) {
  if (spec.n < 1) fail(ErrorKind::invalid, "generator: n must be >= 1");
  if (!(spec.prevalence > 0.0 && spec.prevalence < 1.0))
    fail(ErrorKind::invalid, "generator: prevalence must be in (0,1)");
  if (!(spec.distortion > 0.0))
    fail(ErrorKind::invalid, "generator: distortion must be > 0");
  ScoreSet set;
  set.threshold = spec.threshold;
  set.records.reserve(spec.n);
  if (!spec.groups) {
    Rng rng(spec.seed);
    generate_block(spec.law, spec.distortion, spec.prevalence, spec.n, rng, 0,
                   std::nullopt, set.records);
    return set;
  }
  if (!(spec.majority_fraction >= 0.0 && spec.majority_fraction <= 1.0))
    fail(ErrorKind::invalid, "generator: majority_fraction must be in [0,1]");
  const auto n_maj = static_cast<std::size_t>(
      std::llround(static_cast<double>(spec.n) * spec.majority_fraction));
  const std::size_t n_min = spec.n - n_maj;
  Rng rng_maj(derive_seed(spec.seed, 0, 1));
  Rng rng_min(derive_seed(spec.seed, 1, 1));
  generate_block(spec.groups->first.law, spec.groups->first.distortion,
                 spec.prevalence, n_maj, rng_maj, 0, std::string("majority"),
                 set.records);
  generate_block(spec.groups->second.law, spec.groups->second.distortion,
                 spec.prevalence, n_min, rng_min, n_maj,
                 std::string("minority"), set.records);
  return set;
}

namespace {

struct ClassPools {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
};

ClassPools class_pools(const ScoreSet& pool, const char* name) {
  pool.require_labelled(name);
  ClassPools out;
  for (std::size_t i = 0; i < pool.size(); ++i)
    (*pool.records[i].label == 1 ? out.pos : out.neg).push_back(i);
  return out;
}

void draw_from(const ScoreSet& pool, const std::vector<std::size_t>& indices,
               std::size_t count, Rng& rng,
               const std::optional<std::string>& default_group,
               const char* what, std::vector<ScoreRecord>& out) {
  if (count == 0) return;
  if (indices.empty()) fail(ErrorKind::invalid, std::string(what) + " empty");
  for (std::size_t k = 0; k < count; ++k) {
    ScoreRecord rec = pool.records[indices[rng.index(indices.size())]];
    if (!rec.group && default_group) rec.group = default_group;
    out.push_back(std::move(rec));
  }
}

}  // namespace

ScoreSet resample_prevalence(const ScoreSet& pool, double target_prevalence,
                             std::size_t n, std::uint64_t seed) {
  if (n < 20) fail(ErrorKind::invalid, "resample_prevalence: n must be >= 20");
  if (!(target_prevalence >= 0.0 && target_prevalence <= 1.0))
    fail(ErrorKind::invalid, "resample_prevalence: target must be in [0,1]");
  const ClassPools pools = class_pools(pool, "resample_prevalence pool");
  if (pools.pos.empty())
    fail(ErrorKind::invalid, "resample_prevalence: positive class pool empty");
  if (pools.neg.empty())
    fail(ErrorKind::invalid, "resample_prevalence: negative class pool empty");
  const auto n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * target_prevalence));
  Rng rng(seed);
  ScoreSet out;
  out.threshold = pool.threshold;
  out.records.reserve(n);
  draw_from(pool, pools.pos, n_pos, rng, std::nullopt,
            "resample_prevalence: positive class pool", out.records);
  draw_from(pool, pools.neg, n - n_pos, rng, std::nullopt,
            "resample_prevalence: negative class pool", out.records);
  return out;
}

ScoreSet mix_groups(const ScoreSet& majority, const ScoreSet& minority,
                    double majority_fraction, std::size_t n,
                    std::uint64_t seed, double reference_prevalence) {
  if (n < 1) fail(ErrorKind::invalid, "mix_groups: n must be >= 1");
  if (!(majority_fraction >= 0.0 && majority_fraction <= 1.0))
    fail(ErrorKind::invalid, "mix_groups: majority_fraction must be in [0,1]");
  if (!(reference_prevalence >= 0.0 && reference_prevalence <= 1.0))
    fail(ErrorKind::invalid, "mix_groups: reference prevalence must be in [0,1]");
  if (majority.threshold != minority.threshold)
    fail(ErrorKind::invalid, "mix_groups: pools disagree on the threshold");
  const ClassPools maj = class_pools(majority, "mix_groups majority pool");
  const ClassPools min = class_pools(minority, "mix_groups minority pool");

  const auto n_maj = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * majority_fraction));
  const std::size_t n_min = n - n_maj;
  const auto total_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * reference_prevalence));
  // Split the positive budget proportionally, then clamp to feasibility.
  auto pos_maj = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_maj) * reference_prevalence));
  const std::size_t lo = total_pos > n_min ? total_pos - n_min : 0;
  pos_maj = std::clamp(pos_maj, lo, std::min(n_maj, total_pos));
  const std::size_t pos_min = total_pos - pos_maj;

  Rng rng(seed);
  ScoreSet out;
  out.threshold = majority.threshold;
  out.records.reserve(n);
  draw_from(majority, maj.pos, pos_maj, rng, std::string("majority"),
            "mix_groups: majority pool positive class", out.records);
  draw_from(majority, maj.neg, n_maj - pos_maj, rng, std::string("majority"),
            "mix_groups: majority pool negative class", out.records);
  draw_from(minority, min.pos, pos_min, rng, std::string("minority"),
            "mix_groups: minority pool positive class", out.records);
  draw_from(minority, min.neg, n_min - pos_min, rng, std::string("minority"),
            "mix_groups: minority pool negative class", out.records);
  return out;
}

std::vector<double> parse_axis(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) fail(ErrorKind::parse, "axis: empty specification");
  std::vector<double> axis;
  auto parse_num = [&](const std::string& part) {
    const std::string t = trim(part);
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      fail(ErrorKind::parse, "axis: not a number: '" + part + "'");
    return v;
  };
  if (s.find(':') != std::string::npos) {
    auto parts = split(s, ':');
    if (parts.size() != 3)
      fail(ErrorKind::parse, "axis: expected lo:hi:step, got '" + s + "'");
    const double lo = parse_num(parts[0]);
    const double hi = parse_num(parts[1]);
    const double step = parse_num(parts[2]);
    if (step <= 0.0 || hi < lo)
      fail(ErrorKind::parse, "axis: need step > 0 and hi >= lo");
    const auto count =
        static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      const double raw = lo + static_cast<double>(i) * step;
      axis.push_back(std::round(raw * 1e9) / 1e9);  // snap accumulated error
    }
  } else {
    for (const std::string& part : split(s, ',')) axis.push_back(parse_num(part));
  }
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (!(axis[i] > axis[i - 1]))
      fail(ErrorKind::parse, "axis: values must be strictly increasing");
  return axis;
}

SweepConfig SweepConfig::from_config(const ConfigMap& cfg) {
  config_check_keys(cfg,
                    {"kind", "axis", "reps", "n", "seed", "ace_bins",
                     "ref_prevalence", "methods"},
                    "sweep config");
  SweepConfig out;
  const std::string kind = config_get(cfg, "kind", "prevalence");
  if (kind == "prevalence")
    out.kind = Kind::prevalence;
  else if (kind == "covariate")
    out.kind = Kind::covariate;
  else
    fail(ErrorKind::parse, "sweep kind must be 'prevalence' or 'covariate'");
  out.axis = parse_axis(config_get(
      cfg, "axis", out.kind == Kind::prevalence ? "0.05:0.95:0.05" : "0:1:0.1"));
  const auto reps = config_get_int(cfg, "reps", 50);
  const auto n = config_get_int(cfg, "n", 1000);
  if (reps < 1) fail(ErrorKind::invalid, "sweep: reps must be >= 1");
  if (n < 1) fail(ErrorKind::invalid, "sweep: n must be >= 1");
  out.repetitions = static_cast<std::size_t>(reps);
  out.sample_n = static_cast<std::size_t>(n);
  out.master_seed = config_get_u64(cfg, "seed", kDefaultSeed);
  out.ace_bins = static_cast<int>(config_get_int(cfg, "ace_bins", kDefaultAceBins));
  if (cfg.count("ref_prevalence"))
    out.reference_prevalence = config_get_double(cfg, "ref_prevalence", 0.0);
  out.methods = parse_methods(config_get(cfg, "methods", kDefaultMethods));
  return out;
}

namespace {

// Runs fn(0..tasks) across up to `jobs` threads. Each task writes only its
// own slot, so scheduling cannot change any output.
void parallel_for(std::size_t tasks, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      jobs <= 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct RepEval {
  MetricReport realized;
  double rbs = 0.0;
  double ace = 0.0;
  std::vector<std::optional<MetricReport>> methods;
};

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg, const ScoreSet& val,
                      const ScoreSet& pool_a, const ScoreSet* pool_b,
                      int jobs) {
  if (cfg.axis.empty()) fail(ErrorKind::invalid, "run_sweep: empty axis");
  if (cfg.methods.empty()) fail(ErrorKind::invalid, "run_sweep: no methods");
  val.require_labelled("run_sweep validation set");
  if (cfg.kind == SweepConfig::Kind::covariate && pool_b == nullptr)
    fail(ErrorKind::invalid, "run_sweep: covariate sweep needs a minority pool");
  const double ref_prev = cfg.reference_prevalence
                              ? *cfg.reference_prevalence
                              : val.prevalence();

  const std::size_t n_levels = cfg.axis.size();
  const std::size_t n_reps = cfg.repetitions;
  std::vector<RepEval> cells(n_levels * n_reps);

  parallel_for(n_levels * n_reps, jobs, [&](std::size_t task) {
    const std::size_t li = task / n_reps;
    const std::size_t ri = task % n_reps;
    const std::uint64_t seed = derive_seed(cfg.master_seed, li, ri);
    ScoreSet test;
    try {
      test = cfg.kind == SweepConfig::Kind::prevalence
                 ? resample_prevalence(pool_a, cfg.axis[li], cfg.sample_n, seed)
                 : mix_groups(pool_a, *pool_b, cfg.axis[li], cfg.sample_n,
                              seed, ref_prev);
    } catch (const Error& e) {
      fail(ErrorKind::invalid, "level " + fmt_double(cfg.axis[li]) +
                                   " repetition " + std::to_string(ri) + ": " +
                                   e.what());
    }
    RepEval& cell = cells[task];
    cell.realized = realized_metrics(test);
    cell.rbs = root_brier_score(test);
    cell.ace = adaptive_calibration_error(test, cfg.ace_bins);
    cell.methods.reserve(cfg.methods.size());
    for (const MethodOutcome& mo : estimate_all(cfg.methods, val, test)) {
      cell.methods.push_back(mo.ok()
                                 ? std::optional<MetricReport>(mo.result->metrics)
                                 : std::nullopt);
    }
  });

  SweepResult result;
  result.config = cfg;
  result.levels.resize(n_levels);
  result.aggregate_mae.assign(cfg.methods.size(), {});
  for (std::size_t li = 0; li < n_levels; ++li) {
    SweepLevel& level = result.levels[li];
    level.level = cfg.axis[li];
    level.estimated.assign(cfg.methods.size(), {});
    level.mae.assign(cfg.methods.size(), {});
    level.method_errors.assign(cfg.methods.size(), 0);
    for (std::size_t ri = 0; ri < n_reps; ++ri) {
      const RepEval& cell = cells[li * n_reps + ri];
      level.rbs_mean += cell.rbs;
      level.ace_mean += cell.ace;
      for (int mi = 0; mi < kMetricCount; ++mi) {
        const MetricValue& rv = cell.realized.values[static_cast<std::size_t>(mi)];
        if (rv.defined()) {
          level.realized[static_cast<std::size_t>(mi)].sum += rv.value;
          level.realized[static_cast<std::size_t>(mi)].count += 1;
        }
      }
      for (std::size_t me = 0; me < cfg.methods.size(); ++me) {
        if (!cell.methods[me]) {
          level.method_errors[me] += 1;
          for (int mi = 0; mi < kMetricCount; ++mi) {
            level.mae[me][static_cast<std::size_t>(mi)].undefined += 1;
            result.aggregate_mae[me][static_cast<std::size_t>(mi)].undefined += 1;
          }
          continue;
        }
        for (int mi = 0; mi < kMetricCount; ++mi) {
          const auto idx = static_cast<std::size_t>(mi);
          const MetricValue& ev = cell.methods[me]->values[idx];
          if (ev.state == MetricValue::State::unsupported) continue;
          const MetricValue& rv = cell.realized.values[idx];
          if (ev.defined()) {
            level.estimated[me][idx].sum += ev.value;
            level.estimated[me][idx].count += 1;
          }
          if (ev.defined() && rv.defined()) {
            const double err = std::abs(ev.value - rv.value);
            level.mae[me][idx].abs_sum += err;
            level.mae[me][idx].pairs += 1;
            result.aggregate_mae[me][idx].abs_sum += err;
            result.aggregate_mae[me][idx].pairs += 1;
          } else {
            level.mae[me][idx].undefined += 1;
            result.aggregate_mae[me][idx].undefined += 1;
          }
        }
      }
    }
    level.rbs_mean /= static_cast<double>(n_reps);
    level.ace_mean /= static_cast<double>(n_reps);
  }
  return result;
}

namespace {

std::string mean_text(const ValueMean& v) {
  return v.defined() ? fmt_double(v.mean()) : "undefined";
}

}  // namespace

std::string SweepResult::to_csv() const {
  std::string out =
      "level,repetition_mean,metric,method,realized,estimated,rbs,ace\n";
  for (const SweepLevel& level : levels) {
    for (std::size_t me = 0; me < config.methods.size(); ++me) {
      for (int mi = 0; mi < kMetricCount; ++mi) {
        const auto idx = static_cast<std::size_t>(mi);
        out += fmt_double(level.level);
        out += ',';
        out += std::to_string(config.repetitions);
        out += ',';
        out += metric_name(static_cast<Metric>(mi));
        out += ',';
        out += source_name(config.methods[me]);
        out += ',';
        out += mean_text(level.realized[idx]);
        out += ',';
        out += mean_text(level.estimated[me][idx]);
        out += ',';
        out += fmt_double(level.rbs_mean);
        out += ',';
        out += fmt_double(level.ace_mean);
        out += '\n';
      }
    }
  }
  return out;
}

std::string SweepResult::summary_csv() const {
  std::string out = "level,method,metric,mae,pairs,undefined\n";
  auto emit = [&out](const std::string& level_text, const char* method,
                     Metric metric, const PairStats& stats) {
    if (stats.pairs == 0 && stats.undefined == 0) return;
    out += level_text;
    out += ',';
    out += method;
    out += ',';
    out += metric_name(metric);
    out += ',';
    out += stats.defined() ? fmt_double(stats.mae()) : "undefined";
    out += ',';
    out += std::to_string(stats.pairs);
    out += ',';
    out += std::to_string(stats.undefined);
    out += '\n';
  };
  for (const SweepLevel& level : levels) {
    for (std::size_t me = 0; me < config.methods.size(); ++me)
      for (int mi = 0; mi < kMetricCount; ++mi)
        emit(fmt_double(level.level), source_name(config.methods[me]),
             static_cast<Metric>(mi), level.mae[me][static_cast<std::size_t>(mi)]);
  }
  for (std::size_t me = 0; me < config.methods.size(); ++me)
    for (int mi = 0; mi < kMetricCount; ++mi)
      emit("all", source_name(config.methods[me]), static_cast<Metric>(mi),
           aggregate_mae[me][static_cast<std::size_t>(mi)]);
  return out;
}

std::vector<MaeRow> mae_report(const std::vector<MaePair>& pairs,
                               MaeGroupBy group_by) {
  if (pairs.empty()) fail(ErrorKind::invalid, "mae_report: no pairs");
  // Keyed by (group order value, group text, metric) to keep level groups
  // numerically ordered.
  std::map<std::tuple<double, std::string, int>, PairStats> table;
  for (const MaePair& p : pairs) {
    for (int mi = 0; mi < kMetricCount; ++mi) {
      const auto idx = static_cast<std::size_t>(mi);
      const MetricValue& ev = p.estimated.values[idx];
      const MetricValue& rv = p.realized.values[idx];
      if (ev.state == MetricValue::State::unsupported) continue;
      std::tuple<double, std::string, int> key;
      switch (group_by) {
        case MaeGroupBy::method:
          key = {0.0, source_name(p.method), mi};
          break;
        case MaeGroupBy::metric:
          key = {0.0, metric_name(static_cast<Metric>(mi)), mi};
          break;
        case MaeGroupBy::level:
          key = {p.level, fmt_double(p.level), mi};
          break;
      }
      PairStats& stats = table[key];
      if (ev.defined() && rv.defined()) {
        stats.abs_sum += std::abs(ev.value - rv.value);
        stats.pairs += 1;
      } else {
        stats.undefined += 1;
      }
    }
  }
  std::vector<MaeRow> rows;
  std::size_t total_pairs = 0;
  for (const auto& [key, stats] : table) {
    rows.push_back({std::get<1>(key),
                    metric_name(static_cast<Metric>(std::get<2>(key))), stats});
    total_pairs += stats.pairs;
  }
  if (total_pairs == 0) fail(ErrorKind::invalid, "mae_report: no defined pairs");
  return rows;
}

std::string mae_rows_to_csv(const std::vector<MaeRow>& rows) {
  std::string out = "group,metric,mae,pairs,undefined\n";
  for (const MaeRow& row : rows) {
    out += row.group;
    out += ',';
    out += row.metric;
    out += ',';
    out += row.stats.defined() ? fmt_double(row.stats.mae()) : "undefined";
    out += ',';
    out += std::to_string(row.stats.pairs);
    out += ',';
    out += std::to_string(row.stats.undefined);
    out += '\n';
  }
  return out;
}

}  // namespace cmest
