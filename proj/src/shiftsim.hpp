#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "estimators.hpp"
#include "metrics.hpp"
#include "scores.hpp"

namespace cmest {

inline constexpr std::uint64_t kDefaultSeed = 1729;

// Distribution of the true conditional q = P(y=1|x).
struct LatentLaw {
  enum class Kind { uniform, beta };
  Kind kind = Kind::uniform;
  double a = 1.0;
  double b = 1.0;

  double mean() const;
  static LatentLaw parse(const std::string& text);  // "uniform" | "beta:a,b"
  std::string text() const;
};

struct GroupSpec {
  LatentLaw law;
  double distortion = 1.0;
};

// Synthetic score generator standing in for a trained classifier: draws
// q from the latent law, the label from Bernoulli(q) and reports
// score = sigmoid(distortion * logit(q)). distortion = 1 gives perfectly
// calibrated scores; values above 1 sharpen them (overconfident), values
// below 1 flatten them. A temperature fit on the output recovers
// T ~= distortion.
struct GeneratorSpec {
  std::size_t n = 1000;
  double prevalence = 0.5;  // in (0,1)
  LatentLaw law;
  double distortion = 1.0;
  // When present, records are drawn from per-group laws and tagged
  // "majority"/"minority"; majority_fraction controls the block sizes.
  std::optional<std::pair<GroupSpec, GroupSpec>> groups;
  double majority_fraction = 0.5;
  std::uint64_t seed = kDefaultSeed;
  double threshold = 0.5;

  static GeneratorSpec from_config(const ConfigMap& cfg);
};

// Deterministic in the spec (including the seed). When the requested
// prevalence differs from the latent mean, draws are rejection-sampled by
// class until round(n * prevalence) positives and the complement of
// negatives are collected; more than 10*n attempts is an error.
ScoreSet generate_synthetic(const GeneratorSpec& spec);

// Exact-prevalence bootstrap: round(n * target) positives and the rest
// negatives, drawn uniformly with replacement from the class pools.
ScoreSet resample_prevalence(const ScoreSet& pool, double target_prevalence,
                             std::size_t n, std::uint64_t seed);

// Draws round(n * majority_fraction) records from the majority pool and
// the rest from the minority pool, stratified by class within each pool
// so the combined prevalence hits round(n * reference_prevalence) / n.
ScoreSet mix_groups(const ScoreSet& majority, const ScoreSet& minority,
                    double majority_fraction, std::size_t n,
                    std::uint64_t seed, double reference_prevalence);

struct SweepConfig {
  enum class Kind { prevalence, covariate };
  Kind kind = Kind::prevalence;
  std::vector<double> axis;  // strictly increasing shift-parameter values
  std::size_t repetitions = 50;
  std::size_t sample_n = 1000;
  std::uint64_t master_seed = kDefaultSeed;
  int ace_bins = kDefaultAceBins;
  std::optional<double> reference_prevalence;  // covariate; default: val's
  std::vector<Source> methods;

  static SweepConfig from_config(const ConfigMap& cfg);
};

// Parses "lo:hi:step" (values snapped to 9 decimals) or a comma list.
std::vector<double> parse_axis(const std::string& text);

struct ValueMean {
  double sum = 0.0;
  std::size_t count = 0;
  bool defined() const { return count > 0; }
  double mean() const { return sum / static_cast<double>(count); }
};

struct PairStats {
  double abs_sum = 0.0;
  std::size_t pairs = 0;      // repetitions where both sides were defined
  std::size_t undefined = 0;  // repetitions dropped for an undefined side
  bool defined() const { return pairs > 0; }
  double mae() const { return abs_sum / static_cast<double>(pairs); }
};

struct SweepLevel {
  double level = 0.0;
  std::array<ValueMean, kMetricCount> realized{};
  double rbs_mean = 0.0;
  double ace_mean = 0.0;
  // Indexed [method][metric], methods in config order.
  std::vector<std::array<ValueMean, kMetricCount>> estimated;
  std::vector<std::array<PairStats, kMetricCount>> mae;
  std::vector<std::size_t> method_errors;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepLevel> levels;
  // MAE pooled over every (level, repetition), indexed [method][metric].
  std::vector<std::array<PairStats, kMetricCount>> aggregate_mae;

  // Long format: level,repetition_mean,metric,method,realized,estimated,
  // rbs,ace — one row per level x method x metric, values averaged over
  // the repetitions (the repetition_mean column carries that count).
  std::string to_csv() const;
  // level,method,metric,mae,pairs,undefined with trailing level=all rows.
  std::string summary_csv() const;
};

// Runs the full grid; every (level, repetition) cell gets its own seed
// derived from (master_seed, level index, repetition index), so any jobs
// count produces bit-identical results. pool_b is the minority pool and
// only read for covariate sweeps.
SweepResult run_sweep(const SweepConfig& cfg, const ScoreSet& val,
                      const ScoreSet& pool_a, const ScoreSet* pool_b,
                      int jobs = 1);

// Standalone MAE table over annotated (realized, estimated) report pairs.
struct MaePair {
  double level = 0.0;
  Source method = Source::cbpe;
  MetricReport realized;
  MetricReport estimated;
};

enum class MaeGroupBy { method, metric, level };

struct MaeRow {
  std::string group;
  std::string metric;
  PairStats stats;
};

std::vector<MaeRow> mae_report(const std::vector<MaePair>& pairs,
                               MaeGroupBy group_by);
std::string mae_rows_to_csv(const std::vector<MaeRow>& rows);

}  // namespace cmest
