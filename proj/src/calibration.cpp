#include "calibration.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace cmest {

CalibrationMode calibration_mode_from_name(const std::string& name) {
  if (name == "global" || name == "ts") return CalibrationMode::global;
  if (name == "classwise" || name == "csts") return CalibrationMode::classwise;
  fail(ErrorKind::invalid, "unknown calibration mode '" + name + "'");
}

const char* calibration_mode_name(CalibrationMode mode) {
  return mode == CalibrationMode::global ? "global" : "classwise";
}

namespace {

constexpr double kTempLo = 0.05;
constexpr double kTempHi = 20.0;
constexpr double kTempTol = 1e-4;

double binary_nll(const std::vector<double>& logits,
                  const std::vector<int>& labels, double temperature) {
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = sigmoid(logits[i] / temperature);
    // Guarded logs; the clamped logit keeps p away from exact 0/1 anyway.
    sum -= labels[i] == 1 ? std::log(std::max(p, 1e-300))
                          : std::log(std::max(1.0 - p, 1e-300));
  }
  return sum / static_cast<double>(logits.size());
}

double golden_section_min(const std::vector<double>& logits,
                          const std::vector<int>& labels) {
  constexpr double invphi = 0.6180339887498949;
  double a = kTempLo, b = kTempHi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = binary_nll(logits, labels, x1);
  double f2 = binary_nll(logits, labels, x2);
  while (b - a > kTempTol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = binary_nll(logits, labels, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = binary_nll(logits, labels, x2);
    }
  }
  return (a + b) / 2.0;
}

struct LogitSide {
  std::vector<double> logits;
  std::vector<int> labels;
};

double fit_side(const LogitSide& side, const char* what) {
  if (side.logits.empty())
    fail(ErrorKind::invalid, std::string("fit_temperature: ") + what + " empty");
  bool all_equal = true;
  for (double z : side.logits)
    if (z != side.logits.front()) {
      all_equal = false;
      break;
    }
  if (all_equal)
    fail(ErrorKind::invalid,
         std::string("fit_temperature: degenerate logits on ") + what);
  return golden_section_min(side.logits, side.labels);
}

}  // namespace

double temperature_nll(const ScoreSet& set, const TemperatureFit& fit) {
  set.require_labelled("temperature_nll");
  double sum = 0.0;
  for (const auto& r : set.records) {
    const double t = r.raw_score >= fit.threshold ? fit.t_pos : fit.t_neg;
    const double p = sigmoid(clamped_logit(r.raw_score) / t);
    sum -= *r.label == 1 ? std::log(std::max(p, 1e-300))
                         : std::log(std::max(1.0 - p, 1e-300));
  }
  return sum / static_cast<double>(set.size());
}

TemperatureFit fit_temperature(const ScoreSet& val, CalibrationMode mode) {
  val.require_labelled("fit_temperature");
  std::size_t pos_labels = 0;
  for (const auto& r : val.records)
    pos_labels += static_cast<std::size_t>(*r.label);
  if (pos_labels == 0 || pos_labels == val.size())
    fail(ErrorKind::invalid, "fit_temperature: both classes required");

  LogitSide all, pos, neg;
  for (const auto& r : val.records) {
    const double z = clamped_logit(r.raw_score);
    all.logits.push_back(z);
    all.labels.push_back(*r.label);
    LogitSide& side = r.raw_score >= val.threshold ? pos : neg;
    side.logits.push_back(z);
    side.labels.push_back(*r.label);
  }

  TemperatureFit fit;
  fit.mode = mode;
  fit.threshold = val.threshold;
  if (mode == CalibrationMode::global) {
    const double t = fit_side(all, "fitting set");
    fit.t_pos = fit.t_neg = t;
  } else {
    fit.t_pos = fit_side(pos, "positive prediction side");
    fit.t_neg = fit_side(neg, "negative prediction side");
  }
  TemperatureFit identity = fit;
  identity.t_pos = identity.t_neg = 1.0;
  fit.nll_before = temperature_nll(val, identity);
  fit.nll_after = temperature_nll(val, fit);
  return fit;
}

ScoreSet apply_temperature(const ScoreSet& set, const TemperatureFit& fit) {
  ScoreSet out = set;
  for (auto& r : out.records) {
    const double t = r.raw_score >= fit.threshold ? fit.t_pos : fit.t_neg;
    r.raw_score = sigmoid(clamped_logit(r.raw_score) / t);
  }
  return out;
}

std::string TemperatureFit::to_json() const {
  nlohmann::ordered_json obj;
  obj["mode"] = calibration_mode_name(mode);
  if (mode == CalibrationMode::global) {
    obj["temperature"] = t_pos;
  } else {
    obj["temperature_positive"] = t_pos;
    obj["temperature_negative"] = t_neg;
  }
  obj["threshold"] = threshold;
  obj["nll_before"] = nll_before;
  obj["nll_after"] = nll_after;
  return obj.dump(2);
}

TemperatureFit TemperatureFit::from_json(const std::string& text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("calibration file: ") + e.what());
  }
  TemperatureFit fit;
  try {
    fit.mode = calibration_mode_from_name(obj.at("mode").get<std::string>());
    if (fit.mode == CalibrationMode::global) {
      fit.t_pos = fit.t_neg = obj.at("temperature").get<double>();
    } else {
      fit.t_pos = obj.at("temperature_positive").get<double>();
      fit.t_neg = obj.at("temperature_negative").get<double>();
    }
    fit.threshold = obj.value("threshold", 0.5);
    fit.nll_before = obj.value("nll_before", 0.0);
    fit.nll_after = obj.value("nll_after", 0.0);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("calibration file: ") + e.what());
  }
  if (!(fit.t_pos > 0.0) || !(fit.t_neg > 0.0))
    fail(ErrorKind::parse, "calibration file: temperatures must be > 0");
  return fit;
}

void TemperatureFit::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write calibration file: " + path);
  out << to_json() << '\n';
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

TemperatureFit TemperatureFit::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open calibration file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace cmest
