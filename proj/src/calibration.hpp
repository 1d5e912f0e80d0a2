#pragma once

#include <string>

#include "scores.hpp"

namespace cmest {

enum class CalibrationMode { global, classwise };

CalibrationMode calibration_mode_from_name(const std::string& name);
const char* calibration_mode_name(CalibrationMode mode);

// Temperature(s) fitted on a labelled set. In classwise mode the positive
// temperature applies to records predicted positive at the fitting
// threshold and the negative temperature to the rest.
struct TemperatureFit {
  CalibrationMode mode = CalibrationMode::global;
  double t_pos = 1.0;   // the single temperature in global mode
  double t_neg = 1.0;   // equals t_pos in global mode
  double threshold = 0.5;
  double nll_before = 0.0;
  double nll_after = 0.0;

  std::string to_json() const;
  static TemperatureFit from_json(const std::string& text);
  void save(const std::string& path) const;
  static TemperatureFit load(const std::string& path);
};

// Mean binary negative log-likelihood of sigmoid(logit(score)/T) against
// the labels.
double temperature_nll(const ScoreSet& set, const TemperatureFit& fit);

// Minimises the NLL over T in [0.05, 20] by golden-section search
// (|dT| < 1e-4). Classwise mode fits the two prediction sides of the
// set's threshold independently. Requires both classes and non-constant
// scores.
TemperatureFit fit_temperature(const ScoreSet& val, CalibrationMode mode);

// score' = sigmoid(logit(score)/T_side); labels, groups and threshold are
// preserved.
ScoreSet apply_temperature(const ScoreSet& set, const TemperatureFit& fit);

}  // namespace cmest
