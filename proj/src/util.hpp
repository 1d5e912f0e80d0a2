#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cmest {

// Shortest round-trip decimal representation. All CSV/JSON output goes
// through this so that identical doubles always produce identical bytes.
std::string fmt_double(double v);

double sigmoid(double z);

// logit with the input clamped to [1e-7, 1-1e-7] so saturated scores do
// not produce infinities.
double clamped_logit(double s);

// Clamps v to [0,1]; second element reports whether clamping happened.
std::pair<double, bool> clip01(double v);

// Mean computed over an ascending-sorted copy of the values. Summation
// order is therefore a function of the multiset only, which makes every
// estimate built on means invariant under record permutation.
double stable_mean(std::span<const double> values);

// Linear-interpolation quantile (the usual type-7 definition) of an
// ascending-sorted array, p in [0,1].
double sorted_quantile(std::span<const double> sorted, double p);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Spearman rank correlation with midranks for ties.
double spearman_rho(std::span<const double> a, std::span<const double> b);

}  // namespace cmest
