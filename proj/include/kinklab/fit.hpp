#pragma once
// Small least-squares helpers for decay-rate estimation: straight-line fits,
// log-log power-law fits, and branch-safe phase unwrapping for slowly
// drifting complex arguments.

#include <vector>

namespace kinklab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;      // coefficient of determination, 1 for an exact fit
  int points = 0;
  bool ok = false;      // false when fewer than two usable points remain
};

// Ordinary least squares y ~ slope*x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Power-law fit y ~ C * t^slope through log-log regression. Points with
// t <= 0 or y <= 0 are dropped; if fewer than two survive, ok = false and
// the fit is degenerate (all zeros).
LineFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y);

// Nearest-branch continuation of a phase sequence: each output differs from
// its predecessor by less than pi, with multiples of 2 pi added as needed.
std::vector<double> unwrap_phase(const std::vector<double>& raw);

} // namespace kinklab
