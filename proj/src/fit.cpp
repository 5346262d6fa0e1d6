#include "kinklab/fit.hpp"

#include <cmath>

namespace kinklab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit out;
  const int n = static_cast<int>(std::min(x.size(), y.size()));
  if (n < 2) return out;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) return out; // all abscissae coincide
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  // r2 = 1 - SSres/SStot, with the degenerate flat-data case mapped to 1.
  if (syy > 0.0) {
    double ssres = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - (out.slope * x[i] + out.intercept);
      ssres += r * r;
    }
    out.r2 = 1.0 - ssres / syy;
  } else {
    out.r2 = 1.0;
  }
  out.points = n;
  out.ok = true;
  return out;
}

LineFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  const size_t n = std::min(t.size(), y.size());
  lx.reserve(n);
  ly.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (t[i] > 0.0 && y[i] > 0.0 && std::isfinite(t[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(t[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  return fit_line(lx, ly);
}

std::vector<double> unwrap_phase(const std::vector<double>& raw) {
  std::vector<double> out(raw.size());
  if (raw.empty()) return out;
  constexpr double two_pi = 6.283185307179586476925286766559;
  out[0] = raw[0];
  for (size_t i = 1; i < raw.size(); ++i) {
    double candidate = raw[i];
    const double prev = out[i - 1];
    candidate -= two_pi * std::round((candidate - prev) / two_pi);
    out[i] = candidate;
  }
  return out;
}

} // namespace kinklab
