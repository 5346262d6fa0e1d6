#include "kinklab/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kinklab {

namespace {

bool fft_friendly(int n) {
  for (int p : {2, 3, 5, 7})
    while (n % p == 0) n /= p;
  return n == 1;
}

} // namespace

Grid make_grid(int n_points, double half_length) {
  if (n_points < 16 || n_points % 2 != 0)
    throw std::invalid_argument("make_grid: n_points must be even and >= 16, got " +
                                std::to_string(n_points));
  if (!fft_friendly(n_points))
    throw std::invalid_argument("make_grid: n_points must factor into {2,3,5,7}, got " +
                                std::to_string(n_points));
  if (!(half_length > 0.0))
    throw std::invalid_argument("make_grid: half_length must be positive");

  Grid g;
  g.n = n_points;
  g.half_length = half_length;
  g.dx = 2.0 * half_length / n_points;
  g.dxi = M_PI / half_length;
  g.x.resize(n_points);
  g.xi.resize(n_points);
  for (int j = 0; j < n_points; ++j) g.x[j] = -half_length + j * g.dx;
  g.x[n_points / 2] = 0.0; // exact origin sample, no rounding residue
  for (int k = 0; k < n_points; ++k) {
    int ks = (k < n_points / 2) ? k : k - n_points;
    g.xi[k] = g.dxi * ks;
  }
  return g;
}

RealField make_real_field(const Grid& g, Parity p) {
  return RealField{&g, std::vector<double>(g.n, 0.0), p};
}

ComplexField make_complex_field(const Grid& g) {
  return ComplexField{&g, std::vector<cplx>(g.n, cplx{0.0, 0.0})};
}

SpectralField make_spectral_field(const Grid& g) {
  return SpectralField{&g, std::vector<cplx>(g.n, cplx{0.0, 0.0})};
}

RealField sample_field(const Grid& g, const std::function<double(double)>& f, Parity p) {
  RealField out = make_real_field(g, p);
  for (int j = 0; j < g.n; ++j) out.values[j] = f(g.x[j]);
  return out;
}

void parity_project_inplace(RealField& f, Parity parity) {
  if (parity == Parity::none) return;
  const Grid& g = *f.grid;
  const double sign = (parity == Parity::odd) ? -1.0 : 1.0;
  auto& v = f.values;
  for (std::size_t j = 0; j <= static_cast<std::size_t>(g.n) / 2; ++j) {
    std::size_t r = g.rev(j);
    double a = 0.5 * (v[j] + sign * v[r]);
    v[j] = a;
    v[r] = sign * a;
  }
  f.parity = parity;
}

void parity_project_inplace(ComplexField& f, Parity parity) {
  if (parity == Parity::none) return;
  const Grid& g = *f.grid;
  const double sign = (parity == Parity::odd) ? -1.0 : 1.0;
  auto& v = f.values;
  for (std::size_t j = 0; j <= static_cast<std::size_t>(g.n) / 2; ++j) {
    std::size_t r = g.rev(j);
    cplx a = 0.5 * (v[j] + sign * v[r]);
    v[j] = a;
    v[r] = sign * a;
  }
}

RealField parity_project(const RealField& f, Parity parity) {
  RealField out = f;
  parity_project_inplace(out, parity);
  return out;
}

double parity_error(const RealField& f, Parity parity) {
  if (parity == Parity::none) return 0.0;
  const Grid& g = *f.grid;
  const double sign = (parity == Parity::odd) ? -1.0 : 1.0;
  double worst = 0.0;
  for (std::size_t j = 0; j <= static_cast<std::size_t>(g.n) / 2; ++j)
    worst = std::max(worst, 0.5 * std::abs(f.values[j] - sign * f.values[g.rev(j)]));
  return worst;
}

double parity_error(const ComplexField& f, Parity parity) {
  if (parity == Parity::none) return 0.0;
  const Grid& g = *f.grid;
  const double sign = (parity == Parity::odd) ? -1.0 : 1.0;
  double worst = 0.0;
  for (std::size_t j = 0; j <= static_cast<std::size_t>(g.n) / 2; ++j)
    worst = std::max(worst, 0.5 * std::abs(f.values[j] - sign * f.values[g.rev(j)]));
  return worst;
}

} // namespace kinklab
