#include "kinklab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

#include "kinklab/kernels.hpp"

namespace kinklab {

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * M_PI);

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// Plans are created once per size under a lock (FFTW planning is not
// thread-safe) and then shared; fftw_execute_dft on distinct buffers is safe.
// FFTW_ESTIMATE keeps planning deterministic; FFTW_UNALIGNED lets us execute
// on ordinary std::vector storage. Plans are in-place.
const PlanPair& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, PlanPair>* cache = new std::map<int, PlanPair>();
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache->find(n);
  if (it != cache->end()) return it->second;
  std::vector<cplx> buf(n);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  PlanPair pp;
  pp.fwd = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  pp.bwd = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!pp.fwd || !pp.bwd) throw std::runtime_error("fftw plan creation failed");
  return cache->emplace(n, pp).first->second;
}

void run_inplace(fftw_plan plan, std::vector<cplx>& buf) {
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plan, p, p);
}

void check_grid(const Grid* g, std::size_t len, const char* who) {
  if (!g || len != static_cast<std::size_t>(g->n))
    throw std::invalid_argument(std::string(who) + ": field/grid length mismatch");
}

} // namespace

SpectralField to_spectral(const RealField& f) {
  check_grid(f.grid, f.values.size(), "to_spectral");
  const Grid& g = *f.grid;
  std::vector<cplx> buf(g.n);
  for (int j = 0; j < g.n; ++j) buf[j] = f.values[j];
  run_inplace(plans_for(g.n).fwd, buf);
  const double s = g.dx / kSqrt2Pi;
  SpectralField out{&g, std::move(buf)};
  for (int k = 0; k < g.n; ++k) out.coefficients[k] *= (k & 1) ? -s : s;
  return out;
}

SpectralField to_spectral(const ComplexField& f) {
  check_grid(f.grid, f.values.size(), "to_spectral");
  const Grid& g = *f.grid;
  std::vector<cplx> buf = f.values;
  run_inplace(plans_for(g.n).fwd, buf);
  const double s = g.dx / kSqrt2Pi;
  SpectralField out{&g, std::move(buf)};
  for (int k = 0; k < g.n; ++k) out.coefficients[k] *= (k & 1) ? -s : s;
  return out;
}

ComplexField to_physical_complex(const SpectralField& gf) {
  check_grid(gf.grid, gf.coefficients.size(), "to_physical");
  const Grid& g = *gf.grid;
  std::vector<cplx> buf(g.n);
  for (int k = 0; k < g.n; ++k)
    buf[k] = (k & 1) ? -gf.coefficients[k] : gf.coefficients[k];
  run_inplace(plans_for(g.n).bwd, buf);
  const double s = g.dxi / kSqrt2Pi;
  ComplexField out{&g, std::move(buf)};
  for (int j = 0; j < g.n; ++j) out.values[j] *= s;
  return out;
}

RealField to_physical(const SpectralField& gf, Parity p) {
  ComplexField c = to_physical_complex(gf);
  RealField out{gf.grid, std::vector<double>(c.values.size()), p};
  for (std::size_t j = 0; j < c.values.size(); ++j) out.values[j] = c.values[j].real();
  return out;
}

SpectralField apply_multiplier(const SpectralField& g,
                               const std::function<cplx(double)>& symbol) {
  check_grid(g.grid, g.coefficients.size(), "apply_multiplier");
  SpectralField out{g.grid, std::vector<cplx>(g.coefficients.size())};
  for (int k = 0; k < g.grid->n; ++k) {
    cplx m = symbol(g.grid->xi[k]);
    if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
      throw std::domain_error("apply_multiplier: non-finite symbol at xi = " +
                              std::to_string(g.grid->xi[k]));
    out.coefficients[k] = g.coefficients[k] * m;
  }
  out.coefficients[g.grid->nyquist()] = 0.0;
  return out;
}

void apply_multiplier_inplace(SpectralField& g, const std::vector<cplx>& table) {
  check_grid(g.grid, table.size(), "apply_multiplier_inplace");
  kern::ops().cmul(g.coefficients.data(), table.data(), g.coefficients.data(),
                   g.coefficients.size());
  g.coefficients[g.grid->nyquist()] = 0.0;
}

void apply_multiplier_inplace(SpectralField& g, const std::vector<double>& table) {
  check_grid(g.grid, table.size(), "apply_multiplier_inplace");
  kern::ops().cmul_rs(table.data(), g.coefficients.data(), g.coefficients.size());
  g.coefficients[g.grid->nyquist()] = 0.0;
}

std::vector<double> real_symbol_table(const Grid& g,
                                      const std::function<double(double)>& symbol) {
  std::vector<double> t(g.n);
  for (int k = 0; k < g.n; ++k) {
    t[k] = symbol(g.xi[k]);
    if (!std::isfinite(t[k]))
      throw std::domain_error("real_symbol_table: non-finite symbol at xi = " +
                              std::to_string(g.xi[k]));
  }
  t[g.nyquist()] = 0.0;
  return t;
}

std::vector<cplx> symbol_table(const Grid& g, const std::function<cplx(double)>& symbol) {
  std::vector<cplx> t(g.n);
  for (int k = 0; k < g.n; ++k) {
    t[k] = symbol(g.xi[k]);
    if (!std::isfinite(t[k].real()) || !std::isfinite(t[k].imag()))
      throw std::domain_error("symbol_table: non-finite symbol at xi = " +
                              std::to_string(g.xi[k]));
  }
  t[g.nyquist()] = 0.0;
  return t;
}

std::vector<double> dealias_mask(const Grid& g, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("dealias_mask: fraction must lie in (0, 1]");
  std::vector<double> m(g.n, 0.0);
  const double cut = fraction * g.xi_max();
  for (int k = 0; k < g.n; ++k) m[k] = (std::abs(g.xi[k]) <= cut) ? 1.0 : 0.0;
  m[g.nyquist()] = 0.0;
  return m;
}

void spectral_parity_project(SpectralField& g, Parity parity) {
  if (parity == Parity::none) return;
  const Grid& gr = *g.grid;
  const double sign = (parity == Parity::odd) ? -1.0 : 1.0;
  auto& c = g.coefficients;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(gr.n) / 2; ++k) {
    std::size_t r = gr.rev(k);
    cplx a = 0.5 * (c[k] + sign * c[r]);
    c[k] = a;
    c[r] = sign * a;
  }
  c[gr.nyquist()] = 0.0;
}

double l2_norm_sq(const RealField& f) {
  return kern::ops().l2_sq(f.values.data(), f.values.size()) * f.grid->dx;
}

double l2_norm_sq(const ComplexField& f) {
  return kern::ops().l2_sq_c(f.values.data(), f.values.size()) * f.grid->dx;
}

double l2_norm_sq(const SpectralField& g) {
  return kern::ops().l2_sq_c(g.coefficients.data(), g.coefficients.size()) * g.grid->dxi;
}

RealField spectral_derivative(const RealField& f) {
  SpectralField s = to_spectral(f);
  const Grid& g = *f.grid;
  for (int k = 0; k < g.n; ++k) s.coefficients[k] *= cplx{0.0, g.xi[k]};
  s.coefficients[g.nyquist()] = 0.0;
  Parity p = f.parity == Parity::odd    ? Parity::even
             : f.parity == Parity::even ? Parity::odd
                                        : Parity::none;
  return to_physical(s, p);
}

} // namespace kinklab
