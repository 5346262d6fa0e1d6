#pragma once
// Operator toolkit around the factorized linearization: D = d/dx - tanh(x) and
// its adjoint-like partner D* = -d/dx - tanh(x), the right inverse I of D*, the
// integrated-by-parts companion Itilde, boost-action identities, and verifiers.

#include <functional>
#include <string>
#include <vector>

#include "kinklab/field.hpp"

namespace kinklab {

struct OperatorReport {
  std::string name;
  double residual_sup = 0.0;
  double residual_l2 = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

OperatorReport make_report(std::string name, double sup, double l2, double tol);

// Overflow-safe hyperbolic helpers (valid for |x| far beyond exp overflow).
double sech(double x);
double ratio_cosh(double y, double x); // cosh(y)/cosh(x)
double ratio_sinh(double y, double x); // sinh(y)/cosh(x)

// D f = f' - tanh*f, D* f = -f' - tanh*f; both flip parity odd <-> even.
// tanh is not periodic, so the product tanh*f must be negligible at the domain
// wrap; the outermost samples are checked against boundary_threshold.
RealField apply_D(const RealField& f, double boundary_threshold = 1e-12);
RealField apply_Dstar(const RealField& f, double boundary_threshold = 1e-12);

// I[g](x) = -sech(x) \int_0^x cosh(y) g(y) dy, the right inverse of D*.
RealField apply_I(const RealField& g);
// Itilde[dg](x) = sech(x) \int_0^x sinh(y) dg(y) dy, where dg = g'.
// Satisfies I[g] = -tanh*g + Itilde[g'].
RealField apply_Itilde(const RealField& dg);

// x -> \int_0^x weight(y) g(y) dy by composite 4th-order quadrature on the
// lattice (generic weights; no rescaling, so keep weight*g representable).
RealField cumulative_from_origin(const RealField& g,
                                 const std::function<double(double)>& weight);

// sech(x) \int_0^x weight(y) y^{ypow} g(y) dy with weight cosh or sinh,
// evaluated by an exponential-split spectral inversion: every intermediate is
// bounded, and accuracy is spectral for resolved g. apply_I/apply_Itilde and
// the boost-action reductions are built on this.
enum class HypWeight { cosh_w, sinh_w };
RealField scaled_cumulative(const RealField& g, HypWeight w, int ypow = 0);

// Boost action Z = t d/dx + x d/dt applied through the integral operators:
//   Z(I[v])          = -t sech^2 v + \int_0^x K1 (Zv) + \int_0^x K2 (dv/dt)
//   Z(Itilde[v_x])   = t sech tanh v_x(0) + \int_0^x K3 (Z v_y) + \int_0^x K4 (dv_y/dt)
// evaluated via the kernels' separable reductions; Zv is formed internally
// from v (spectral derivative) and the supplied time derivative.
RealField z_action_I(const RealField& v, const RealField& vt, double t);
RealField z_action_Itilde(const RealField& vx, const RealField& vtx, double t);

// Pointwise kernel values K1..K4 (j = 1..4), in overflow-safe form. They decay
// exponentially in |x - y| on 0 <= y <= x and x <= y <= 0.
double kernel_K(int j, double x, double y);

// Smooth, rapidly decaying random test field: band-limited noise under a
// Gaussian envelope (boundary values ~1e-14), sup-normalized, deterministic.
RealField random_schwartz_field(const Grid& g, unsigned seed,
                                Parity parity = Parity::none);

// Commutator identities [x, <D>^k] = k <D>^{k-2} d/dx for k in {-1, 1, 2},
// [x, <D>^0] = 0, and [<D>, L] = -d/dx with L = <D>(x .) - i t d/dx.
std::vector<OperatorReport> verify_commutators(const Grid& g, unsigned seed = 20240501);

} // namespace kinklab
