#pragma once

#include <functional>
#include <vector>

#include "kinklab/field.hpp"
#include "kinklab/operators.hpp"

namespace kinklab {

// Closed-form Fourier data for the sech-family coefficient functions, the
// normal-form multipliers built on them, and a principal-value convolution
// engine used to validate the distributional identities behind the spectral
// representation of the half-line integral operator.

// sqrt(pi/2) sech(pi xi / 2)
double sech_hat(double xi);

// The transform of tanh is -i m(xi) with density m(xi) = sqrt(pi/2)
// cosech(pi xi / 2), understood in the principal-value sense; the delta-free
// density m is returned. Throws std::domain_error at xi = 0 where only the
// principal value exists.
double tanh_hat_pv(double xi);

// sqrt(pi/2) xi / sinh(pi xi / 2), extended by continuity to its limit at 0.
double sech2_hat(double xi);

// -(1/8) sqrt(pi/2) (xi^2 - 3)(xi^2 + 1) sech(pi xi / 2).
// Vanishes at xi = +-sqrt(3): the quadratic coefficient is non-resonant at
// twice the mass frequency.
double alpha1_hat(double xi);

struct NormalFormSymbols {
  double alpha11;
  double alpha12;
  double alpha13;
};

// The three symbols weighting v(t,0)^2, |v(t,0)|^2, conj(v(t,0))^2 in the
// quadratic normal form. alpha11 is evaluated through the cancelled product
// (1/16) sqrt(pi/2) (2 + <xi>)(xi^2 + 1) sech(pi xi / 2) / <xi>, which removes
// the (2 - <xi>)^{-1} singularity at xi = +-sqrt(3) analytically.
NormalFormSymbols normal_form_symbols(double xi);

struct CoefficientSet {
  RealField alpha1;  // 3 sech^3 tanh^2, even
  RealField alpha2;  // (2 sech - 6 sech^3) tanh, odd
  RealField alpha3;  // -2 sech + 3 sech^3, even
  RealField alpha11; // inverse transforms of the normal-form symbols, even
  RealField alpha12;
  RealField alpha13;
};

CoefficientSet make_coefficients(const Grid& g);

// (PV Cosech * q)(xi) with Cosech(s) = cosech(pi s / 2), computed as a
// symmetric-pair sum over s = (k + 1/2) h: the pairing cancels the 1/s pole
// analytically. Mesh is uniform out to s = 12 and geometrically coarsened to
// s = 48, beyond which the kernel is below 1e-30.
double pv_cosech_convolve(const std::function<double(double)>& q, double xi,
                          double h);

// Lattice-sampled variant: q lives on the uniform lattice eta_j =
// (j - center) * dxi and pair values at the half-lattice offsets come from
// linear interpolation, so the total error is second order in the exclusion
// radius s0 = dxi / 2.
double pv_cosech_convolve_lattice(const std::vector<double>& q, int center,
                                  double dxi);

struct PvConvergence {
  double values[3];  // lattice evaluations at dxi, dxi/2, dxi/4
  double richardson; // second-order extrapolation of the finest pair
  double slope;      // log2 of the ratio of successive differences
  double residual;   // |richardson - closed form| for the test integral
};

// Runs the lattice engine on a convolution with a known closed form at three
// nested resolutions and measures the convergence order; the slope is
// expected near 2.
PvConvergence measure_pv_convergence();

// Identity reports: the two pointwise convolution identities of the sech and
// cosech kernels checked by direct quadrature, and the two distributional
// identities checked weakly against a fixed family of Gaussian probes.
std::vector<OperatorReport> convolution_identities();

// Fourier-side evaluation of the half-line integral operator: the rank-one
// Sech(xi) B(g-hat) term, the PV cosech convolution A(g-hat) (with
// half-lattice samples obtained by a shift-theorem transform), and the
// diagonal term i xi <xi>^{-2} g-hat(xi). The three pieces are the transforms
// of the resolvent factorization c(g) sech - tanh <D>^{-2} g + d/dx <D>^{-2} g
// of the operator; all three are needed to match to_spectral(apply_I(g)).
SpectralField I_hat(const SpectralField& gh);

} // namespace kinklab
