#pragma once
// Post-processing for the perturbation runs: scattering profile extraction,
// bootstrap-norm evaluation, the integrating-factor phase law, asymptotic
// field reconstruction, linear-propagator asymptotics, weighted local-decay
// fits, the resonant profile ODE residual, and the stationary-phase geometry
// of the cubic frequency interactions.

#include <array>
#include <complex>
#include <vector>

#include "kinklab/dynamics.hpp"
#include "kinklab/field.hpp"
#include "kinklab/fit.hpp"
#include "kinklab/operators.hpp"

namespace kinklab {

// ---------------------------------------------------------------------------
// Shared helpers.

// 4-point Lagrange interpolation of FFT-ordered spectral coefficients at an
// arbitrary frequency. Frequencies beyond the representable band give 0.
cplx interpolate_spectral(const SpectralField& f, double xi);

// Comparison radius 0.8 * min(t, L - 5): sup norms and asymptotics are only
// meaningful away from the wrap seam of the periodic truncation.
double light_cone_radius(double t, const Grid& g);

double sup_abs_within(const RealField& f, double radius);
double sup_abs_within(const ComplexField& f, double radius);

// sup_k |vhat(xi_k) + conj(vhat(-xi_k)) - what(xi_k)|: the half-wave variable
// must recombine into the real field w. A cheap per-snapshot consistency gate.
double hermitian_symmetry_defect(const SimState& s);

// ---------------------------------------------------------------------------
// Profile and bootstrap norms.

struct ProfileSnapshot {
  double t = 0.0;
  // f_hat(t, xi) = exp(-i t <xi>) vhat(t, xi): the free flow peeled off the
  // half-wave variable. Constant in t for a linear run.
  SpectralField f_hat;
};

ProfileSnapshot extract_profile(const SimState& s);

struct BootstrapNorms {
  double t = 0.0;
  double sup_v = 0.0;           // sup_x |v|
  double H2_v = 0.0;            // ||<D>^2 v||_L2
  double H1Lv = 0.0;            // ||<D> L v||_L2, L v = <D>(x v) - i t dx v
  double xv_L2 = 0.0;           // ||x v||_L2
  double profile_sup = 0.0;     // sup_xi <xi>^{3/2} |f_hat|
  double localdecay_dxv = 0.0;  // ||<x>^{-1} dx v||_L2
  // Single-time contribution to the bootstrap functional:
  //   <t>^{1/2} sup_v + <t>^{-delta} (H2_v + H1Lv) + <t>^{-1-delta} xv_L2
  //   + profile_sup.
  double n_weighted = 0.0;
};

// profile must match the state (same grid, same capture time).
BootstrapNorms bootstrap_norms(const SimState& s, const ProfileSnapshot& profile,
                               double delta);

// ---------------------------------------------------------------------------
// Integrating factor.

struct PhiTable {
  const Grid* grid = nullptr;
  std::vector<double> times;                // times[0] = 1
  std::vector<std::vector<double>> values;  // values[i][k] at (times[i], xi_k)
};

// Phi(t, xi) = 1/4 <xi>^{-7} (1+3 xi^2) int_1^t |<xi>^{3/2} f_hat(s)|^2 ds/s,
// accumulated by the trapezoid rule in log-time (exact for profiles whose
// weighted modulus is constant in t). Requires snapshots starting at t = 1
// with strictly increasing times; throws std::invalid_argument otherwise.
PhiTable accumulate_Phi(const std::vector<ProfileSnapshot>& snapshots);

// ---------------------------------------------------------------------------
// Modified scattering.

struct ModifiedScatteringReport {
  const Grid* grid = nullptr;
  std::vector<double> times;       // snapshot times
  std::vector<double> xi_samples;  // probe frequencies for the phase law
  // Phi[i][j]: integrating factor at (times[i], xi_samples[j]).
  std::vector<std::vector<double>> Phi;
  // Limiting-amplitude estimate W(xi) = <xi>^{3/2} f_hat e^{i Phi} from the
  // final snapshot, on the snapshot grid (FFT ordering).
  SpectralField W_hat_estimate;
  // sup_xi |g(t_{i+1}) - g(t_i)| for g = <xi>^{3/2} f_hat e^{i Phi} and the
  // fitted power law of these differences against the left time t_i.
  std::vector<double> cauchy_times;
  std::vector<double> cauchy_sup;
  double stabilization_exponent = 0.0;
  LineFit stabilization_fit;
  // Phase law at the probes: psi_predicted = 1/4 <xi>^{-7} (1+3 xi^2) |W|^2,
  // psi_measured = -d(arg f_hat)/d(log t) over the fit window.
  std::vector<double> psi_predicted;
  std::vector<double> psi_measured;
};

// Requires >= 4 snapshots spanning at least a decade of time. For a linear
// run (constant profile) pass linear_flow = true: the integrating factor is
// skipped and the Cauchy differences compare the raw weighted profile.
// phase_fit_t_min/max select the snapshots used for the arg-drift regression;
// if fewer than two fall inside, all snapshots from the second onward enter.
ModifiedScatteringReport modified_scattering_check(
    const std::vector<ProfileSnapshot>& snapshots,
    const std::vector<double>& xi_samples = {0.0, 0.5, 1.0},
    bool linear_flow = false, double phase_fit_t_min = 50.0,
    double phase_fit_t_max = 250.0);

// ---------------------------------------------------------------------------
// Asymptotic reconstruction.

// u_asym(t, x) = -2 Re( e^{i pi/4} t^{-1/2} int_0^x (cosh y / cosh x) e^{i rho}
//                e^{-i psi(y/rho) log t} W(y/rho) dy ),  rho = sqrt(t^2 - y^2),
// with the integrand cut off outside |y| < t and
// psi(z) = 1/4 <z>^{-7} (1+3 z^2) |W(z)|^2. Composite trapezoid on the output
// lattice; W is interpolated from W_hat's own grid. Throws for t < 1.
RealField asymptotic_reconstruction(const SpectralField& W_hat, double t,
                                    const Grid& g);

// ---------------------------------------------------------------------------
// Linear propagator asymptotics.

// Compares the exact spectral evolution e^{it<D>} f0 against the stationary
// phase main term t^{-1/2} e^{i pi/4} e^{i rho} <xi0>^{3/2} f0_hat(xi0) with
// rho = sqrt(t^2 - x^2), xi0 = -x/rho, inside the light-cone guard.
// residual_sup/residual_l2 are the guarded difference norms; the tolerance is
// the t^{-2/3}-scaled bound C ||<x> f0||_{H^2} with a frozen constant.
OperatorReport linear_asymptotics_check(const RealField& f0, double t);

// Guarded sup of |e^{it<D>} f0| itself (for decay-exponent fits).
double linear_evolution_sup(const RealField& f0, double t);

// ---------------------------------------------------------------------------
// Weighted local decay.

struct LocalDecaySample {
  double t = 0.0;
  double dxv_weighted = 0.0;  // ||<x>^{-1} dx v||_L2
  double v_weighted = 0.0;    // ||<x>^{-1/2} v||_L2
};

LocalDecaySample measure_local_decay(double t, const ComplexField& v);

struct LocalDecayReport {
  bool degenerate = false;  // all samples vanish; no slope is defined
  LineFit dxv_fit;          // expected near -1 for the perturbation runs
  LineFit v_fit;            // expected near -1/2 for the free flow
  std::vector<LocalDecaySample> samples;
};

// Requires >= 6 samples whose times span at least a decade.
LocalDecayReport local_decay_check(const std::vector<LocalDecaySample>& samples);

// ---------------------------------------------------------------------------
// Profile ODE residual.

// One centered-difference stencil: captures at t - Delta, t, t + Delta along
// with the origin values v(t, 0) entering the quadratic correction
// r_hat = <xi>^{3/2} e^{-it<xi>} F[B(v,v)].
struct ProfileTriple {
  ProfileSnapshot minus, center, plus;
  cplx v0_minus{}, v0_center{}, v0_plus{};
};

struct OdeResidualSample {
  double t = 0.0;
  double delta = 0.0;
  double sup_residual = 0.0;  // sup_xi |d/dt(<xi>^{3/2} f_hat + r_hat) - RHS|
  double weighted = 0.0;      // sup_residual * t^{6/5}
};

struct OdeResidualReport {
  std::vector<OdeResidualSample> samples;
  LineFit trend;               // power law of `weighted` against t
  bool non_increasing = false; // trend slope <= 0
};

// The four explicit resonant right-hand-side terms at (center.t, xi),
// which = 1..4: the xi/3 cubic, the self-phase term, the reflected-conjugate
// term, and the fully conjugated xi/3 cubic.
cplx profile_ode_rhs_term(int which, double xi, const ProfileSnapshot& center);

// Evaluates the profile ODE residual on each triple. Triples must be
// equispaced in time; spacing beyond 4 * max(0.5, t/100) is rejected as too
// coarse for the centered difference.
OdeResidualReport profile_ode_residual(const std::vector<ProfileTriple>& triples);

// ---------------------------------------------------------------------------
// Stationary-phase geometry.

// Cubic interaction phases, j = 1..4, with output frequency xi = a + b + c:
//   phi_1 = -<xi> + <a> + <b> + <c>     phi_2 = -<xi> + <a> - <b> + <c>
//   phi_3 = -<xi> + <a> - <b> - <c>     phi_4 = -<xi> - <a> - <b> - <c>
double phase_value(int j, double a, double b, double c);

// Gradient of the pulled-back phase Psi_j(a, b) = phi_j(a, b, xi - a - b).
std::array<double, 2> phase_gradient(int j, double xi, double a, double b);

struct PhaseData {
  int j = 0;
  double xi = 0.0;
  std::array<double, 2> critical_point{};
  double critical_value = 0.0;
  std::array<std::array<double, 2>, 2> hessian{};
  double hessian_det = 0.0;
  // Independent confirmations: Newton iteration on the gradient from a
  // displaced start, and Richardson-differenced Hessian entries.
  std::array<double, 2> critical_point_numeric{};
  double hessian_entry_error = 0.0;
};

PhaseData stationary_phase_data(int j, double xi);

// Monte-Carlo comparability ratios for |grad Psi_j| in the three regimes:
// near the critical point (scaled by |xi|^3 / (|eta1|+|eta2|), offsets up to
// xi/100), in the order-one region, and in the sign-constrained interior
// (scaled by <a>^{-2} + <b>^{-2} + <c>^{-2}, outside the 0.05*xi box around
// the critical point). Sampling box [-3 xi, 3 xi]^2. Requires xi >= 1.
struct GradientBoundsReport {
  int j = 0;
  double xi = 0.0;
  int samples = 0;
  double near_ratio_min = 0.0, near_ratio_max = 0.0;
  double order_one_min = 0.0, order_one_max = 0.0;
  double interior_ratio_min = 0.0, interior_ratio_max = 0.0;
};

GradientBoundsReport phase_gradient_bounds_sampler(int j, double xi, int count,
                                                   unsigned seed = 4150);

} // namespace kinklab
