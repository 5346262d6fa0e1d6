#pragma once
// Time evolution of the odd kink perturbation in flat first-order form,
// exact-solution generators (kink family, breather) for solver validation,
// the transformed views w = D*u and v = (w - i<D>^{-1} w_t)/2, and the full
// nonlinearity decomposition of the w-equation with its exactness verifier.

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "kinklab/closedform.hpp"
#include "kinklab/field.hpp"

namespace kinklab {

// ---------------------------------------------------------------------------
// Exact solutions.

// Static kink profile 4 arctan(e^x), overflow-safe for any x.
double kink(double x);
// Boosted/translated kink K(gamma (x - ell t - a)); throws for |ell| >= 1.
double kink(double x, double ell, double a, double t);
RealField kink_field(const Grid& g, double ell = 0.0, double a = 0.0,
                     double t = 0.0);

// Breather 4 arctan((beta/alpha) sin(alpha t) / cosh(beta x)) with
// alpha = sqrt(1 - beta^2); throws unless 0 < |beta| < 1.
double breather(double t, double x, double beta);
double breather_dt(double t, double x, double beta);
double breather_period(double beta); // 2 pi / alpha

// ---------------------------------------------------------------------------
// Energy and wrap-aware differentiation.

// d/dx phi computed through the periodic pair (sin phi, cos phi):
//   phi_x = cos(phi) d/dx sin(phi) - sin(phi) d/dx cos(phi).
// Exact identity, spectrally accurate, and immune to the 2 pi seam jump of a
// kink background (sin phi and cos phi are genuinely periodic).
RealField wrapped_derivative(const RealField& phi);

// Total energy \int 1/2 phi_t^2 + 1/2 phi_x^2 + (1 - cos phi) dx; the last
// term is evaluated as 2 sin^2(phi/2) so vacua 0 and 2 pi both count as zero.
double energy(const RealField& phi, const RealField& phit);

// ---------------------------------------------------------------------------
// Forcings for the flat first-order formulation (d_tt - d_xx + 1 on the left).

// Exact forcing for the perturbation u of the kink:
//   G(u) = (u - sin u) + 2 sech^2(x) sin u - 2 sech(x) tanh(x) (1 - cos u),
// algebraically equal to -sin(K+u) + sin(K) + u. No Taylor truncation; the
// linearization is 2 sech^2(x) u.
RealField rhs_u(const RealField& u);

// Exact forcing for a full field phi near the zero vacuum: phi - sin phi.
RealField rhs_vacuum(const RealField& phi);

// ---------------------------------------------------------------------------
// Simulation configuration and state.

struct InitialData {
  std::string family = "odd_gaussian"; // u0 = eps * x * exp(-x^2 / sigma^2)
  double sigma = 2.0;
};

struct SimConfig {
  int n = 8192;
  double half_length = 251.32741228718345; // 80 pi
  double dt = 0.01;
  double t_final = 400.0;
  double epsilon = 0.01;
  InitialData initial_data;
  double delta = 0.01;            // diagnostic weight exponent only
  double dealias_fraction = 2.0 / 3.0;
  std::vector<double> snapshot_times;
  double diagnostics_interval = 1.0;
  bool linear_only = false;       // drop the forcing entirely (free flat flow)
  bool enforce_parity = true;
  std::string out_dir;            // consumed by the cli layer

  void validate() const; // throws std::invalid_argument on bad parameters
};

struct SimState {
  const Grid* grid = nullptr;
  double t = 0.0;
  // First-order complex variable z = (u - i <D>^{-1} u_t)/2 in frequency
  // space; the evolved object. u = z + conj(z), u_t = i<D>(z - conj(z)).
  SpectralField z_hat;
  RealField u, ut;          // unpacked after every step
  Parity parity = Parity::odd;
  double parity_drift = 0.0; // sup of the wrong-parity component, pre-projection

  RealField w() const;       // D* u (even)
  RealField wt() const;      // D* u_t
  SpectralField v_hat() const; // (w - i <xi>^{-1} w_t)-hat / 2
  ComplexField v() const;
  std::complex<double> v_at_origin() const;
};

// Pack/unpack between (phi, phi_t) and the first-order variable.
SpectralField pack_first_order(const RealField& phi, const RealField& phit);
void unpack_first_order(const SpectralField& z_hat, RealField& phi,
                        RealField& phit);

// ---------------------------------------------------------------------------
// Stepping.

struct StepContext {
  StepContext(const Grid& g, const SimConfig& cfg,
              std::function<RealField(const RealField&)> forcing,
              Parity parity);

  const Grid* grid;
  std::function<RealField(const RealField&)> forcing; // null => linear only
  Parity parity = Parity::odd;
  bool enforce_parity = true;
  std::vector<double> dealias;      // mask, applied to each forcing transform
  std::vector<double> inv_jap;      // <xi>^{-1} table
  double cached_dt = 0.0;           // half-step table below matches this dt
  std::vector<cplx> half_step;      // exp(i (dt/2) <xi>)
};

// Kink-perturbation context: forcing rhs_u (or none if cfg.linear_only), odd.
StepContext make_kink_context(const Grid& g, const SimConfig& cfg);
// Vacuum context (breather validation): forcing rhs_vacuum, even.
StepContext make_vacuum_context(const Grid& g, const SimConfig& cfg);

// One Strang step: exact linear half-step, 2-stage midpoint kick on the
// dealiased forcing, exact linear half-step, parity projection (drift
// recorded). Throws std::runtime_error with a diagnostic on NaN/overflow.
void step(SimState& s, double dt, StepContext& ctx);

// ---------------------------------------------------------------------------
// Simulation driver.

struct DiagnosticsRecord {
  double t = 0.0;
  double sup_u = 0.0;
  double sup_v = 0.0;
  double H2_v = 0.0;        // ||<D>^2 v||_L2
  double L2_xv = 0.0;       // ||x v||_L2
  double H1Lv_proxy = 0.0;  // ||<D> L v||_L2, L v = <D>(x v) - i t dx v
  double energy = 0.0;      // of phi = K + u
  double parity_drift = 0.0;
  double boundary_leak = 0.0; // sup |u| over |x| >= L - 5
};

struct SimulationSink {
  virtual void diagnostics(const DiagnosticsRecord&) {}
  virtual void snapshot(const SimState&) {}
  virtual ~SimulationSink();
};

SimState make_initial_state(const Grid& g, const SimConfig& cfg);

// Evolves from the configured initial data to t_final; emits diagnostics at
// the configured interval and snapshots exactly at snapshot_times (clipped
// steps land on them). Deterministic for a fixed config.
SimState simulate(const SimConfig& cfg, SimulationSink* sink = nullptr);

// ---------------------------------------------------------------------------
// Nonlinearity decomposition of the w-equation.

struct NonlinearityBreakdown {
  RealField Q1, Q2, Q3; // alpha1 w^2, alpha2 Itilde[w_x] w, alpha3 Itilde[w_x]^2
  RealField Cnl, Cl;    // nonlocal / localized cubic pieces
  RealField R1;         // quartic
  RealField R2;         // quintic integral-form remainder
  RealField total;      // sum of the seven pieces
  RealField exact_rhs;  // D* of the untransformed composite nonlinearity
};

// Decomposition evaluated from w alone (u is recovered as I[w] when no
// exact companion is supplied). The r-integrals of R2 use 8-point
// Gauss-Legendre. When u_exact is given, exact_rhs is built from it, making
// the exactness residual a genuine dual-route comparison.
NonlinearityBreakdown nonlinearity_breakdown_w(const RealField& w,
                                               const CoefficientSet& c,
                                               const RealField* u_exact = nullptr);
NonlinearityBreakdown nonlinearity_breakdown(const SimState& s);

// Total w-equation forcing Q + C + R1 + R2 (for evolving w directly).
RealField w_equation_forcing(const RealField& w, const CoefficientSet& c);

// ---------------------------------------------------------------------------
// Normal form and renormalized quadratics.

// B(v,v) = alpha11 v0^2 + alpha12 |v0|^2 + alpha13 conj(v0)^2 with v0 = v(t,0).
// Complex-valued: the three coefficient fields are real but the scalars are
// not conjugate-symmetric.
ComplexField normal_form_B(std::complex<double> v_at_0, const CoefficientSet& c);

struct RenormalizedQuadratics {
  ComplexField Q11, Q13;
  RealField Q12, Q14;
};

// The time derivative dt(e^{-it} v(t,0)) is centered-differenced from the
// supplied neighbor origin values at t -+ dt_window (diagnostic independence
// from the analytic right-hand side). Throws if dt_window <= 0.
RenormalizedQuadratics renormalized_quadratics(const SimState& s,
                                               std::complex<double> v0_prev,
                                               std::complex<double> v0_next,
                                               double dt_window,
                                               const CoefficientSet& c);

} // namespace kinklab
