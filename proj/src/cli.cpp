#include "kinklab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kinklab/analysis.hpp"
#include "kinklab/closedform.hpp"
#include "kinklab/config.hpp"
#include "kinklab/fft.hpp"
#include "kinklab/io.hpp"
#include "kinklab/operators.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kinklab {

namespace {

constexpr const char* kCodeVersion = "1.0.0";
constexpr double kPi = 3.14159265358979323846264338328;

double jap(double x) { return std::sqrt(1.0 + x * x); }

// sup and L2 distance between two fields on the same grid
struct Dist {
  double sup = 0.0, l2 = 0.0;
};

Dist distance(const RealField& a, const RealField& b) {
  Dist d;
  double acc = 0.0;
  for (size_t j = 0; j < a.values.size(); ++j) {
    const double r = a.values[j] - b.values[j];
    d.sup = std::max(d.sup, std::abs(r));
    acc += r * r;
  }
  d.l2 = std::sqrt(acc * a.grid->dx);
  return d;
}

// ---------------------------------------------------------------------------
// Identity check groups for cmd_verify.

struct VerifyContext {
  unsigned seed = 0;
  double scale = 1.0;
};

OperatorReport scaled_report(std::string name, const Dist& d, double tol,
                             const VerifyContext& ctx) {
  return make_report(std::move(name), d.sup, d.l2, tol * ctx.scale);
}

const Grid& field_grid() {
  // Wide box: random Schwartz tails and sech-scaled cumulatives sit below
  // 1e-14 at the wrap, so the strict boundary guards stay quiet.
  static Grid g = make_grid(3072, 48.0);
  return g;
}

const Grid& symbol_grid() {
  static Grid g = make_grid(2048, 32.0);
  return g;
}

std::vector<OperatorReport> check_factorization(const VerifyContext& ctx) {
  const Grid& g = field_grid();
  Dist with_pot, free_op;
  for (unsigned i = 0; i < 8; ++i) {
    const Parity p = (i % 2 == 0) ? Parity::odd : Parity::even;
    RealField f = random_schwartz_field(g, ctx.seed + i, p);
    RealField fxx = spectral_derivative(spectral_derivative(f));

    // D D* f = -f'' + f - 2 sech^2 f
    RealField lhs1 = apply_D(apply_Dstar(f));
    RealField rhs1 = make_real_field(g);
    for (int j = 0; j < g.n; ++j) {
      const double s = sech(g.x[j]);
      rhs1.values[j] = -fxx.values[j] + f.values[j] - 2.0 * s * s * f.values[j];
    }
    Dist d1 = distance(lhs1, rhs1);
    with_pot.sup = std::max(with_pot.sup, d1.sup);
    with_pot.l2 = std::max(with_pot.l2, d1.l2);

    // D* D f = -f'' + f
    RealField lhs2 = apply_Dstar(apply_D(f));
    RealField rhs2 = make_real_field(g);
    for (int j = 0; j < g.n; ++j) rhs2.values[j] = -fxx.values[j] + f.values[j];
    Dist d2 = distance(lhs2, rhs2);
    free_op.sup = std::max(free_op.sup, d2.sup);
    free_op.l2 = std::max(free_op.l2, d2.l2);
  }
  return {scaled_report("with-potential", with_pot, 1e-9, ctx),
          scaled_report("free", free_op, 1e-9, ctx)};
}

std::vector<OperatorReport> check_rightinverse(const VerifyContext& ctx) {
  const Grid& g = field_grid();
  Dist ri, rec;
  for (unsigned i = 0; i < 8; ++i) {
    RealField geven = random_schwartz_field(g, ctx.seed + 100 + i, Parity::even);
    Dist d1 = distance(apply_Dstar(apply_I(geven)), geven);
    ri.sup = std::max(ri.sup, d1.sup);
    ri.l2 = std::max(ri.l2, d1.l2);

    RealField uodd = random_schwartz_field(g, ctx.seed + 500 + i, Parity::odd);
    Dist d2 = distance(apply_I(apply_Dstar(uodd)), uodd);
    rec.sup = std::max(rec.sup, d2.sup);
    rec.l2 = std::max(rec.l2, d2.l2);
  }
  return {scaled_report("inverse-of-transform", ri, 1e-9, ctx),
          scaled_report("reconstruction", rec, 1e-9, ctx)};
}

std::vector<OperatorReport> check_commutators(const VerifyContext& ctx) {
  std::vector<OperatorReport> reports = verify_commutators(field_grid(), ctx.seed);
  for (OperatorReport& r : reports) {
    r.tolerance *= ctx.scale;
    r.passed = r.residual_sup <= r.tolerance;
  }
  return reports;
}

std::vector<OperatorReport> check_ftclosedforms(const VerifyContext& ctx) {
  const Grid& g = symbol_grid();
  const CoefficientSet c = make_coefficients(g);

  auto lattice_sup = [&](const RealField& f,
                         const std::function<double(double)>& symbol) {
    SpectralField fh = to_spectral(f);
    Dist d;
    double acc = 0.0;
    for (int k = 0; k < g.n; ++k) {
      if (k == g.nyquist()) continue;
      const double r = std::abs(fh.coefficients[k] - symbol(g.xi[k]));
      d.sup = std::max(d.sup, r);
      acc += r * r;
    }
    d.l2 = std::sqrt(acc * g.dxi);
    return d;
  };

  RealField sechf = make_real_field(g, Parity::even);
  RealField sech2f = make_real_field(g, Parity::even);
  for (int j = 0; j < g.n; ++j) {
    sechf.values[j] = sech(g.x[j]);
    sech2f.values[j] = sech(g.x[j]) * sech(g.x[j]);
  }

  std::vector<OperatorReport> out;
  out.push_back(scaled_report("sech", lattice_sup(sechf, sech_hat), 1e-10, ctx));
  out.push_back(scaled_report("sech-squared", lattice_sup(sech2f, sech2_hat), 1e-10, ctx));
  out.push_back(
      scaled_report("quadratic-coefficient", lattice_sup(c.alpha1, alpha1_hat), 1e-10, ctx));
  out.push_back(scaled_report(
      "normal-form-11",
      lattice_sup(c.alpha11, [](double xi) { return normal_form_symbols(xi).alpha11; }),
      1e-10, ctx));
  out.push_back(scaled_report(
      "normal-form-12",
      lattice_sup(c.alpha12, [](double xi) { return normal_form_symbols(xi).alpha12; }),
      1e-10, ctx));
  out.push_back(scaled_report(
      "normal-form-13",
      lattice_sup(c.alpha13, [](double xi) { return normal_form_symbols(xi).alpha13; }),
      1e-10, ctx));
  return out;
}

std::vector<OperatorReport> check_convolution(const VerifyContext& ctx) {
  std::vector<OperatorReport> reports = convolution_identities();
  for (OperatorReport& r : reports) {
    r.tolerance *= ctx.scale;
    r.passed = r.residual_sup <= r.tolerance;
  }
  const PvConvergence pc = measure_pv_convergence();
  reports.push_back(
      make_report("pv-order-two", {std::abs(pc.slope - 2.0)}, 0.0, 0.2 * ctx.scale));
  reports.push_back(
      make_report("pv-richardson", {pc.residual}, 0.0, 1e-6 * ctx.scale));
  return reports;
}

std::vector<OperatorReport> check_nonresonance(const VerifyContext& ctx) {
  const Grid& g = symbol_grid();
  const CoefficientSet c = make_coefficients(g);
  const double sqrt3 = std::sqrt(3.0);

  // direct discrete transform at the (off-lattice) root frequencies
  double roots = 0.0;
  for (double xi0 : {sqrt3, -sqrt3}) {
    std::complex<double> s(0.0, 0.0);
    for (int j = 0; j < g.n; ++j)
      s += std::polar(1.0, -xi0 * g.x[j]) * c.alpha1.values[j];
    s *= g.dx / std::sqrt(2.0 * kPi);
    roots = std::max(roots, std::abs(s));
  }

  SpectralField a1h = to_spectral(c.alpha1);
  double lat = 0.0;
  for (int k = 0; k < g.n; ++k) {
    if (k == g.nyquist()) continue;
    lat = std::max(lat, std::abs(a1h.coefficients[k] - alpha1_hat(g.xi[k])));
  }
  return {make_report("roots", roots, roots, 1e-9 * ctx.scale),
          make_report("lattice-sup", lat, lat, 1e-10 * ctx.scale)};
}

std::vector<OperatorReport> check_zaction(const VerifyContext& ctx) {
  const Grid& g = field_grid();
  RealField v = random_schwartz_field(g, ctx.seed + 201);
  RealField vt = random_schwartz_field(g, ctx.seed + 202);

  RealField z0 = z_action_I(v, vt, 0.0);
  RealField ivt = apply_I(vt);
  RealField x_ivt = make_real_field(g);
  for (int j = 0; j < g.n; ++j) x_ivt.values[j] = g.x[j] * ivt.values[j];
  Dist d0 = distance(z0, x_ivt);

  const double t = 2.3;
  RealField lhs = z_action_I(v, vt, t);
  RealField div = spectral_derivative(apply_I(v));
  RealField rhs = make_real_field(g);
  for (int j = 0; j < g.n; ++j)
    rhs.values[j] = t * div.values[j] + g.x[j] * ivt.values[j];
  Dist dg = distance(lhs, rhs);

  RealField vx = spectral_derivative(v);
  RealField vtx = spectral_derivative(vt);
  const double t2 = 1.4;
  RealField lhs2 = z_action_Itilde(vx, vtx, t2);
  RealField d_it = spectral_derivative(apply_Itilde(vx));
  RealField it_vtx = apply_Itilde(vtx);
  RealField rhs2 = make_real_field(g);
  for (int j = 0; j < g.n; ++j)
    rhs2.values[j] = t2 * d_it.values[j] + g.x[j] * it_vtx.values[j];
  Dist di = distance(lhs2, rhs2);

  return {scaled_report("time-zero-reduction", d0, 1e-11, ctx),
          scaled_report("generic-time", dg, 1e-8, ctx),
          scaled_report("integrated-variant", di, 1e-8, ctx)};
}

std::vector<OperatorReport> check_stationaryphase(const VerifyContext& ctx) {
  double cp = 0.0, hess = 0.0;
  for (int j = 1; j <= 4; ++j) {
    for (double xi : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      PhaseData p = stationary_phase_data(j, xi);
      cp = std::max(cp, std::abs(p.critical_point_numeric[0] - p.critical_point[0]));
      cp = std::max(cp, std::abs(p.critical_point_numeric[1] - p.critical_point[1]));
      hess = std::max(hess, p.hessian_entry_error);
    }
  }
  std::mt19937 rng(ctx.seed);
  std::uniform_real_distribution<double> box(-5.0, 5.0);
  double swap = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double a = box(rng), b = box(rng), cc = box(rng);
    const double xi = a + b + cc;
    swap = std::max(swap, std::abs(phase_value(3, a, b, cc) + 2.0 * jap(xi) +
                                   phase_value(2, b, a, cc)));
    swap = std::max(swap, std::abs(phase_value(4, a, b, cc) + 2.0 * jap(xi) +
                                   phase_value(1, a, b, cc)));
  }
  return {make_report("critical-points", cp, cp, 1e-10 * ctx.scale),
          make_report("hessians", hess, hess, 1e-12 * ctx.scale),
          make_report("conjugation-swap", swap, swap, 1e-14 * ctx.scale)};
}

struct CheckEntry {
  const char* name;
  std::vector<OperatorReport> (*fn)(const VerifyContext&);
};

constexpr CheckEntry kChecks[] = {
    {"factorization", check_factorization},
    {"rightinverse", check_rightinverse},
    {"commutators", check_commutators},
    {"ftclosedforms", check_ftclosedforms},
    {"convolution", check_convolution},
    {"nonresonance", check_nonresonance},
    {"zaction", check_zaction},
    {"stationaryphase", check_stationaryphase},
};

} // namespace

std::vector<std::string> verify_check_names() {
  std::vector<std::string> out;
  for (const CheckEntry& e : kChecks) out.push_back(e.name);
  return out;
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out) {
  for (const std::string& name : opts.only) {
    bool known = false;
    for (const CheckEntry& e : kChecks)
      if (name == e.name) { known = true; break; }
    if (!known) {
      out << "verify: unknown check '" << name << "' (known:";
      for (const CheckEntry& e : kChecks) out << " " << e.name;
      out << ")\n";
      return 2;
    }
  }
  if (!(opts.tol_scale > 0.0)) {
    out << "verify: --tol-scale must be positive\n";
    return 2;
  }

  VerifyContext ctx{opts.seed, opts.tol_scale};
  json failures = json::array();
  int total = 0;
  for (const CheckEntry& e : kChecks) {
    if (!opts.only.empty() &&
        std::find(opts.only.begin(), opts.only.end(), e.name) == opts.only.end())
      continue;
    for (const OperatorReport& r : e.fn(ctx)) {
      ++total;
      char line[160];
      std::snprintf(line, sizeof line, "%s  %-15s %-24s sup %10.3e  tol %10.3e\n",
                    r.passed ? "PASS" : "FAIL", e.name, r.name.c_str(),
                    r.residual_sup, r.tolerance);
      out << line;
      if (!r.passed)
        failures.push_back({{"check", e.name},
                            {"name", r.name},
                            {"residual_sup", r.residual_sup},
                            {"tolerance", r.tolerance}});
    }
  }
  if (!failures.empty()) {
    out << json({{"failed", failures}}).dump() << "\n";
    return 1;
  }
  out << total << " identity reports, all passed\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

namespace {

class RunSink final : public SimulationSink {
 public:
  explicit RunSink(const std::string& dir)
      : dir_(dir), csv_(dir + "/diagnostics.csv") {
    outputs.push_back("diagnostics.csv");
  }

  void diagnostics(const DiagnosticsRecord& r) override {
    csv_.write(r);
    records.push_back(r);
  }

  void snapshot(const SimState& s) override {
    char stem[32];
    std::snprintf(stem, sizeof stem, "snapshot_%04d", snap_idx_++);
    write_state_pair(dir_, stem, s);
    outputs.push_back(std::string(stem) + ".bin");
    outputs.push_back(std::string(stem) + ".json");
    last_state = std::make_unique<SimState>(s);
  }

  std::vector<DiagnosticsRecord> records;
  std::vector<std::string> outputs;
  std::unique_ptr<SimState> last_state;

 private:
  std::string dir_;
  DiagnosticsCsvWriter csv_;
  int snap_idx_ = 0;
};

int simulate_into(const RunConfig& rc, const std::string& out_dir,
                  std::ostream& out) {
  fs::create_directories(out_dir);
  SimConfig cfg = rc.sim;
  cfg.out_dir = out_dir;

  RunManifest man;
  man.config_json = canonical_config_json(rc);
  man.config_hash = fnv1a_hex(man.config_json);
  man.code_version = kCodeVersion;
  man.started_utc = utc_timestamp();

  RunSink sink(out_dir);
  try {
    simulate(cfg, &sink);
  } catch (const std::exception& e) {
    // keep whatever is already on disk and dump the newest whole state
    if (sink.last_state) {
      write_state_pair(out_dir, "last_good_state", *sink.last_state);
    } else {
      Grid g = make_grid(cfg.n, cfg.half_length);
      SimState init = make_initial_state(g, cfg);
      write_state_pair(out_dir, "last_good_state", init);
    }
    man.outputs = sink.outputs;
    man.outputs.push_back("last_good_state.bin");
    man.outputs.push_back("last_good_state.json");
    man.status = "aborted";
    man.abort_message = e.what();
    man.finished_utc = utc_timestamp();
    write_manifest(out_dir, man);
    out << "simulate: aborted: " << e.what() << "\n";
    out << "simulate: last good state dumped to " << out_dir
        << "/last_good_state.bin\n";
    return 1;
  }

  const std::vector<DiagnosticsRecord>& recs = sink.records;
  std::vector<CheckResult> checks;
  if (!cfg.linear_only && !recs.empty()) {
    const double e0 = recs.front().energy;
    double drift = 0.0;
    for (const DiagnosticsRecord& r : recs)
      drift = std::max(drift, std::abs(r.energy - e0));
    const double rel = drift / std::max(std::abs(e0), 1e-300);
    checks.push_back({"energy_drift", rel, rc.checks.energy_drift,
                      rel <= rc.checks.energy_drift});
  }
  double pmax = 0.0;
  for (const DiagnosticsRecord& r : recs) pmax = std::max(pmax, r.parity_drift);
  checks.push_back({"parity_drift", pmax, rc.checks.parity_drift,
                    pmax <= rc.checks.parity_drift});

  man.checks = checks;
  man.status = "ok";
  man.outputs = sink.outputs;
  man.finished_utc = utc_timestamp();
  write_manifest(out_dir, man);

  bool all_ok = true;
  for (const CheckResult& c : checks) {
    char line[128];
    std::snprintf(line, sizeof line, "%s  %-14s measured %10.3e  tol %10.3e\n",
                  c.passed ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                  c.tolerance);
    out << line;
    all_ok = all_ok && c.passed;
  }
  out << "simulate: " << recs.size() << " diagnostics rows, "
      << (sink.outputs.size() - 1) / 2 << " snapshots in " << out_dir << "\n";
  return all_ok ? 0 : 1;
}

} // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::ostream& out) {
  RunConfig rc;
  try {
    rc = load_run_config(config_path);
  } catch (const std::invalid_argument& e) {
    out << e.what() << "\n";
    return 2;
  }
  return simulate_into(rc, out_dir, out);
}

// ---------------------------------------------------------------------------
// report

namespace {

json fit_to_json(const LineFit& f) {
  if (!f.ok) return nullptr;
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2},
          {"points", f.points}};
}

std::vector<double> decimate(const std::vector<double>& v, size_t stride) {
  std::vector<double> out;
  for (size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
  return out;
}

} // namespace

int cmd_report(const std::string& run_dir, std::ostream& out) {
  bool linear_only = false;
  try {
    RunManifest man = read_manifest(run_dir);
    RunConfig rc = parse_run_config(man.config_json);
    linear_only = rc.sim.linear_only;
  } catch (const std::exception&) {
    // a bare snapshot directory is still reportable; assume nonlinear
  }

  std::vector<LoadedSnapshot> snaps;
  try {
    snaps = load_snapshots(run_dir);
  } catch (const std::exception& e) {
    out << "report: " << e.what() << "\n";
    return 1;
  }
  if (snaps.empty()) {
    out << "report: no snapshots in '" << run_dir << "'\n";
    return 1;
  }
  for (const LoadedSnapshot& s : snaps) {
    if (s.n != snaps.front().n || s.half_length != snaps.front().half_length) {
      out << "report: snapshots disagree on grid parameters\n";
      return 1;
    }
  }
  if (snaps.size() < 4 || snaps.back().t < 10.0 * std::max(snaps.front().t, 1e-12)) {
    out << "report: insufficient data: need at least 4 snapshots spanning a "
           "decade in t\n";
    return 1;
  }

  Grid g = make_grid(snaps.front().n, snaps.front().half_length);
  std::vector<SimState> states(snaps.size());
  std::vector<ProfileSnapshot> profiles(snaps.size());
  for (size_t i = 0; i < snaps.size(); ++i) {
    SimState& s = states[i];
    s.grid = &g;
    s.t = snaps[i].t;
    s.u = make_real_field(g, Parity::odd);
    s.u.values = snaps[i].u;
    s.ut = make_real_field(g, Parity::odd);
    s.ut.values = snaps[i].ut;
    s.z_hat = pack_first_order(s.u, s.ut);
    profiles[i] = extract_profile(s);
  }
  const double t_last = states.back().t;

  // sup norms inside the reliable region: the guarded light cone, and times
  // before the front can wrap the domain
  const double t_reliable = std::min(t_last, g.half_length - 5.0);
  const double window_lo = std::max(states.front().t, t_reliable / 5.0);
  std::vector<double> ts, sups;
  std::vector<double> fit_t, fit_sup;
  for (const SimState& s : states) {
    const double m = sup_abs_within(s.u, light_cone_radius(s.t, g));
    ts.push_back(s.t);
    sups.push_back(m);
    if (s.t >= window_lo - 1e-9 && s.t <= t_reliable + 1e-9) {
      fit_t.push_back(s.t);
      fit_sup.push_back(m);
    }
  }
  bool window_fallback = fit_t.size() < 2;
  if (window_fallback) {
    fit_t = ts;
    fit_sup = sups;
  }
  LineFit sup_fit = fit_power_law(fit_t, fit_sup);

  // scattering analysis on the transformed profiles
  ModifiedScatteringReport rep;
  try {
    rep = modified_scattering_check(profiles, {0.0, 0.5, 1.0}, linear_only,
                                    window_lo, t_reliable);
  } catch (const std::exception& e) {
    out << "report: insufficient data for the scattering analysis: " << e.what()
        << "\n";
    return 1;
  }

  // weighted local decay of the first-order variable
  std::vector<LocalDecaySample> ld_samples;
  for (const SimState& s : states)
    ld_samples.push_back(measure_local_decay(s.t, s.v()));
  LocalDecayReport ld;
  bool have_ld = true;
  try {
    ld = local_decay_check(ld_samples);
  } catch (const std::exception&) {
    have_ld = false;
  }

  // centered equispaced triples among the snapshot times feed the profile
  // ODE residual; wide gaps simply contribute nothing
  std::vector<ProfileTriple> triples;
  for (size_t i = 1; i + 1 < states.size(); ++i) {
    const double d1 = states[i].t - states[i - 1].t;
    const double d2 = states[i + 1].t - states[i].t;
    if (std::abs(d1 - d2) > 1e-9 * std::max(1.0, states[i].t)) continue;
    if (d1 <= 0.0 || d1 > 4.0 * std::max(0.5, states[i].t / 100.0)) continue;
    ProfileTriple tr;
    tr.minus = profiles[i - 1];
    tr.center = profiles[i];
    tr.plus = profiles[i + 1];
    tr.v0_minus = states[i - 1].v_at_origin();
    tr.v0_center = states[i].v_at_origin();
    tr.v0_plus = states[i + 1].v_at_origin();
    triples.push_back(std::move(tr));
  }
  OdeResidualReport ode = profile_ode_residual(triples);

  // ------------------------------------------------------------------ files
  {
    json doc;
    doc["times"] = rep.times;
    doc["xi_samples"] = rep.xi_samples;
    doc["cauchy_times"] = rep.cauchy_times;
    doc["cauchy_sup"] = rep.cauchy_sup;
    doc["stabilization_exponent"] = rep.stabilization_exponent;
    doc["stabilization_fit"] = fit_to_json(rep.stabilization_fit);
    doc["psi_predicted"] = rep.psi_predicted;
    doc["psi_measured"] = rep.psi_measured;
    doc["phase_window"] = {window_lo, t_reliable};
    doc["linear_flow"] = linear_only;
    std::ofstream f(fs::path(run_dir) / "modified_scattering.json");
    f << doc.dump(2) << "\n";
  }
  {
    json doc;
    doc["sup_u"] = {{"times", ts},
                    {"values", sups},
                    {"window", {window_lo, t_reliable}},
                    {"window_fallback", window_fallback},
                    {"exponent", sup_fit.ok ? json(sup_fit.slope) : json()},
                    {"fit", fit_to_json(sup_fit)}};
    json ldj;
    if (have_ld && !ld.degenerate) {
      ldj = {{"dxv_exponent", ld.dxv_fit.ok ? json(ld.dxv_fit.slope) : json()},
             {"dxv_fit", fit_to_json(ld.dxv_fit)},
             {"v_exponent", ld.v_fit.ok ? json(ld.v_fit.slope) : json()},
             {"v_fit", fit_to_json(ld.v_fit)}};
    }
    doc["local_decay"] = ldj;
    std::ofstream f(fs::path(run_dir) / "decay_fit.json");
    f << doc.dump(2) << "\n";
  }
  {
    std::ofstream f(fs::path(run_dir) / "ode_residual.csv");
    f << "t,delta,sup_residual,weighted\n";
    for (const OdeResidualSample& s : ode.samples) {
      f << format_double(s.t) << "," << format_double(s.delta) << ","
        << format_double(s.sup_residual) << "," << format_double(s.weighted)
        << "\n";
    }
  }

  // ------------------------------------------------------------------ plots
  {
    PlotSpec spec;
    spec.title = "interior sup-norm decay";
    spec.xlabel = "t";
    spec.ylabel = "sup |u| inside the light cone";
    spec.logx = spec.logy = true;
    spec.series.push_back({"measured", ts, sups});
    if (sup_fit.ok) {
      std::vector<double> fx, fy;
      for (double t : ts) {
        if (t <= 0.0) continue;
        fx.push_back(t);
        fy.push_back(std::exp(sup_fit.intercept + sup_fit.slope * std::log(t)));
      }
      char lbl[48];
      std::snprintf(lbl, sizeof lbl, "fit slope %.3f", sup_fit.slope);
      spec.series.push_back({lbl, fx, fy});
    }
    write_svg_plot((fs::path(run_dir) / "decay_curves.svg").string(), spec);
  }
  {
    PlotSpec spec;
    spec.title = "profile magnitude, final snapshot";
    spec.xlabel = "frequency";
    spec.ylabel = "|profile|";
    const SpectralField& fh = profiles.back().f_hat;
    std::vector<double> xs, ys;
    for (int k = 0; k < g.n; ++k) {
      if (k == g.nyquist()) continue;
      if (std::abs(g.xi[k]) > 6.0) continue;
      xs.push_back(g.xi[k]);
      ys.push_back(std::abs(fh.coefficients[k]));
    }
    // lattice order: positive then negative frequencies; sort for plotting
    std::vector<size_t> idx(xs.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return xs[a] < xs[b]; });
    std::vector<double> sx, sy;
    for (size_t i : idx) {
      sx.push_back(xs[i]);
      sy.push_back(ys[i]);
    }
    char lbl[48];
    std::snprintf(lbl, sizeof lbl, "t = %.6g", profiles.back().t);
    spec.series.push_back({lbl, sx, sy});
    write_svg_plot((fs::path(run_dir) / "profile_abs.svg").string(), spec);
  }
  {
    PlotSpec spec;
    spec.title = "profile phase drift at fixed frequencies";
    spec.xlabel = "log t";
    spec.ylabel = "unwrapped arg of the profile";
    for (size_t j = 0; j < rep.xi_samples.size(); ++j) {
      const double xi = rep.xi_samples[j];
      std::vector<double> lx, ly, raw;
      for (size_t i = 0; i < profiles.size(); ++i) {
        if (profiles[i].t <= 0.0) continue;
        raw.push_back(std::arg(interpolate_spectral(profiles[i].f_hat, xi)));
        lx.push_back(std::log(profiles[i].t));
      }
      ly = unwrap_phase(raw);
      char lbl[48];
      std::snprintf(lbl, sizeof lbl, "frequency %.2f", xi);
      spec.series.push_back({lbl, lx, ly});
      if (j < rep.psi_predicted.size() && !ly.empty()) {
        std::vector<double> px = lx, py;
        for (double l : lx)
          py.push_back(ly.front() - rep.psi_predicted[j] * (l - lx.front()));
        char plbl[64];
        std::snprintf(plbl, sizeof plbl, "predicted drift %.2e", rep.psi_predicted[j]);
        spec.series.push_back({plbl, px, py});
      }
    }
    write_svg_plot((fs::path(run_dir) / "phase_drift.svg").string(), spec);
  }
  {
    PlotSpec spec;
    spec.title = "late-time field against the dispersive reconstruction";
    spec.xlabel = "x";
    spec.ylabel = "u";
    const SimState& fin = states.back();
    RealField rec;
    bool have_rec = fin.t >= 1.0;
    if (have_rec) rec = asymptotic_reconstruction(rep.W_hat_estimate, fin.t, g);
    const double rad = light_cone_radius(fin.t, g);
    std::vector<double> xs, us, rs;
    for (int j = 0; j < g.n; ++j) {
      if (std::abs(g.x[j]) > rad) continue;
      xs.push_back(g.x[j]);
      us.push_back(fin.u.values[j]);
      if (have_rec) rs.push_back(rec.values[j]);
    }
    const size_t stride = std::max<size_t>(1, xs.size() / 1600);
    char lbl[48];
    std::snprintf(lbl, sizeof lbl, "simulated, t = %.6g", fin.t);
    spec.series.push_back({lbl, decimate(xs, stride), decimate(us, stride)});
    if (have_rec)
      spec.series.push_back(
          {"reconstruction", decimate(xs, stride), decimate(rs, stride)});
    write_svg_plot((fs::path(run_dir) / "reconstruction_overlay.svg").string(), spec);
  }

  out << "report: " << snaps.size() << " snapshots, t in [" << states.front().t
      << ", " << t_last << "]\n";
  if (sup_fit.ok) out << "report: sup-norm decay exponent " << sup_fit.slope << "\n";
  out << "report: stabilization exponent " << rep.stabilization_exponent << "\n";
  out << "report: wrote modified_scattering.json decay_fit.json ode_residual.csv "
         "and 4 plots in " << run_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

namespace {

void deep_merge(json& base, const json& overlay) {
  if (!overlay.is_object() || !base.is_object()) {
    base = overlay;
    return;
  }
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (base.contains(it.key()))
      deep_merge(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

bool valid_run_name(const std::string& s) {
  if (s.empty() || s.size() > 64) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return s != "." && s != "..";
}

} // namespace

int cmd_sweep(const SweepOptions& opts, std::ostream& out) {
  json doc;
  try {
    std::ifstream in(opts.config_path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + opts.config_path + "'");
    doc = json::parse(in);
  } catch (const std::exception& e) {
    out << "sweep: " << e.what() << "\n";
    return 2;
  }
  if (!doc.is_object() || !doc.contains("runs") || !doc["runs"].is_array()) {
    out << "sweep: config must be an object with a 'runs' array\n";
    return 2;
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "base" && it.key() != "runs") {
      out << "sweep: unknown key '" << it.key() << "'\n";
      return 2;
    }
  }
  const json base = doc.contains("base") ? doc["base"] : json::object();

  struct Job {
    std::string name;
    RunConfig rc;
  };
  std::vector<Job> jobs;
  for (const json& r : doc["runs"]) {
    if (!r.is_object()) {
      out << "sweep: each run must be an object\n";
      return 2;
    }
    for (auto it = r.begin(); it != r.end(); ++it) {
      if (it.key() != "name" && it.key() != "overrides") {
        out << "sweep: unknown run key '" << it.key() << "'\n";
        return 2;
      }
    }
    if (!r.contains("name") || !r["name"].is_string() ||
        !valid_run_name(r["name"].get<std::string>())) {
      out << "sweep: every run needs a filesystem-safe 'name'\n";
      return 2;
    }
    Job job;
    job.name = r["name"].get<std::string>();
    for (const Job& existing : jobs) {
      if (existing.name == job.name) {
        out << "sweep: duplicate run name '" << job.name << "'\n";
        return 2;
      }
    }
    json merged = base;
    if (r.contains("overrides")) deep_merge(merged, r["overrides"]);
    try {
      job.rc = parse_run_config(merged.dump());
    } catch (const std::invalid_argument& e) {
      out << "sweep: run '" << job.name << "': " << e.what() << "\n";
      return 2;
    }
    jobs.push_back(std::move(job));
  }
  if (jobs.empty()) {
    out << "sweep: no runs declared\n";
    return 2;
  }
  const int nworkers =
      std::max(1, std::min<int>(opts.jobs, static_cast<int>(jobs.size())));

  std::mutex mu;
  std::atomic<size_t> next{0};
  std::atomic<int> failures{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      const std::string dir = (fs::path(opts.out_dir) / job.name).string();
      std::ostringstream local;
      int rcode = 0;
      try {
        rcode = simulate_into(job.rc, dir, local);
      } catch (const std::exception& e) {
        local << "unexpected error: " << e.what() << "\n";
        rcode = 1;
      }
      if (rcode != 0) failures.fetch_add(1);
      std::scoped_lock lock(mu);
      out << "[" << job.name << "] " << (rcode == 0 ? "ok" : "FAILED") << "\n";
      std::istringstream lines(local.str());
      std::string line;
      while (std::getline(lines, line)) out << "  " << line << "\n";
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < nworkers; ++k) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  if (failures.load() != 0) {
    out << "sweep: " << failures.load() << " of " << jobs.size() << " runs failed\n";
    return 1;
  }
  out << "sweep: " << jobs.size() << " runs completed in " << opts.out_dir << "\n";
  return 0;
}

} // namespace kinklab
