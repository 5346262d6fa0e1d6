#include "kinklab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kinklab {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846264338328;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path + " must be an object");
}

// Every key of j must appear in the allowed list.
void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) { ok = true; break; }
    if (!ok) fail("unknown key '" + (section.empty() ? it.key() : section + "." + it.key()) + "'");
  }
}

double get_num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path + " must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path + " must be an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path + " must be a boolean");
  return j.get<bool>();
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("syntax error: ") + e.what());
  }
  require_object(doc, "document");
  check_keys(doc, "", {"grid", "time", "initial_data", "diagnostics", "checks"});

  RunConfig rc;

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    require_object(g, "grid");
    check_keys(g, "grid", {"n", "half_length", "half_length_pi"});
    if (g.contains("n")) rc.sim.n = get_int(g["n"], "grid.n");
    if (g.contains("half_length") && g.contains("half_length_pi"))
      fail("grid.half_length and grid.half_length_pi are mutually exclusive");
    if (g.contains("half_length"))
      rc.sim.half_length = get_num(g["half_length"], "grid.half_length");
    if (g.contains("half_length_pi"))
      rc.sim.half_length = kPi * get_num(g["half_length_pi"], "grid.half_length_pi");
  }

  if (doc.contains("time")) {
    const json& t = doc["time"];
    require_object(t, "time");
    check_keys(t, "time", {"dt", "t_final", "snapshot_times", "diagnostics_interval"});
    if (t.contains("dt")) rc.sim.dt = get_num(t["dt"], "time.dt");
    if (t.contains("t_final")) rc.sim.t_final = get_num(t["t_final"], "time.t_final");
    if (t.contains("diagnostics_interval"))
      rc.sim.diagnostics_interval =
          get_num(t["diagnostics_interval"], "time.diagnostics_interval");
    if (t.contains("snapshot_times")) {
      const json& s = t["snapshot_times"];
      if (!s.is_array()) fail("time.snapshot_times must be an array of numbers");
      rc.sim.snapshot_times.clear();
      for (const json& v : s)
        rc.sim.snapshot_times.push_back(get_num(v, "time.snapshot_times[]"));
    }
  }

  if (doc.contains("initial_data")) {
    const json& d = doc["initial_data"];
    require_object(d, "initial_data");
    check_keys(d, "initial_data", {"family", "epsilon", "sigma"});
    if (d.contains("family")) {
      if (!d["family"].is_string()) fail("initial_data.family must be a string");
      rc.sim.initial_data.family = d["family"].get<std::string>();
      if (rc.sim.initial_data.family != "odd_gaussian")
        fail("initial_data.family '" + rc.sim.initial_data.family +
             "' is not recognized (known: odd_gaussian)");
    }
    if (d.contains("epsilon"))
      rc.sim.epsilon = get_num(d["epsilon"], "initial_data.epsilon");
    if (d.contains("sigma"))
      rc.sim.initial_data.sigma = get_num(d["sigma"], "initial_data.sigma");
  }

  if (doc.contains("diagnostics")) {
    const json& d = doc["diagnostics"];
    require_object(d, "diagnostics");
    check_keys(d, "diagnostics",
               {"delta", "dealias_fraction", "linear_only", "enforce_parity"});
    if (d.contains("delta")) rc.sim.delta = get_num(d["delta"], "diagnostics.delta");
    if (d.contains("dealias_fraction"))
      rc.sim.dealias_fraction =
          get_num(d["dealias_fraction"], "diagnostics.dealias_fraction");
    if (d.contains("linear_only"))
      rc.sim.linear_only = get_bool(d["linear_only"], "diagnostics.linear_only");
    if (d.contains("enforce_parity"))
      rc.sim.enforce_parity = get_bool(d["enforce_parity"], "diagnostics.enforce_parity");
  }

  if (doc.contains("checks")) {
    const json& c = doc["checks"];
    require_object(c, "checks");
    check_keys(c, "checks", {"energy_drift", "parity_drift"});
    if (c.contains("energy_drift"))
      rc.checks.energy_drift = get_num(c["energy_drift"], "checks.energy_drift");
    if (c.contains("parity_drift"))
      rc.checks.parity_drift = get_num(c["parity_drift"], "checks.parity_drift");
  }

  rc.sim.validate();
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_run_config(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " [file " + path + "]");
  }
}

std::string canonical_config_json(const RunConfig& cfg) {
  json doc;
  doc["grid"] = {{"n", cfg.sim.n}, {"half_length", cfg.sim.half_length}};
  doc["time"] = {{"dt", cfg.sim.dt},
                 {"t_final", cfg.sim.t_final},
                 {"snapshot_times", cfg.sim.snapshot_times},
                 {"diagnostics_interval", cfg.sim.diagnostics_interval}};
  doc["initial_data"] = {{"family", cfg.sim.initial_data.family},
                         {"epsilon", cfg.sim.epsilon},
                         {"sigma", cfg.sim.initial_data.sigma}};
  doc["diagnostics"] = {{"delta", cfg.sim.delta},
                        {"dealias_fraction", cfg.sim.dealias_fraction},
                        {"linear_only", cfg.sim.linear_only},
                        {"enforce_parity", cfg.sim.enforce_parity}};
  doc["checks"] = {{"energy_drift", cfg.checks.energy_drift},
                   {"parity_drift", cfg.checks.parity_drift}};
  return doc.dump(2) + "\n"; // nlohmann objects iterate key-sorted
}

} // namespace kinklab
