#pragma once
// JSON run configuration. One document, fixed top-level sections
// {grid, time, initial_data, diagnostics, checks}; unknown keys anywhere are
// hard errors with full path context, so a typo in a tolerance key cannot
// silently weaken a run.

#include <string>

#include "kinklab/dynamics.hpp"

namespace kinklab {

struct CheckSettings {
  double energy_drift = 1e-8;  // relative drift of the conserved energy
  double parity_drift = 1e-11; // sup of the even component of u, pre-projection
};

struct RunConfig {
  SimConfig sim;
  CheckSettings checks;
};

// Parse a config document from JSON text. Missing sections and keys keep
// their defaults; unknown keys throw std::invalid_argument naming the key as
// section.key. The grid section accepts either half_length or half_length_pi
// (units of pi), not both.
RunConfig parse_run_config(const std::string& json_text);

// Read and parse a config file; errors carry the file path and, for syntax
// errors, the parser's position report.
RunConfig load_run_config(const std::string& path);

// Canonical serialization of a resolved config: every field explicit, keys
// sorted. Equal configs produce byte-identical documents, so this is the
// hashing and manifest-embedding form.
std::string canonical_config_json(const RunConfig& cfg);

} // namespace kinklab
