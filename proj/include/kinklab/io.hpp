#pragma once
// Run artifacts: deterministic diagnostics CSV, raw little-endian snapshot
// arrays with JSON sidecars, the run manifest, and a dependency-free SVG line
// plotter that embeds its numeric series as comments.

#include <cstdio>
#include <string>
#include <vector>

#include "kinklab/dynamics.hpp"

namespace kinklab {

// Shortest round-trip decimal form of v (printf %.17g, C locale, then trimmed
// to the shortest string that parses back exactly).
std::string format_double(double v);

// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

// Streaming CSV writer with the fixed diagnostics column order. Rows hit the
// file as they arrive, so an aborted run keeps everything up to the abort.
class DiagnosticsCsvWriter {
 public:
  explicit DiagnosticsCsvWriter(const std::string& path);
  ~DiagnosticsCsvWriter();
  DiagnosticsCsvWriter(const DiagnosticsCsvWriter&) = delete;
  DiagnosticsCsvWriter& operator=(const DiagnosticsCsvWriter&) = delete;
  void write(const DiagnosticsRecord& r);

 private:
  std::FILE* f_ = nullptr;
};

// Snapshot files: <stem>.bin holds u then ut as little-endian 8-byte floats,
// <stem>.json records grid params, time, and the array layout.
void write_state_pair(const std::string& dir, const std::string& stem,
                      const SimState& s);

struct LoadedSnapshot {
  double t = 0.0;
  int n = 0;
  double half_length = 0.0;
  std::vector<double> u, ut;
};

// All snapshot_*.json/bin pairs in dir, sorted by time. Throws on a sidecar
// whose binary payload is missing or the wrong size.
std::vector<LoadedSnapshot> load_snapshots(const std::string& dir);

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct RunManifest {
  std::string config_hash;   // fnv1a of the canonical config document
  std::string config_json;   // the canonical document itself
  std::string code_version;
  std::string started_utc;
  std::string finished_utc;
  std::string status;        // "ok" or "aborted"
  std::string abort_message; // set when status == "aborted"
  std::vector<std::string> outputs; // file names relative to the run dir
  std::vector<CheckResult> checks;
};

std::string utc_timestamp();

// Writes dir/manifest.json. On status "ok" every listed output must exist in
// dir; a missing one is a logic error and throws.
void write_manifest(const std::string& dir, const RunManifest& m);

// Reads dir/manifest.json; throws if absent or malformed.
RunManifest read_manifest(const std::string& dir);

// Minimal line plots. Log axes drop nonpositive points; non-finite points are
// skipped. The full numeric series ride along in an XML comment so the file
// doubles as a data record.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<PlotSeries> series;
};

void write_svg_plot(const std::string& path, const PlotSpec& spec);

} // namespace kinklab
