#pragma once
// Subcommand entry points behind the executable. Each returns a process exit
// status: 0 success, 1 failed checks or an aborted/insufficient run, 2 bad
// usage or an invalid config. All human-readable output goes to the supplied
// stream; artifacts go to files.

#include <ostream>
#include <string>
#include <vector>

namespace kinklab {

struct VerifyOptions {
  std::vector<std::string> only; // empty means every check group
  double tol_scale = 1.0;        // multiplies every default tolerance
  unsigned seed = 20240501;      // seeds the randomized identity probes
};

// Check group names accepted by VerifyOptions::only, in execution order.
std::vector<std::string> verify_check_names();

int cmd_verify(const VerifyOptions& opts, std::ostream& out);

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::ostream& out);

int cmd_report(const std::string& run_dir, std::ostream& out);

struct SweepOptions {
  std::string config_path; // sweep document: {"base": ..., "runs": [...]}
  std::string out_dir;     // each run lands in out_dir/<name>
  int jobs = 1;
};

int cmd_sweep(const SweepOptions& opts, std::ostream& out);

} // namespace kinklab
