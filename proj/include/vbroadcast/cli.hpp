#ifndef VBROADCAST_CLI_HPP
#define VBROADCAST_CLI_HPP

#include <cstdint>
#include <optional>
#include <string>

namespace vbroadcast::cli {

// Stable exit codes: 0 success, 2 numerical non-convergence, 64 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNoConvergence = 2;
inline constexpr int kExitUsage = 64;

struct CliConfig {
  std::string command; // cost|bounds|certify|verify|sweep|simulate|dump-sdp
  std::size_t d = 2;
  std::size_t n = 2;
  std::size_t j = 1;
  std::string method = "both";     // cost: analytic|sdp|both
  std::string protocol = "universal"; // verify: warmup|universal|optimal2
  std::string kind = "primal";     // dump-sdp: primal|dual
  std::string state = "bell";      // simulate: bell|random:<seed>
  std::string obs = "ZZ";          // simulate: tensor word or JSON file path
  double delta = 0.05;
  double epsilon = 0.05;
  std::uint64_t seed = 0;
  std::optional<std::size_t> rounds; // overrides the Hoeffding count
  std::string n_range = "2:5";       // sweep
  std::size_t sdp_up_to = 5;         // sweep
  std::string output = "human"; // human|json|csv
  std::optional<std::string> output_path;
  std::optional<std::string> trace_log; // simulate: per-round CSV
  // tolerance overrides (module defaults)
  double tol = 1e-10;      // verification tolerance
  double cert_tol = 1e-9;  // certificate feasibility tolerance
  double feas_tol = 1e-8;  // solver
  double gap_tol = 1e-7;   // solver
  std::size_t max_iter = 200;
  std::size_t size_cap = 4096; // dense side cap (VBROADCAST_SIZE_CAP)
  bool dry_run = false;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string output; // rendered in the requested output mode
};

// Normalized JSON echo of the parsed configuration; --dry-run prints this
// and the round trip parse->print is exact.
std::string config_to_json(const CliConfig &config);

// Dense side cap: flag value if the caller set one, else VBROADCAST_SIZE_CAP
// from the environment, else the default.
std::size_t effective_size_cap(std::optional<std::size_t> flag_value);

CommandResult run_command(const CliConfig &config);

} // namespace vbroadcast::cli

#endif
