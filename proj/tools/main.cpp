#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "vbroadcast/cli.hpp"

using vbroadcast::cli::CliConfig;
using vbroadcast::cli::CommandResult;

namespace {

void add_common(CLI::App *cmd, CliConfig &config,
                std::optional<std::size_t> &cap_flag) {
  cmd->add_option("--d", config.d, "local dimension of B and each B_j");
  cmd->add_option("--output", config.output, "output mode: human|json|csv")
      ->check(CLI::IsMember({"human", "json", "csv"}));
  cmd->add_option("--output-path", [&config](const std::vector<std::string> &v) {
        config.output_path = v.front();
        return true;
      },
      "write the report to this file instead of stdout");
  cmd->add_option("--size-cap", [&cap_flag](const std::vector<std::string> &v) {
        try {
          cap_flag = std::stoul(v.front());
        } catch (const std::exception &) {
          return false;
        }
        return true;
      },
      "dense matrix side cap (env: VBROADCAST_SIZE_CAP)");
  cmd->add_flag("--dry-run", config.dry_run,
                "echo the parsed configuration as JSON and exit");
}

void add_solver_flags(CLI::App *cmd, CliConfig &config) {
  cmd->add_option("--feas-tol", config.feas_tol, "solver feasibility tolerance");
  cmd->add_option("--gap-tol", config.gap_tol, "solver relative gap tolerance");
  cmd->add_option("--max-iter", config.max_iter, "solver iteration limit");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"virtual broadcasting protocols: construction, verification, "
               "optimal simulation cost and quasiprobability sampling"};
  app.require_subcommand(1);

  CliConfig config;
  std::optional<std::size_t> cap_flag;

  CLI::App *cost = app.add_subcommand("cost", "optimal simulation cost");
  add_common(cost, config, cap_flag);
  add_solver_flags(cost, config);
  cost->add_option("--n", config.n, "number of broadcast outputs");
  cost->add_option("--method", config.method, "analytic|sdp|both")
      ->check(CLI::IsMember({"analytic", "sdp", "both"}));

  CLI::App *bounds = app.add_subcommand("bounds", "closed-form cost bounds");
  add_common(bounds, config, cap_flag);
  bounds->add_option("--n", config.n, "number of broadcast outputs");

  CLI::App *certify =
      app.add_subcommand("certify", "check the closed-form certificates");
  add_common(certify, config, cap_flag);
  certify->add_option("--n", config.n, "number of broadcast outputs");
  certify->add_option("--cert-tol", config.cert_tol,
                      "certificate feasibility tolerance");

  CLI::App *verify = app.add_subcommand("verify", "verify protocol properties");
  add_common(verify, config, cap_flag);
  verify->add_option("--n", config.n, "number of broadcast outputs");
  verify->add_option("--protocol", config.protocol,
                     "warmup|universal|optimal2");
  verify->add_option("--tol", config.tol, "verification tolerance");

  CLI::App *sweep = app.add_subcommand("sweep", "cost table over a range of n");
  add_common(sweep, config, cap_flag);
  add_solver_flags(sweep, config);
  sweep->add_option("--n", config.n_range, "range <min>:<max>");
  sweep->add_option("--sdp-up-to", config.sdp_up_to,
                    "solve the SDP for n up to this value");

  CLI::App *simulate =
      app.add_subcommand("simulate", "quasiprobability sampling simulation");
  add_common(simulate, config, cap_flag);
  simulate->add_option("--n", config.n, "number of broadcast outputs");
  simulate->add_option("--j", config.j, "measured output index (1-based)");
  simulate->add_option("--state", config.state, "bell | random:<seed>");
  simulate->add_option("--obs", config.obs,
                       "observable: tensor word over I,X,Y,Z (d=2) or a JSON "
                       "matrix file");
  simulate->add_option("--delta", config.delta, "target estimation error");
  simulate->add_option("--epsilon", config.epsilon, "failure probability");
  simulate->add_option("--seed", config.seed, "RNG seed");
  simulate->add_option("--rounds", [&config](const std::vector<std::string> &v) {
        try {
          config.rounds = std::stoul(v.front());
        } catch (const std::exception &) {
          return false;
        }
        return true;
      },
      "override the Hoeffding round count");
  simulate->add_option("--trace-log", [&config](const std::vector<std::string> &v) {
        config.trace_log = v.front();
        return true;
      },
      "write a per-round CSV trace to this file");

  CLI::App *dump = app.add_subcommand("dump-sdp",
                                      "emit the vbroadcast-sdp/1 JSON document");
  add_common(dump, config, cap_flag);
  dump->add_option("--n", config.n, "number of broadcast outputs");
  dump->add_option("--kind", config.kind, "primal|dual")
      ->check(CLI::IsMember({"primal", "dual"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return vbroadcast::cli::kExitUsage;
  }

  config.command = app.get_subcommands().front()->get_name();
  config.size_cap = vbroadcast::cli::effective_size_cap(cap_flag);

  const CommandResult result = vbroadcast::cli::run_command(config);
  if (config.output_path && result.exit_code == vbroadcast::cli::kExitOk &&
      !config.dry_run) {
    std::ofstream out(*config.output_path);
    if (!out) {
      std::cerr << "cannot write output file '" << *config.output_path << "'\n";
      return vbroadcast::cli::kExitUsage;
    }
    out << result.output;
  } else if (result.exit_code == vbroadcast::cli::kExitOk) {
    std::cout << result.output;
  } else {
    std::cerr << result.output;
  }
  return result.exit_code;
}
