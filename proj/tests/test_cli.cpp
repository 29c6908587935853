#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "vbroadcast/cli.hpp"

using namespace vbroadcast::cli;
using nlohmann::json;

namespace {

CliConfig base_config(const std::string &command) {
  CliConfig c;
  c.command = command;
  return c;
}

} // namespace

TEST_CASE("cost: both methods agree at (2,2)") {
  CliConfig c = base_config("cost");
  c.method = "both";
  c.output = "json";
  const CommandResult r = run_command(c);
  CHECK(r.exit_code == kExitOk);
  const json doc = json::parse(r.output);
  CHECK(doc["analytic"]["gamma_linear"].get<double>() ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(doc["sdp"]["gamma_linear"].get<double>() - 5.0 / 3.0) <= 1e-6);
  CHECK(std::abs(doc["agreement_delta"].get<double>()) <= 1e-6);
  CHECK(doc.contains("config")); // reproducibility echo
}

TEST_CASE("cost: sdp-only at (2,3)") {
  CliConfig c = base_config("cost");
  c.n = 3;
  c.method = "sdp";
  c.output = "json";
  const CommandResult r = run_command(c);
  CHECK(r.exit_code == kExitOk);
  const json doc = json::parse(r.output);
  CHECK(std::abs(doc["sdp"]["gamma_linear"].get<double>() - 2.0) <= 1e-5);
}

TEST_CASE("cost: analytic is n=2 only") {
  CliConfig c = base_config("cost");
  c.n = 3;
  c.method = "analytic";
  CHECK(run_command(c).exit_code == kExitUsage);
}

TEST_CASE("cost: non-convergence exits 2") {
  CliConfig c = base_config("cost");
  c.method = "sdp";
  c.max_iter = 1;
  CHECK(run_command(c).exit_code == kExitNoConvergence);
}

TEST_CASE("bounds: closed forms") {
  CliConfig c = base_config("bounds");
  c.d = 2;
  c.n = 3;
  c.output = "json";
  const CommandResult r = run_command(c);
  CHECK(r.exit_code == kExitOk);
  const json doc = json::parse(r.output);
  CHECK(doc["lower_linear"].get<double>() == doctest::Approx(2.0));
  CHECK(doc["upper_linear"].get<double>() == doctest::Approx(5.0));
}

TEST_CASE("certify: n=2 and n>=3 paths") {
  CliConfig c = base_config("certify");
  c.d = 4;
  CHECK(run_command(c).exit_code == kExitOk);

  c.d = 2;
  c.n = 4;
  c.output = "json";
  const CommandResult r = run_command(c);
  CHECK(r.exit_code == kExitOk);
  const json doc = json::parse(r.output);
  CHECK(doc["upper_from_gamma_prime"].get<double>() == doctest::Approx(7.0));
  CHECK(doc["lower_obj"].get<double>() ==
        doctest::Approx(11.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("certify: d=1 rejected with usage error") {
  CliConfig c = base_config("certify");
  c.d = 1;
  CHECK(run_command(c).exit_code == kExitUsage);
}

TEST_CASE("verify: universal, optimal2 and warmup protocols") {
  CliConfig c = base_config("verify");
  c.d = 3;
  c.n = 3;
  c.protocol = "universal";
  CHECK(run_command(c).exit_code == kExitOk);

  c.d = 2;
  c.n = 2;
  c.protocol = "optimal2";
  CHECK(run_command(c).exit_code == kExitOk);

  c.protocol = "warmup";
  c.n = 3;
  CHECK(run_command(c).exit_code == kExitUsage);
}

TEST_CASE("sweep: csv output and range parsing") {
  CliConfig c = base_config("sweep");
  c.n_range = "2:5";
  c.sdp_up_to = 2;
  c.output = "csv";
  const CommandResult r = run_command(c);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.output.rfind("n,lower_linear,sdp_linear,upper_linear,lower_log2,"
                       "sdp_log2,upper_log2\n",
                       0) == 0);
  // header + four rows
  CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 5);
  // the n=2 row starts with the analytic value and log2 ~ 0.7370
  CHECK(r.output.find("\n2,1.666666667,1.666666") != std::string::npos);
  CHECK(r.output.find("0.736965") != std::string::npos);

  c.n_range = "5:2";
  CHECK(run_command(c).exit_code == kExitUsage);
  c.n_range = "junk";
  CHECK(run_command(c).exit_code == kExitUsage);
}

TEST_CASE("simulate: Bell/ZZ run emits the Hoeffding count and JSON result") {
  CliConfig c = base_config("simulate");
  c.j = 1;
  c.state = "bell";
  c.obs = "ZZ";
  c.delta = 0.05;
  c.epsilon = 0.05;
  c.seed = 7;
  c.output = "json";
  const CommandResult r = run_command(c);
  CHECK(r.exit_code == kExitOk);
  const json doc = json::parse(r.output);
  CHECK(doc["rounds"].get<std::size_t>() == 8198);
  CHECK(std::abs(doc["estimate"].get<double>() - 1.0) <= 0.05);
  CHECK(doc["exact"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(doc["gamma"].get<double>() == doctest::Approx(5.0 / 3.0));
  CHECK(doc["config"]["seed"] == 7);

  // same target on the second output
  c.j = 2;
  const json doc2 = json::parse(run_command(c).output);
  CHECK(std::abs(doc2["estimate"].get<double>() - 1.0) <= 0.05);
}

TEST_CASE("simulate: identical seeds reproduce bit-identical output") {
  CliConfig c = base_config("simulate");
  c.rounds = 500;
  c.seed = 99;
  c.output = "json";
  const CommandResult a = run_command(c);
  const CommandResult b = run_command(c);
  CHECK(a.output == b.output);
}

TEST_CASE("simulate: observable norm above one is a usage error") {
  CliConfig c = base_config("simulate");
  c.obs = "ZZ";
  c.rounds = 10;
  // write a JSON observable with spectral norm 2
  const std::string path = "/tmp/vbroadcast_test_obs.json";
  {
    std::ofstream out(path);
    out << R"({"matrix": [[[2,0],[0,0],[0,0],[0,0]],
                           [[0,0],[2,0],[0,0],[0,0]],
                           [[0,0],[0,0],[2,0],[0,0]],
                           [[0,0],[0,0],[0,0],[2,0]]]})";
  }
  c.obs = path;
  const CommandResult r = run_command(c);
  CHECK(r.exit_code == kExitUsage);
  CHECK(r.output.find("[-1, 1]") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("simulate: invalid output index") {
  CliConfig c = base_config("simulate");
  c.j = 3;
  c.n = 2;
  CHECK(run_command(c).exit_code == kExitUsage);
}

TEST_CASE("dump-sdp: schema version emitted") {
  CliConfig c = base_config("dump-sdp");
  c.kind = "primal";
  const CommandResult r = run_command(c);
  CHECK(r.exit_code == kExitOk);
  const json doc = json::parse(r.output);
  CHECK(doc["schema"] == "vbroadcast-sdp/1");
}

TEST_CASE("dry run: config echo round trips") {
  CliConfig c = base_config("cost");
  c.dry_run = true;
  c.d = 3;
  c.seed = 17;
  const CommandResult r = run_command(c);
  CHECK(r.exit_code == kExitOk);
  const json doc = json::parse(r.output);
  CHECK(doc["command"] == "cost");
  CHECK(doc["d"] == 3);
  CHECK(doc["seed"] == 17);
  // printing the parsed echo again is exact
  CHECK(config_to_json(c) + "\n" == r.output);
}

TEST_CASE("size cap: env var override") {
  CHECK(effective_size_cap(std::optional<std::size_t>(128)) == 128);
  setenv("VBROADCAST_SIZE_CAP", "64", 1);
  CHECK(effective_size_cap(std::nullopt) == 64);
  CHECK(effective_size_cap(std::optional<std::size_t>(256)) == 256);
  setenv("VBROADCAST_SIZE_CAP", "garbage", 1);
  CHECK(effective_size_cap(std::nullopt) == 4096);
  unsetenv("VBROADCAST_SIZE_CAP");
  CHECK(effective_size_cap(std::nullopt) == 4096);
}

TEST_CASE("size cap: commands respect it") {
  CliConfig c = base_config("verify");
  c.d = 2;
  c.n = 3;
  c.protocol = "universal";
  c.size_cap = 8; // d^(n+1) = 16 > 8
  CHECK(run_command(c).exit_code == kExitUsage);
}

TEST_CASE("unknown command") {
  CHECK(run_command(base_config("frobnicate")).exit_code == kExitUsage);
}
