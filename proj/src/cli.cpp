#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vbroadcast/cli.hpp"
#include "vbroadcast/cost.hpp"
#include "vbroadcast/sampler.hpp"
#include "vbroadcast/sdp.hpp"

namespace vbroadcast::cli {

namespace {

using nlohmann::json;

json config_json(const CliConfig &c) {
  json doc;
  doc["command"] = c.command;
  doc["d"] = c.d;
  doc["n"] = c.n;
  doc["j"] = c.j;
  doc["method"] = c.method;
  doc["protocol"] = c.protocol;
  doc["kind"] = c.kind;
  doc["state"] = c.state;
  doc["obs"] = c.obs;
  doc["delta"] = c.delta;
  doc["epsilon"] = c.epsilon;
  doc["seed"] = c.seed;
  doc["rounds"] = c.rounds ? json(*c.rounds) : json(nullptr);
  doc["n_range"] = c.n_range;
  doc["sdp_up_to"] = c.sdp_up_to;
  doc["output"] = c.output;
  doc["output_path"] = c.output_path ? json(*c.output_path) : json(nullptr);
  doc["trace_log"] = c.trace_log ? json(*c.trace_log) : json(nullptr);
  doc["tolerances"] = {{"tol", c.tol},
                       {"cert_tol", c.cert_tol},
                       {"feas_tol", c.feas_tol},
                       {"gap_tol", c.gap_tol},
                       {"max_iter", c.max_iter}};
  doc["size_cap"] = c.size_cap;
  doc["dry_run"] = c.dry_run;
  return doc;
}

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

SolveOptions solver_options(const CliConfig &c) {
  SolveOptions opts;
  opts.feas_tol = c.feas_tol;
  opts.gap_tol = c.gap_tol;
  opts.max_iter = c.max_iter;
  return opts;
}

std::string key_value_csv(const std::vector<std::pair<std::string, std::string>> &kv) {
  std::ostringstream os;
  os << "key,value\n";
  for (const auto &[k, v] : kv)
    os << k << ',' << v << '\n';
  return os.str();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

//------------------------------------------------------------------------
// cost / bounds
//------------------------------------------------------------------------

CommandResult cmd_cost(const CliConfig &c) {
  if (c.d < 2)
    throw UsageError("cost: requires d >= 2");
  if (c.n < 2)
    throw UsageError("cost: requires n >= 2");
  if (c.method != "analytic" && c.method != "sdp" && c.method != "both")
    throw UsageError("cost: method must be analytic, sdp or both");
  if (c.method != "sdp" && c.n != 2)
    throw UsageError(
        "cost: the analytic formula is proven for n = 2 only; use --method sdp");

  std::optional<CostReport> analytic, sdp;
  if (c.method != "sdp")
    analytic = gamma2_analytic(c.d);
  int exit_code = kExitOk;
  if (c.method != "analytic") {
    try {
      sdp = optimal_cost_sdp(c.d, c.n, solver_options(c), c.size_cap);
    } catch (const SolverBreakdown &e) {
      return {kExitNoConvergence, std::string("solver breakdown: ") + e.what() + "\n"};
    } catch (const std::runtime_error &e) {
      return {kExitNoConvergence, std::string("solver: ") + e.what() + "\n"};
    }
  }

  json doc;
  doc["config"] = config_json(c);
  auto report_json = [](const CostReport &r) {
    return json{{"d", r.d},
                {"n", r.n},
                {"gamma_linear", r.gamma_linear},
                {"gamma_log2", r.gamma_log},
                {"source", r.source},
                {"lower_bound_linear", r.lower_bound_linear},
                {"upper_bound_linear", r.upper_bound_linear}};
  };
  if (analytic)
    doc["analytic"] = report_json(*analytic);
  if (sdp)
    doc["sdp"] = report_json(*sdp);
  if (analytic && sdp)
    doc["agreement_delta"] = sdp->gamma_linear - analytic->gamma_linear;

  if (c.output == "json")
    return {exit_code, doc.dump(2) + "\n"};
  if (c.output == "csv") {
    std::vector<std::pair<std::string, std::string>> kv;
    if (analytic) {
      kv.emplace_back("analytic_gamma_linear", fmt(analytic->gamma_linear));
      kv.emplace_back("analytic_gamma_log2", fmt(analytic->gamma_log));
    }
    if (sdp) {
      kv.emplace_back("sdp_gamma_linear", fmt(sdp->gamma_linear));
      kv.emplace_back("sdp_gamma_log2", fmt(sdp->gamma_log));
    }
    return {exit_code, key_value_csv(kv)};
  }

  std::ostringstream os;
  os << "simulation cost for d=" << c.d << ", n=" << c.n << "\n";
  if (analytic)
    os << "  analytic: gamma = " << fmt(analytic->gamma_linear)
       << "  (log2: " << fmt(analytic->gamma_log) << " bits)\n";
  if (sdp)
    os << "  sdp:      gamma = " << fmt(sdp->gamma_linear)
       << "  (log2: " << fmt(sdp->gamma_log) << " bits)\n"
       << "  bounds:   [" << fmt(sdp->lower_bound_linear) << ", "
       << fmt(sdp->upper_bound_linear) << "]\n";
  if (analytic && sdp)
    os << "  agreement delta: " << fmt(sdp->gamma_linear - analytic->gamma_linear)
       << "\n";
  return {exit_code, os.str()};
}

CommandResult cmd_bounds(const CliConfig &c) {
  if (c.d < 2 || c.n < 2)
    throw UsageError("bounds: requires d, n >= 2");
  const auto [lower, upper] = bounds_n(c.d, c.n);

  json doc;
  doc["config"] = config_json(c);
  doc["lower_linear"] = lower;
  doc["upper_linear"] = upper;
  doc["lower_log2"] = std::log2(lower);
  doc["upper_log2"] = std::log2(upper);
  if (c.output == "json")
    return {kExitOk, doc.dump(2) + "\n"};
  if (c.output == "csv")
    return {kExitOk, key_value_csv({{"lower_linear", fmt(lower)},
                                    {"upper_linear", fmt(upper)},
                                    {"lower_log2", fmt(std::log2(lower))},
                                    {"upper_log2", fmt(std::log2(upper))}})};
  std::ostringstream os;
  os << "bounds for d=" << c.d << ", n=" << c.n << "\n"
     << "  lower: gamma >= " << fmt(lower) << "  (log2: " << fmt(std::log2(lower))
     << " bits)\n"
     << "  upper: gamma <= " << fmt(upper) << "  (log2: " << fmt(std::log2(upper))
     << " bits)\n";
  return {kExitOk, os.str()};
}

//------------------------------------------------------------------------
// certify / verify
//------------------------------------------------------------------------

CommandResult cmd_certify(const CliConfig &c) {
  if (c.d < 2)
    throw UsageError("certify: requires d >= 2");
  if (c.n < 2)
    throw UsageError("certify: requires n >= 2");

  json doc;
  doc["config"] = config_json(c);
  bool pass = false;
  std::ostringstream os;
  if (c.n == 2) {
    const CertificateReport r = certificate_2broadcast(c.d, c.cert_tol);
    pass = r.pass;
    doc["primal_pass"] = r.primal_pass;
    doc["dual_pass"] = r.dual_pass;
    doc["primal_obj"] = r.primal_obj;
    doc["dual_obj"] = r.dual_obj;
    doc["gap"] = r.gap;
    os << "2-broadcast certificate, d=" << c.d << "\n"
       << "  primal feasible: " << (r.primal_pass ? "yes" : "NO")
       << ", objective " << fmt(r.primal_obj) << "\n"
       << "  dual feasible:   " << (r.dual_pass ? "yes" : "NO")
       << ", objective " << fmt(r.dual_obj) << "\n"
       << "  gap: " << fmt(r.gap) << "\n";
  } else {
    const NBroadcastBoundsReport r =
        certificate_nbroadcast_bounds(c.d, c.n, c.cert_tol, c.size_cap);
    pass = r.pass;
    doc["m1_cptp_pass"] = r.m1_cptp_pass;
    doc["m2_cptp_pass"] = r.m2_cptp_pass;
    doc["upper_from_gamma_prime"] = r.upper_from_gamma_prime;
    doc["dual_lower_pass"] = r.dual_lower_pass;
    doc["lower_obj"] = r.lower_obj;
    os << "n-broadcast bound certificates, d=" << c.d << ", n=" << c.n << "\n"
       << "  channel split CPTP: " << (r.m1_cptp_pass && r.m2_cptp_pass ? "yes" : "NO")
       << "  -> upper bound gamma <= " << fmt(r.upper_from_gamma_prime) << "\n"
       << "  dual point feasible: " << (r.dual_lower_pass ? "yes" : "NO")
       << "  -> lower bound gamma >= " << fmt(r.lower_obj) << "\n";
  }
  doc["pass"] = pass;
  os << "  certificate: " << (pass ? "PASS" : "FAIL") << "\n";

  const int exit_code = pass ? kExitOk : kExitNoConvergence;
  if (c.output == "json")
    return {exit_code, doc.dump(2) + "\n"};
  return {exit_code, os.str()};
}

CommandResult cmd_verify(const CliConfig &c) {
  if (c.d < 1)
    throw UsageError("verify: requires d >= 1");
  if (c.protocol != "warmup" && c.protocol != "universal" &&
      c.protocol != "optimal2")
    throw UsageError("verify: protocol must be warmup, universal or optimal2");
  if (c.protocol == "warmup" && c.n != 2)
    throw UsageError("verify: the warmup protocol is defined for n = 2 only");
  if (c.protocol == "optimal2" && c.n != 2)
    throw UsageError("verify: optimal2 is defined for n = 2 only");
  if (c.protocol == "optimal2" && c.d < 2)
    throw UsageError("verify: optimal2 requires d >= 2");
  if (c.n < 2)
    throw UsageError("verify: requires n >= 2");

  json doc;
  doc["config"] = config_json(c);
  bool pass = false;
  std::ostringstream os;

  if (c.protocol == "optimal2") {
    const HptpDecomposition decomp = choi_optimal_2broadcast(c.d);
    const CptpReport c1 = verify_cptp(decomp.choi1, 1.0, c.tol);
    const CptpReport c2 = verify_cptp(decomp.choi2, 1.0, c.tol);
    const ChoiOperator combined =
        make_choi(decomp.signed_choi(), decomp.choi1.layout);
    const UniversalityReport u = verify_universal(combined, c.tol);
    pass = c1.pass && c2.pass && u.pass;
    doc["choi1_cptp"] = c1.pass;
    doc["choi2_cptp"] = c2.pass;
    doc["universal_pass"] = u.pass;
    doc["marginal_deviations"] = u.deviations;
    doc["gamma"] = decomp.gamma();
    os << "optimal 2-broadcast split, d=" << c.d << "\n"
       << "  channel 1 CPTP: " << (c1.pass ? "yes" : "NO")
       << " (min eig " << fmt(c1.min_eigenvalue) << ")\n"
       << "  channel 2 CPTP: " << (c2.pass ? "yes" : "NO")
       << " (min eig " << fmt(c2.min_eigenvalue) << ")\n"
       << "  signed combination universal: " << (u.pass ? "yes" : "NO") << "\n"
       << "  gamma = " << fmt(decomp.gamma()) << "\n";
  } else {
    const ChoiOperator choi = (c.protocol == "warmup")
                                  ? choi_warmup_2broadcast(c.d)
                                  : choi_universal_nbroadcast(c.d, c.n, c.size_cap);
    const UniversalityReport u = verify_universal(choi, c.tol);
    pass = u.pass;
    doc["universal_pass"] = u.pass;
    doc["marginal_deviations"] = u.deviations;
    os << c.protocol << " protocol, d=" << c.d << ", n=" << c.n << "\n";
    for (std::size_t j = 0; j < u.deviations.size(); ++j)
      os << "  marginal BB" << (j + 1) << " deviation: " << fmt(u.deviations[j])
         << "\n";
  }
  doc["pass"] = pass;
  os << "  verification: " << (pass ? "PASS" : "FAIL") << "\n";

  const int exit_code = pass ? kExitOk : kExitNoConvergence;
  if (c.output == "json")
    return {exit_code, doc.dump(2) + "\n"};
  return {exit_code, os.str()};
}

//------------------------------------------------------------------------
// sweep
//------------------------------------------------------------------------

CommandResult cmd_sweep(const CliConfig &c) {
  if (c.d < 2)
    throw UsageError("sweep: requires d >= 2");
  std::size_t n_min = 0, n_max = 0;
  {
    const auto colon = c.n_range.find(':');
    try {
      if (colon == std::string::npos) {
        n_min = n_max = std::stoul(c.n_range);
      } else {
        n_min = std::stoul(c.n_range.substr(0, colon));
        n_max = std::stoul(c.n_range.substr(colon + 1));
      }
    } catch (const std::exception &) {
      throw UsageError("sweep: --n expects <min>:<max>");
    }
  }
  if (n_min < 2 || n_max < n_min)
    throw UsageError("sweep: need 2 <= n_min <= n_max");

  SweepOptions opts;
  opts.sdp_up_to = c.sdp_up_to;
  opts.side_cap = c.size_cap;
  opts.solver = solver_options(c);
  const std::vector<SweepRow> rows = sweep(c.d, n_min, n_max, opts);

  if (c.output == "json") {
    json doc = json::parse(sweep_to_json(c.d, rows));
    doc["config"] = config_json(c);
    return {kExitOk, doc.dump(2) + "\n"};
  }
  if (c.output == "csv")
    return {kExitOk, sweep_to_csv(rows)};

  std::ostringstream os;
  os << "simulation cost sweep, d=" << c.d << "\n";
  os << "  n   lower        sdp          upper\n";
  for (const auto &row : rows) {
    os << "  " << row.n << "   " << fmt(row.lower_linear) << "   ";
    os << (row.sdp_linear ? fmt(*row.sdp_linear) : std::string("-"));
    os << "   " << fmt(row.upper_linear) << "\n";
  }
  return {kExitOk, os.str()};
}

//------------------------------------------------------------------------
// simulate
//------------------------------------------------------------------------

ComplexMatrix pauli(char c) {
  ComplexMatrix m(2, 2);
  switch (c) {
  case 'I':
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    break;
  case 'X':
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    break;
  case 'Y':
    m(0, 1) = complex_t(0.0, -1.0);
    m(1, 0) = complex_t(0.0, 1.0);
    break;
  case 'Z':
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    break;
  default:
    throw UsageError("simulate: observable words use letters I, X, Y, Z");
  }
  return m;
}

ComplexMatrix parse_observable_matrix(const CliConfig &c, std::size_t dim_a) {
  const bool word = c.obs.find_first_not_of("IXYZ") == std::string::npos &&
                    !c.obs.empty();
  if (word) {
    if (c.d != 2 || dim_a != 2)
      throw UsageError(
          "simulate: tensor-word observables require qubit systems (d = 2); "
          "pass a JSON matrix file for other dimensions");
    if (c.obs.size() != 2)
      throw UsageError("simulate: the observable word must name the A and B_j "
                       "factors, e.g. ZZ");
    return kron(pauli(c.obs[0]), pauli(c.obs[1]));
  }
  std::ifstream in(c.obs);
  if (!in)
    throw UsageError("simulate: cannot open observable file '" + c.obs + "'");
  json doc;
  try {
    in >> doc;
  } catch (const std::exception &e) {
    throw UsageError(std::string("simulate: observable file is not JSON: ") +
                     e.what());
  }
  if (!doc.contains("matrix") || !doc["matrix"].is_array())
    throw UsageError("simulate: observable JSON needs a \"matrix\" array of "
                     "[re, im] rows");
  const auto &rows = doc["matrix"];
  const std::size_t side = rows.size();
  ComplexMatrix m(side, side);
  for (std::size_t i = 0; i < side; ++i) {
    if (rows[i].size() != side)
      throw UsageError("simulate: observable matrix is not square");
    for (std::size_t j = 0; j < side; ++j) {
      const auto &cell = rows[i][j];
      if (!cell.is_array() || cell.size() != 2)
        throw UsageError("simulate: matrix entries must be [re, im] pairs");
      m(i, j) = complex_t(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return m;
}

CommandResult cmd_simulate(const CliConfig &c) {
  if (c.d < 2)
    throw UsageError("simulate: requires d >= 2");
  if (c.n < 2)
    throw UsageError("simulate: requires n >= 2");
  if (c.j < 1 || c.j > c.n)
    throw UsageError("simulate: output index j must satisfy 1 <= j <= n");
  if (c.n == 2 && c.d < 2)
    throw UsageError("simulate: the optimal split requires d >= 2");

  // state on (A, B), dim A = d
  ComplexMatrix rho;
  if (c.state == "bell") {
    rho = max_entangled(c.d);
    rho *= 1.0 / static_cast<double>(c.d);
  } else if (c.state.rfind("random:", 0) == 0) {
    std::uint64_t state_seed = 0;
    try {
      state_seed = std::stoull(c.state.substr(7));
    } catch (const std::exception &) {
      throw UsageError("simulate: --state random:<seed> needs an integer seed");
    }
    rho = random_ginibre_density(c.d * c.d, state_seed);
  } else {
    throw UsageError("simulate: state must be bell or random:<seed>");
  }
  const SystemLayout rho_layout(
      std::vector<Subsystem>{{"A", c.d}, {"B", c.d}});

  const ComplexMatrix obs_matrix = parse_observable_matrix(c, c.d);
  if (obs_matrix.rows() != c.d * c.d)
    throw UsageError("simulate: observable side must be dim(A) * d");
  if (obs_matrix.herm_defect() > 1e-10)
    throw UsageError("simulate: observable must be Hermitian");
  const SystemLayout obs_layout(
      std::vector<Subsystem>{{"A", c.d}, {"Bout", c.d}});
  const Observable obs = make_observable(obs_matrix, obs_layout);
  if (obs.spectral_norm() > 1.0 + 1e-12)
    throw UsageError("simulate: observable spectral norm exceeds 1; the "
                     "estimator requires eigenvalues lambda_k in [-1, 1]");

  const HptpDecomposition decomp =
      (c.n == 2) ? choi_optimal_2broadcast(c.d)
                 : choi_universal_decomposition(c.d, c.n, c.size_cap);

  const std::size_t rounds =
      c.rounds ? *c.rounds : hoeffding_rounds(decomp.gamma(), c.delta, c.epsilon);

  const SamplingResult result = run_estimation(rho, rho_layout, decomp, obs,
                                               c.j, rounds, c.seed);
  const double oracle = exact_expectation(rho, rho_layout, decomp, obs, c.j);

  if (c.trace_log) {
    std::ofstream log(*c.trace_log);
    if (!log)
      throw UsageError("simulate: cannot write trace log '" + *c.trace_log + "'");
    log << records_to_csv(result.records);
  }

  json doc;
  doc["config"] = config_json(c);
  doc["estimate"] = result.estimate;
  doc["exact"] = oracle;
  doc["abs_error"] = std::abs(result.estimate - oracle);
  doc["rounds"] = result.rounds;
  doc["gamma"] = result.gamma;
  doc["empirical_std"] = result.empirical_std;
  doc["ci95"] = {result.ci95_low, result.ci95_high};
  doc["target_subsystem"] = result.target_subsystem;
  doc["seed"] = result.seed;
  doc["delta"] = c.delta;
  doc["epsilon"] = c.epsilon;

  if (c.output == "json" || c.output == "csv")
    return {kExitOk, doc.dump(2) + "\n"};
  std::ostringstream os;
  os << "quasiprobability estimation, d=" << c.d << ", n=" << c.n
     << ", target " << result.target_subsystem << "\n"
     << "  rounds M = " << result.rounds << " (gamma = " << fmt(result.gamma)
     << ")\n"
     << "  estimate xi = " << fmt(result.estimate) << "\n"
     << "  exact value = " << fmt(oracle) << "\n"
     << "  |xi - exact| = " << fmt(std::abs(result.estimate - oracle)) << "\n";
  return {kExitOk, os.str()};
}

//------------------------------------------------------------------------
// dump-sdp
//------------------------------------------------------------------------

CommandResult cmd_dump_sdp(const CliConfig &c) {
  if (c.d < 1 || c.n < 2)
    throw UsageError("dump-sdp: requires d >= 1, n >= 2");
  if (c.kind != "primal" && c.kind != "dual")
    throw UsageError("dump-sdp: kind must be primal or dual");
  const SdpProblem p = (c.kind == "primal") ? build_primal(c.d, c.n, c.size_cap)
                                            : build_dual(c.d, c.n, c.size_cap);
  json doc = json::parse(dump_sdp_json(p));
  doc["config"] = config_json(c);
  return {kExitOk, doc.dump(2) + "\n"};
}

} // namespace

std::string config_to_json(const CliConfig &config) {
  return config_json(config).dump(2);
}

std::size_t effective_size_cap(std::optional<std::size_t> flag_value) {
  if (flag_value)
    return *flag_value;
  if (const char *env = std::getenv("VBROADCAST_SIZE_CAP")) {
    try {
      const unsigned long long v = std::stoull(env);
      if (v > 0)
        return static_cast<std::size_t>(v);
    } catch (const std::exception &) {
      // fall through to the default on malformed values
    }
  }
  return kDefaultSideCap;
}

CommandResult run_command(const CliConfig &config) {
  try {
    if (config.dry_run)
      return {kExitOk, config_to_json(config) + "\n"};
    if (config.command == "cost")
      return cmd_cost(config);
    if (config.command == "bounds")
      return cmd_bounds(config);
    if (config.command == "certify")
      return cmd_certify(config);
    if (config.command == "verify")
      return cmd_verify(config);
    if (config.command == "sweep")
      return cmd_sweep(config);
    if (config.command == "simulate")
      return cmd_simulate(config);
    if (config.command == "dump-sdp")
      return cmd_dump_sdp(config);
    return {kExitUsage, "unknown command '" + config.command + "'\n"};
  } catch (const UsageError &e) {
    return {kExitUsage, std::string("usage error: ") + e.what() + "\n"};
  } catch (const std::invalid_argument &e) {
    return {kExitUsage, std::string("usage error: ") + e.what() + "\n"};
  } catch (const SolverBreakdown &e) {
    return {kExitNoConvergence, std::string("solver breakdown: ") + e.what() + "\n"};
  } catch (const std::runtime_error &e) {
    return {kExitNoConvergence, std::string("error: ") + e.what() + "\n"};
  }
}

} // namespace vbroadcast::cli
