#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vbroadcast/cost.hpp"

namespace vbroadcast {

namespace {

double log2_safe(double v) { return std::log2(v); }

std::string format_g(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

} // namespace

CostReport gamma2_analytic(std::size_t d) {
  if (d < 2)
    throw std::invalid_argument("gamma2_analytic: requires d >= 2");
  const double dd = static_cast<double>(d);
  CostReport report;
  report.d = d;
  report.n = 2;
  report.gamma_linear = 3.0 - 4.0 / (dd + 1.0);
  report.gamma_log = log2_safe(report.gamma_linear);
  report.source = "analytic";
  const auto [lower, upper] = bounds_n(d, 2);
  report.lower_bound_linear = lower;
  report.upper_bound_linear = upper;
  return report;
}

std::pair<double, double> bounds_n(std::size_t d, std::size_t n) {
  if (d < 2 || n < 2)
    throw std::invalid_argument("bounds_n: requires d, n >= 2");
  const double dd = static_cast<double>(d), nn = static_cast<double>(n);
  const double lower = 2.0 * nn * dd / (nn + dd - 1.0) - 1.0;
  const double upper = 2.0 * nn - 1.0;
  return {lower, upper};
}

CostReport optimal_cost_sdp(std::size_t d, std::size_t n,
                            const SolveOptions &opts, std::size_t side_cap) {
  const SdpProblem problem = build_primal(d, n, side_cap);
  const SdpSolution solution = solve(problem, opts);
  if (solution.status == SolveStatus::infeasible_detected)
    throw std::runtime_error("optimal_cost_sdp: solver reported infeasibility");
  if (solution.status != SolveStatus::optimal)
    throw std::runtime_error(
        "optimal_cost_sdp: solver stopped before reaching tolerance");

  CostReport report;
  report.d = d;
  report.n = n;
  report.gamma_linear = solution.primal_objective;
  report.gamma_log = log2_safe(report.gamma_linear);
  report.source = "sdp";
  const auto [lower, upper] = bounds_n(d, n);
  report.lower_bound_linear = lower;
  report.upper_bound_linear = upper;
  if (report.gamma_linear < lower - 1e-5 || report.gamma_linear > upper + 1e-5)
    throw std::runtime_error(
        "optimal_cost_sdp: solved value escapes the certified bounds");
  return report;
}

CertificateReport certificate_2broadcast(std::size_t d, double tol) {
  if (d < 2)
    throw std::invalid_argument("certificate_2broadcast: requires d >= 2");

  const SdpProblem primal = build_primal(d, 2);
  const FeasibilityReport pr =
      check_feasible_primal(primal, optimal_2broadcast_primal_candidate(d), tol);

  const SdpProblem dual = build_dual(d, 2);
  const FeasibilityReport dr =
      check_feasible_dual(dual, optimal_2broadcast_dual_candidate(d), tol);

  CertificateReport report;
  report.primal_pass = pr.pass;
  report.dual_pass = dr.pass;
  report.primal_obj = pr.objective;
  report.dual_obj = dr.objective;
  report.gap = pr.objective - dr.objective;
  report.pass = pr.pass && dr.pass;
  return report;
}

NBroadcastBoundsReport certificate_nbroadcast_bounds(std::size_t d, std::size_t n,
                                                     double tol,
                                                     std::size_t side_cap) {
  if (d < 2 || n < 2)
    throw std::invalid_argument(
        "certificate_nbroadcast_bounds: requires d, n >= 2");

  NBroadcastBoundsReport report;

  const HptpDecomposition split = choi_universal_decomposition(d, n, side_cap);
  report.m1_cptp_pass = verify_cptp(split.choi1, 1.0, tol).pass;
  report.m2_cptp_pass = verify_cptp(split.choi2, 1.0, tol).pass;
  report.upper_from_gamma_prime = split.gamma(); // n + (n-1) = 2n - 1

  const SdpProblem dual = build_dual(d, n, side_cap);
  const FeasibilityReport dr =
      check_feasible_dual(dual, nbroadcast_dual_candidate(d, n), tol);
  report.dual_lower_pass = dr.pass;
  report.lower_obj = dr.objective;

  report.pass =
      report.m1_cptp_pass && report.m2_cptp_pass && report.dual_lower_pass;
  return report;
}

std::vector<SweepRow> sweep(std::size_t d, std::size_t n_min, std::size_t n_max,
                            const SweepOptions &opts) {
  if (d < 2 || n_min < 2 || n_max < n_min)
    throw std::invalid_argument("sweep: requires d >= 2 and 2 <= n_min <= n_max");

  std::vector<SweepRow> rows;
  for (std::size_t n = n_min; n <= n_max; ++n) {
    SweepRow row;
    row.n = n;
    const auto [lower, upper] = bounds_n(d, n);
    row.lower_linear = lower;
    row.upper_linear = upper;
    bool within_cap = true;
    double side = 1.0;
    for (std::size_t i = 0; i < n + 1; ++i) {
      side *= static_cast<double>(d);
      if (side > static_cast<double>(opts.side_cap)) {
        within_cap = false;
        break;
      }
    }
    if (n <= opts.sdp_up_to && within_cap)
      row.sdp_linear =
          optimal_cost_sdp(d, n, opts.solver, opts.side_cap).gamma_linear;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow> &rows) {
  std::ostringstream os;
  os << "n,lower_linear,sdp_linear,upper_linear,lower_log2,sdp_log2,upper_log2\n";
  for (const auto &row : rows) {
    os << row.n << ',' << format_g(row.lower_linear) << ',';
    if (row.sdp_linear)
      os << format_g(*row.sdp_linear);
    os << ',' << format_g(row.upper_linear) << ','
       << format_g(log2_safe(row.lower_linear)) << ',';
    if (row.sdp_linear)
      os << format_g(log2_safe(*row.sdp_linear));
    os << ',' << format_g(log2_safe(row.upper_linear)) << '\n';
  }
  return os.str();
}

std::string sweep_to_json(std::size_t d, const std::vector<SweepRow> &rows) {
  nlohmann::json doc;
  doc["d"] = d;
  doc["rows"] = nlohmann::json::array();
  for (const auto &row : rows) {
    nlohmann::json jrow;
    jrow["n"] = row.n;
    jrow["lower_linear"] = row.lower_linear;
    jrow["upper_linear"] = row.upper_linear;
    jrow["lower_log2"] = log2_safe(row.lower_linear);
    jrow["upper_log2"] = log2_safe(row.upper_linear);
    if (row.sdp_linear) {
      jrow["sdp_linear"] = *row.sdp_linear;
      jrow["sdp_log2"] = log2_safe(*row.sdp_linear);
    } else {
      jrow["sdp_linear"] = nullptr;
      jrow["sdp_log2"] = nullptr;
    }
    doc["rows"].push_back(std::move(jrow));
  }
  return doc.dump(2);
}

} // namespace vbroadcast
