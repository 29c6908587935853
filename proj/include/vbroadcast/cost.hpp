#ifndef VBROADCAST_COST_HPP
#define VBROADCAST_COST_HPP

#include <optional>
#include <string>
#include <vector>

#include "vbroadcast/sdp.hpp"

namespace vbroadcast {

// Simulation cost in linear form (gamma = p1 + p2) and bits (log2 gamma).
// Linear is primary in machine output; log2 is derived.
struct CostReport {
  std::size_t d = 0;
  std::size_t n = 0;
  double gamma_linear = 0.0;
  double gamma_log = 0.0;
  std::string source; // "analytic", "sdp" or "certificate"
  double lower_bound_linear = 0.0;
  double upper_bound_linear = 0.0;
};

// gamma*_2 = 3 - 4/(d+1) = (3d-1)/(d+1); requires d >= 2.
CostReport gamma2_analytic(std::size_t d);

// lower = 2nd/(n+d-1) - 1, upper = 2n - 1; lower <= upper always.
std::pair<double, double> bounds_n(std::size_t d, std::size_t n);

// build_primal + solve, bounds attached; throws if the solved value escapes
// [lower - 1e-5, upper + 1e-5] or on solver failure.
CostReport optimal_cost_sdp(std::size_t d, std::size_t n,
                            const SolveOptions &opts = {},
                            std::size_t side_cap = kDefaultSideCap);

struct CertificateReport {
  bool primal_pass = false;
  bool dual_pass = false;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  bool pass = false;
};

// Checks the closed-form primal/dual certificate pair for n = 2; the gap is
// expected to vanish to roundoff.
CertificateReport certificate_2broadcast(std::size_t d, double tol = 1e-9);

struct NBroadcastBoundsReport {
  bool m1_cptp_pass = false;
  bool m2_cptp_pass = false;
  double upper_from_gamma_prime = 0.0; // 2n - 1
  bool dual_lower_pass = false;
  double lower_obj = 0.0; // 2nd/(n+d-1) - 1
  bool pass = false;
};

// (a) verifies the n*M1 - (n-1)*M2 split of the universal protocol is CPTP
// on both sides, witnessing the 2n-1 upper bound; (b) checks the symmetric
// dual point, certifying the lower bound value.
NBroadcastBoundsReport certificate_nbroadcast_bounds(
    std::size_t d, std::size_t n, double tol = 1e-9,
    std::size_t side_cap = kDefaultSideCap);

struct SweepRow {
  std::size_t n = 0;
  double lower_linear = 0.0;
  std::optional<double> sdp_linear;
  double upper_linear = 0.0;
};

struct SweepOptions {
  std::size_t sdp_up_to = 0; // solve the SDP for n <= this (0: never)
  std::size_t side_cap = kDefaultSideCap;
  SolveOptions solver;
};

// Bounds for every row; SDP value where n <= sdp_up_to and the size cap
// admits it. Rows beyond the cap degrade to bounds-only.
std::vector<SweepRow> sweep(std::size_t d, std::size_t n_min, std::size_t n_max,
                            const SweepOptions &opts);

// header: n,lower_linear,sdp_linear,upper_linear,lower_log2,sdp_log2,upper_log2
std::string sweep_to_csv(const std::vector<SweepRow> &rows);
std::string sweep_to_json(std::size_t d, const std::vector<SweepRow> &rows);

} // namespace vbroadcast

#endif
