#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "vbroadcast/cost.hpp"

using namespace vbroadcast;

TEST_CASE("gamma2_analytic: known values") {
  const CostReport d2 = gamma2_analytic(2);
  CHECK(d2.gamma_linear == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(d2.gamma_log == doctest::Approx(0.7369655941662062).epsilon(1e-12));

  const CostReport d3 = gamma2_analytic(3);
  CHECK(d3.gamma_linear == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(d3.gamma_log == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(gamma2_analytic(1), std::invalid_argument);
}

TEST_CASE("gamma2_analytic: strictly increasing, bounded by 3") {
  double prev = 0.0;
  for (std::size_t d = 2; d <= 50; ++d) {
    const double g = gamma2_analytic(d).gamma_linear;
    CHECK(g > prev);
    CHECK(g < 3.0);
    prev = g;
  }
  // converges to 3 from below: 3 - gamma(50) = 4/51
  CHECK(3.0 - prev == doctest::Approx(4.0 / 51.0).epsilon(1e-13));
}

TEST_CASE("bounds_n: closed forms") {
  SUBCASE("n=2 lower bound matches the analytic cost exactly") {
    for (std::size_t d = 2; d <= 9; ++d) {
      const auto [lower, upper] = bounds_n(d, 2);
      CHECK(std::abs(lower - gamma2_analytic(d).gamma_linear) <= 1e-14);
      CHECK(upper == 3.0);
    }
  }
  SUBCASE("d=2, n=3 -> (2, 5)") {
    const auto [lower, upper] = bounds_n(2, 3);
    CHECK(lower == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(upper == 5.0);
  }
  SUBCASE("lower approaches upper as d grows") {
    const auto [lower, upper] = bounds_n(100000, 4);
    CHECK(upper == 7.0);
    CHECK(upper - lower < 3e-4);
    for (std::size_t d = 2; d <= 30; ++d) {
      const auto [lo, up] = bounds_n(d, 4);
      CHECK(lo <= up);
    }
  }
}

TEST_CASE("optimal_cost_sdp: matches analytic values and bounds") {
  SUBCASE("(2,2)") {
    const CostReport r = optimal_cost_sdp(2, 2);
    CHECK(std::abs(r.gamma_linear - 5.0 / 3.0) <= 1e-6);
    CHECK(r.source == "sdp");
    CHECK(r.lower_bound_linear <= r.gamma_linear + 1e-5);
    CHECK(r.gamma_linear <= r.upper_bound_linear + 1e-5);
    CHECK(r.gamma_log == doctest::Approx(std::log2(r.gamma_linear)).epsilon(1e-12));
  }
  SUBCASE("(2,3)") {
    const CostReport r = optimal_cost_sdp(2, 3);
    CHECK(std::abs(r.gamma_linear - 2.0) <= 1e-5);
  }
  SUBCASE("(2,4)") {
    const CostReport r = optimal_cost_sdp(2, 4);
    CHECK(std::abs(r.gamma_linear - 11.0 / 5.0) <= 1e-5);
  }
}

TEST_CASE("certificate_2broadcast: passes with vanishing gap") {
  SUBCASE("d=2") {
    const CertificateReport r = certificate_2broadcast(2);
    CHECK(r.pass);
    CHECK(r.primal_pass);
    CHECK(r.dual_pass);
    CHECK(std::abs(r.gap) <= 1e-10);
    CHECK(r.primal_obj == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("d=7 objective 2.5") {
    const CertificateReport r = certificate_2broadcast(7);
    CHECK(r.pass);
    CHECK(r.primal_obj == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(r.dual_obj == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("corrupted candidate fails") {
    Candidate corrupted = optimal_2broadcast_primal_candidate(2);
    corrupted.scalars["p1"] /= 2.0;
    const FeasibilityReport r =
        check_feasible_primal(build_primal(2, 2), corrupted, 1e-9);
    CHECK_FALSE(r.pass);
  }
}

TEST_CASE("property: certificates pass for d = 2..8") {
  for (std::size_t d = 2; d <= 8; ++d) {
    CAPTURE(d);
    const CertificateReport r = certificate_2broadcast(d);
    CHECK(r.pass);
    CHECK(std::abs(r.gap) <= 1e-10);
    const double expected = (3.0 * d - 1.0) / (d + 1.0);
    CHECK(r.primal_obj == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("certificate_nbroadcast_bounds") {
  SUBCASE("d=2, n=3: CPTP split witnesses upper 5, dual point gives 2") {
    const NBroadcastBoundsReport r = certificate_nbroadcast_bounds(2, 3);
    CHECK(r.pass);
    CHECK(r.m1_cptp_pass);
    CHECK(r.m2_cptp_pass);
    CHECK(r.upper_from_gamma_prime == doctest::Approx(5.0));
    CHECK(r.dual_lower_pass);
    CHECK(r.lower_obj == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("d=3, n=2: lower bound coincides with the analytic cost 2") {
    const NBroadcastBoundsReport r = certificate_nbroadcast_bounds(3, 2);
    CHECK(r.pass);
    CHECK(r.lower_obj == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.lower_obj ==
          doctest::Approx(gamma2_analytic(3).gamma_linear).epsilon(1e-12));
    CHECK(r.upper_from_gamma_prime == doctest::Approx(3.0));
  }
}

TEST_CASE("sweep: bounds rows, SDP rows, degradation") {
  SweepOptions opts;
  opts.sdp_up_to = 3;
  const auto rows = sweep(2, 2, 5, opts);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].n == 2);
  CHECK(rows[0].lower_linear == doctest::Approx(5.0 / 3.0));
  CHECK(rows[0].upper_linear == doctest::Approx(3.0));
  REQUIRE(rows[0].sdp_linear.has_value());
  CHECK(std::abs(*rows[0].sdp_linear - 5.0 / 3.0) <= 1e-4);
  REQUIRE(rows[1].sdp_linear.has_value());
  CHECK_FALSE(rows[2].sdp_linear.has_value()); // beyond sdp_up_to
  CHECK_FALSE(rows[3].sdp_linear.has_value());

  // monotone nondecreasing bounds in n
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].lower_linear >= rows[i - 1].lower_linear);
    CHECK(rows[i].upper_linear >= rows[i - 1].upper_linear);
  }
}

TEST_CASE("sweep: size cap degrades to bounds-only rows") {
  SweepOptions opts;
  opts.sdp_up_to = 10;
  opts.side_cap = 16; // d^(n+1) <= 16 admits only n = 2,3 at d = 2
  const auto rows = sweep(2, 2, 10, opts);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0].sdp_linear.has_value());
  CHECK(rows[1].sdp_linear.has_value());
  for (std::size_t i = 2; i < rows.size(); ++i)
    CHECK_FALSE(rows[i].sdp_linear.has_value());
  // n = 10 row: lower = 40/11 - 1, upper = 19
  CHECK(rows[8].n == 10);
  CHECK(rows[8].lower_linear == doctest::Approx(40.0 / 11.0 - 1.0).epsilon(1e-13));
  CHECK(rows[8].upper_linear == doctest::Approx(19.0));
}

TEST_CASE("sweep: CSV schema") {
  SweepOptions opts;
  opts.sdp_up_to = 2;
  const auto rows = sweep(2, 2, 3, opts);
  const std::string csv = sweep_to_csv(rows);
  CHECK(csv.rfind("n,lower_linear,sdp_linear,upper_linear,lower_log2,sdp_log2,"
                  "upper_log2\n",
                  0) == 0);
  // bounds-only rows leave the sdp fields empty
  const auto second_line_start = csv.find('\n', csv.find('\n') + 1) + 1;
  const std::string row3 = csv.substr(second_line_start);
  CHECK(row3.rfind("3,", 0) == 0);
  CHECK(row3.find(",,") != std::string::npos);

  const auto doc = nlohmann::json::parse(sweep_to_json(2, rows));
  CHECK(doc["d"] == 2);
  REQUIRE(doc["rows"].size() == 2);
  CHECK(doc["rows"][1]["sdp_linear"].is_null());
  CHECK(doc["rows"][0]["lower_linear"] ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-12));
}
