#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "vbroadcast/sdp.hpp"

using namespace vbroadcast;

TEST_CASE("build_primal: problem structure") {
  SUBCASE("d=2, n=2") {
    const SdpProblem p = build_primal(2, 2);
    REQUIRE(p.blocks.size() == 2);
    CHECK(p.blocks[0].side == 8);
    CHECK(p.blocks[1].side == 8);
    CHECK(p.blocks[0].psd);
    std::size_t marginal_groups = 0;
    for (const auto &g : p.groups)
      if (g.name.rfind("marginal", 0) == 0) {
        ++marginal_groups;
        CHECK(g.rows.size() == 16); // d^4 real rows per group
      }
    CHECK(marginal_groups == 2);
    CHECK(p.rows.size() == 2 * 16 + 2 * 4);
  }
  SUBCASE("d=2, n=3") {
    const SdpProblem p = build_primal(2, 3);
    CHECK(p.blocks[0].side == 16);
    std::size_t marginal_groups = 0;
    for (const auto &g : p.groups)
      if (g.name.rfind("marginal", 0) == 0)
        ++marginal_groups;
    CHECK(marginal_groups == 3);
  }
}

TEST_CASE("build_primal: marginal right-hand side encodes Phi exactly") {
  for (std::size_t d : {2, 3}) {
    const SdpProblem p = build_primal(d, 2);
    const ComplexMatrix phi = max_entangled(d);
    for (const auto &g : p.groups) {
      if (g.name.rfind("marginal", 0) != 0)
        continue;
      std::vector<double> rhs;
      for (std::size_t r : g.rows)
        rhs.push_back(p.rows[r].rhs);
      CHECK(max_abs_diff(herm_decode(rhs, d * d), phi) == 0.0);
    }
  }
}

TEST_CASE("build_dual: problem structure") {
  const SdpProblem p = build_dual(2, 2);
  CHECK(p.maximize);
  // two free X blocks of side 4, free Z/K of side 2, two PSD slacks side 8
  std::size_t psd_slacks = 0, free_blocks = 0;
  for (const auto &b : p.blocks) {
    if (b.psd) {
      ++psd_slacks;
      CHECK(b.side == 8);
    } else {
      ++free_blocks;
    }
  }
  CHECK(psd_slacks == 2);
  CHECK(free_blocks == 4);
}

TEST_CASE("solve: primal objectives match the closed forms") {
  SUBCASE("d=2, n=2 -> 5/3") {
    const SdpSolution s = solve(build_primal(2, 2));
    CHECK(s.status == SolveStatus::optimal);
    CHECK(std::abs(s.primal_objective - 5.0 / 3.0) <= 1e-6);
  }
  SUBCASE("d=3, n=2 -> 2") {
    const SdpSolution s = solve(build_primal(3, 2));
    CHECK(s.status == SolveStatus::optimal);
    CHECK(std::abs(s.primal_objective - 2.0) <= 1e-6);
  }
  SUBCASE("d=2, n=3 -> 2") {
    const SdpSolution s = solve(build_primal(2, 3));
    CHECK(s.status == SolveStatus::optimal);
    CHECK(std::abs(s.primal_objective - 2.0) <= 1e-5);
  }
}

TEST_CASE("solve: solution blocks satisfy the constraints") {
  const SdpSolution s = solve(build_primal(2, 2));
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.primal_residual <= 1e-8);
  CHECK(s.dual_residual <= 1e-8);
  CHECK(std::abs(s.gap) <= 1e-6);
  CHECK(s.gap == doctest::Approx(s.primal_objective - s.dual_objective));
  const ComplexMatrix &j1 = s.block_values.at("J_N1");
  CHECK(is_psd(j1, 1e-8));
  CHECK(s.scalar_values.at("p1") + s.scalar_values.at("p2") ==
        doctest::Approx(s.primal_objective).epsilon(1e-9));
  // trace preservation at the found weights
  const SystemLayout layout = broadcast_layout(2, 2);
  ComplexMatrix target = ComplexMatrix::identity(2);
  target *= s.scalar_values.at("p1");
  CHECK(max_abs_diff(partial_trace(j1, layout, {"B"}), target) <= 1e-7);
}

TEST_CASE("solve: deterministic across reruns") {
  const SdpSolution a = solve(build_primal(2, 2));
  const SdpSolution b = solve(build_primal(2, 2));
  CHECK(a.primal_objective == b.primal_objective);
  CHECK(a.dual_objective == b.dual_objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("solve: max_iter returns the best iterate") {
  SolveOptions opts;
  opts.max_iter = 1;
  const SdpSolution s = solve(build_primal(2, 2), opts);
  CHECK(s.status == SolveStatus::max_iter);
}

TEST_CASE("solve: dual problem through the free-variable path") {
  const SdpSolution s = solve(build_dual(2, 2));
  CHECK(s.status == SolveStatus::optimal);
  CHECK(std::abs(s.primal_objective - 5.0 / 3.0) <= 1e-5);
}

TEST_CASE("solve: inconsistent duplicated rows are detected") {
  SdpProblem p = build_primal(2, 2);
  // duplicate the first row with a contradictory right-hand side
  EqualityRow bad = p.rows[p.groups[0].rows[0]];
  bad.rhs += 0.5;
  p.groups.push_back({"contradiction", {p.rows.size()}, 1, {}, {}});
  p.rows.push_back(bad);
  const SdpSolution s = solve(p);
  CHECK(s.status == SolveStatus::infeasible_detected);
}

TEST_CASE("check_feasible_primal: certificate candidates") {
  SUBCASE("d=2 passes with objective 5/3") {
    const FeasibilityReport r = check_feasible_primal(
        build_primal(2, 2), optimal_2broadcast_primal_candidate(2), 1e-9);
    CHECK(r.pass);
    CHECK(r.objective == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("d=5 passes with objective 7/3") {
    const FeasibilityReport r = check_feasible_primal(
        build_primal(5, 2), optimal_2broadcast_primal_candidate(5), 1e-9);
    CHECK(r.pass);
    CHECK(r.objective == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("zeroed candidate fails with max residual 1") {
    Candidate zero;
    zero.blocks["J_N1"] = ComplexMatrix::zero(8);
    zero.blocks["J_N2"] = ComplexMatrix::zero(8);
    zero.scalars["p1"] = 0.0;
    zero.scalars["p2"] = 0.0;
    const FeasibilityReport r =
        check_feasible_primal(build_primal(2, 2), zero, 1e-9);
    CHECK_FALSE(r.pass);
    CHECK(r.max_equality_residual == doctest::Approx(1.0));
  }
}

TEST_CASE("check_feasible_dual: certificate candidates") {
  SUBCASE("d=2 objective 5/3") {
    const FeasibilityReport r = check_feasible_dual(
        build_dual(2, 2), optimal_2broadcast_dual_candidate(2), 1e-9);
    CHECK(r.pass);
    CHECK(r.objective == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(r.inequality_margins.count("W1") == 1);
    CHECK(r.inequality_margins.count("W2") == 1);
  }
  SUBCASE("d=4 objective 11/5") {
    const FeasibilityReport r = check_feasible_dual(
        build_dual(4, 2), optimal_2broadcast_dual_candidate(4), 1e-9);
    CHECK(r.pass);
    CHECK(r.objective == doctest::Approx(11.0 / 5.0).epsilon(1e-12));
  }
  SUBCASE("n-broadcast point at d=2, n=4 gives 11/5") {
    const FeasibilityReport r = check_feasible_dual(
        build_dual(2, 4), nbroadcast_dual_candidate(2, 4), 1e-9);
    CHECK(r.pass);
    CHECK(r.objective == doctest::Approx(11.0 / 5.0).epsilon(1e-12));
  }
}

TEST_CASE("check_feasible: name and shape validation") {
  const SdpProblem p = build_primal(2, 2);
  Candidate bad = optimal_2broadcast_primal_candidate(2);
  bad.blocks["J_N1"] = ComplexMatrix::identity(4); // wrong side
  CHECK_THROWS_AS(check_feasible_primal(p, bad, 1e-9), std::invalid_argument);

  Candidate missing = optimal_2broadcast_primal_candidate(2);
  missing.blocks.erase("J_N2");
  CHECK_THROWS_AS(check_feasible_primal(p, missing, 1e-9), std::invalid_argument);

  Candidate renamed = optimal_2broadcast_primal_candidate(2);
  renamed.blocks["J_N3"] = renamed.blocks["J_N1"];
  CHECK_THROWS_AS(check_feasible_primal(p, renamed, 1e-9), std::invalid_argument);
}

TEST_CASE("property: weak duality of accepted candidate pairs") {
  for (std::size_t d : {2, 3, 4}) {
    const FeasibilityReport primal = check_feasible_primal(
        build_primal(d, 2), optimal_2broadcast_primal_candidate(d), 1e-9);
    const FeasibilityReport dual = check_feasible_dual(
        build_dual(d, 2), optimal_2broadcast_dual_candidate(d), 1e-9);
    REQUIRE(primal.pass);
    REQUIRE(dual.pass);
    CHECK(dual.objective <= primal.objective + 2e-9);
  }
}

TEST_CASE("dump_sdp_json: schema and structure") {
  const std::string text = dump_sdp_json(build_primal(2, 2));
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc["schema"] == "vbroadcast-sdp/1");
  CHECK(doc["kind"] == "primal");
  CHECK(doc["d"] == 2);
  CHECK(doc["n"] == 2);
  CHECK(doc["blocks"].size() == 2);
  CHECK(doc["scalars"].size() == 2);
  CHECK(doc["equalities"].size() == 40);
  // complex entries are [i, j, [re, im]]
  const auto &entry = doc["equalities"][0]["terms"][0]["entries"][0];
  CHECK(entry.size() == 3);
  CHECK(entry[2].size() == 2);

  const auto dual = nlohmann::json::parse(dump_sdp_json(build_dual(2, 2)));
  CHECK(dual["kind"] == "dual");
  CHECK(dual["maximize"] == true);
}
