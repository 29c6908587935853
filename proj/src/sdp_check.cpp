#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "vbroadcast/sdp.hpp"

namespace vbroadcast {

namespace {

double sparse_inner(const SparseHermitian &a, const ComplexMatrix &x) {
  // <A, X> = tr(AX), real for Hermitian A, X
  complex_t sum = 0.0;
  for (const auto &[i, j, v] : a.entries)
    sum += v * x(j, i);
  return sum.real();
}

} // namespace

FeasibilityReport check_feasible(const SdpProblem &p, const Candidate &candidate,
                                 double tol) {
  // assemble the full assignment, deriving slack variables from their groups
  std::vector<ComplexMatrix> block_values(p.blocks.size());
  std::vector<bool> block_set(p.blocks.size(), false);
  std::vector<double> scalar_values(p.scalars.size(), 0.0);
  std::vector<bool> scalar_set(p.scalars.size(), false);
  std::vector<bool> block_is_slack(p.blocks.size(), false);
  std::vector<bool> scalar_is_slack(p.scalars.size(), false);

  for (const auto &group : p.groups) {
    if (group.slack_block)
      block_is_slack[p.block_index(*group.slack_block)] = true;
    if (group.slack_scalar)
      scalar_is_slack[p.scalar_index(*group.slack_scalar)] = true;
  }

  for (const auto &[name, value] : candidate.blocks) {
    const std::size_t idx = p.block_index(name);
    if (value.rows() != p.blocks[idx].side || !value.square())
      throw std::invalid_argument("check_feasible: block '" + name +
                                  "' has the wrong shape");
    if (value.herm_defect() > kHermTolEig)
      throw std::invalid_argument("check_feasible: block '" + name +
                                  "' is not Hermitian");
    block_values[idx] = value;
    block_set[idx] = true;
  }
  for (const auto &[name, value] : candidate.scalars) {
    const std::size_t idx = p.scalar_index(name);
    scalar_values[idx] = value;
    scalar_set[idx] = true;
  }
  for (std::size_t i = 0; i < p.blocks.size(); ++i)
    if (!block_set[i] && !block_is_slack[i])
      throw std::invalid_argument("check_feasible: missing block '" +
                                  p.blocks[i].name + "'");
  for (std::size_t i = 0; i < p.scalars.size(); ++i)
    if (!scalar_set[i] && !scalar_is_slack[i])
      throw std::invalid_argument("check_feasible: missing scalar '" +
                                  p.scalars[i].name + "'");

  // evaluate the non-slack part of a row
  auto row_partial = [&](const EqualityRow &row, std::size_t skip_block,
                         std::size_t skip_scalar) {
    double lhs = 0.0;
    for (const auto &term : row.terms)
      if (term.block != skip_block)
        lhs += term.scale * sparse_inner(*term.coeff, block_values[term.block]);
    for (const auto &term : row.scalar_terms)
      if (term.scalar != skip_scalar)
        lhs += term.coeff * scalar_values[term.scalar];
    return lhs;
  };
  const std::size_t kNone = static_cast<std::size_t>(-1);

  FeasibilityReport report;

  // derive slacks: W = decode(lhs_other - rhs) for slack blocks entering as
  // -E_k per row, s = rhs - lhs_other for +1 scalar slacks
  for (const auto &group : p.groups) {
    if (group.slack_block) {
      const std::size_t idx = p.block_index(*group.slack_block);
      if (!block_set[idx]) {
        std::vector<double> coeffs;
        coeffs.reserve(group.rows.size());
        for (std::size_t r : group.rows)
          coeffs.push_back(row_partial(p.rows[r], idx, kNone) - p.rows[r].rhs);
        block_values[idx] = herm_decode(coeffs, group.space_side);
        block_set[idx] = true;
      }
      report.inequality_margins[*group.slack_block] =
          min_eigenvalue(block_values[idx]);
    }
    if (group.slack_scalar) {
      const std::size_t idx = p.scalar_index(*group.slack_scalar);
      if (!scalar_set[idx]) {
        const std::size_t r = group.rows.front();
        scalar_values[idx] = p.rows[r].rhs - row_partial(p.rows[r], kNone, idx);
        scalar_set[idx] = true;
      }
    }
  }

  // group residuals at matrix level
  report.max_equality_residual = 0.0;
  for (const auto &group : p.groups) {
    std::vector<double> residual;
    residual.reserve(group.rows.size());
    for (std::size_t r : group.rows)
      residual.push_back(row_partial(p.rows[r], kNone, kNone) - p.rows[r].rhs);
    double max_abs = 0.0;
    if (group.space_side > 1 &&
        group.rows.size() == herm_basis_dim(group.space_side)) {
      max_abs = herm_decode(residual, group.space_side).max_abs();
    } else {
      for (double v : residual)
        max_abs = std::max(max_abs, std::abs(v));
    }
    report.group_residuals.push_back({group.name, max_abs});
    report.max_equality_residual = std::max(report.max_equality_residual, max_abs);
  }

  // PSD margins
  report.min_block_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.blocks.size(); ++i)
    if (p.blocks[i].psd)
      report.min_block_eigenvalue = std::min(
          report.min_block_eigenvalue, min_eigenvalue(block_values[i]));
  for (std::size_t i = 0; i < p.scalars.size(); ++i)
    if (p.scalars[i].nonneg)
      report.min_block_eigenvalue =
          std::min(report.min_block_eigenvalue, scalar_values[i]);
  if (!std::isfinite(report.min_block_eigenvalue))
    report.min_block_eigenvalue = 0.0;

  // objective in the problem's own sense
  report.objective = 0.0;
  for (const auto &term : p.objective_terms)
    report.objective +=
        term.scale * sparse_inner(*term.coeff, block_values[term.block]);
  for (const auto &term : p.objective_scalars)
    report.objective += term.coeff * scalar_values[term.scalar];

  report.pass = report.max_equality_residual <= tol &&
                report.min_block_eigenvalue >= -tol;
  return report;
}

FeasibilityReport check_feasible_primal(const SdpProblem &p,
                                        const Candidate &candidate, double tol) {
  if (p.kind != "primal")
    throw std::invalid_argument("check_feasible_primal: not a primal problem");
  return check_feasible(p, candidate, tol);
}

FeasibilityReport check_feasible_dual(const SdpProblem &p,
                                      const Candidate &candidate, double tol) {
  if (p.kind != "dual")
    throw std::invalid_argument("check_feasible_dual: not a dual problem");
  return check_feasible(p, candidate, tol);
}

//------------------------------------------------------------------------
// Problem dump
//------------------------------------------------------------------------

namespace {

nlohmann::json sparse_to_json(const SparseHermitian &m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto &[i, j, v] : m.entries)
    entries.push_back({i, j, {v.real(), v.imag()}});
  return entries;
}

} // namespace

std::string dump_sdp_json(const SdpProblem &p) {
  nlohmann::json doc;
  doc["schema"] = "vbroadcast-sdp/1";
  doc["kind"] = p.kind;
  doc["d"] = p.d;
  doc["n"] = p.n;
  doc["maximize"] = p.maximize;

  doc["blocks"] = nlohmann::json::array();
  for (const auto &b : p.blocks)
    doc["blocks"].push_back(
        {{"name", b.name}, {"side", b.side}, {"cone", b.psd ? "psd" : "free"}});

  doc["scalars"] = nlohmann::json::array();
  for (const auto &s : p.scalars)
    doc["scalars"].push_back({{"name", s.name}, {"nonneg", s.nonneg}});

  nlohmann::json obj;
  obj["terms"] = nlohmann::json::array();
  for (const auto &t : p.objective_terms)
    obj["terms"].push_back({{"block", p.blocks[t.block].name},
                            {"scale", t.scale},
                            {"entries", sparse_to_json(*t.coeff)}});
  obj["scalar_terms"] = nlohmann::json::array();
  for (const auto &t : p.objective_scalars)
    obj["scalar_terms"].push_back(
        {{"scalar", p.scalars[t.scalar].name}, {"coeff", t.coeff}});
  doc["objective"] = obj;

  doc["equalities"] = nlohmann::json::array();
  for (const auto &group : p.groups) {
    for (std::size_t r : group.rows) {
      const auto &row = p.rows[r];
      nlohmann::json jrow;
      jrow["group"] = group.name;
      jrow["rhs"] = row.rhs;
      jrow["terms"] = nlohmann::json::array();
      for (const auto &t : row.terms)
        jrow["terms"].push_back({{"block", p.blocks[t.block].name},
                                 {"scale", t.scale},
                                 {"entries", sparse_to_json(*t.coeff)}});
      jrow["scalar_terms"] = nlohmann::json::array();
      for (const auto &t : row.scalar_terms)
        jrow["scalar_terms"].push_back(
            {{"scalar", p.scalars[t.scalar].name}, {"coeff", t.coeff}});
      doc["equalities"].push_back(std::move(jrow));
    }
  }

  return doc.dump(2);
}

} // namespace vbroadcast
