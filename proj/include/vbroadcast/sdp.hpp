#ifndef VBROADCAST_SDP_HPP
#define VBROADCAST_SDP_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbroadcast/choi.hpp"
#include "vbroadcast/linalg.hpp"

namespace vbroadcast {

//------------------------------------------------------------------------
// Problem description
//------------------------------------------------------------------------
// Standard form over Hermitian matrix variables and real scalars:
//
//   min/max   sum_b <C_b, X_b> + sum_s c_s x_s
//   s.t.      sum_b <A_ib, X_b> + sum_s a_is x_s = rhs_i      i = 1..m
//             X_b >= 0 for PSD blocks, X_b Hermitian for free blocks,
//             x_s >= 0 for nonnegative scalars.
//
// Operator equalities are expanded into real scalar rows over the
// orthonormal Hermitian basis; rows stay grouped so residuals can be
// reported back at matrix level.

struct SparseHermitian {
  std::size_t side = 0;
  // every nonzero entry (both triangles)
  std::vector<std::tuple<std::size_t, std::size_t, complex_t>> entries;
  std::vector<std::size_t> nonzero_cols; // sorted, unique

  static SparseHermitian from_dense(const ComplexMatrix &m, double drop_tol = 0.0);
  ComplexMatrix to_dense() const;
  void finalize(); // sorts entries, fills nonzero_cols
};

struct BlockSpec {
  std::string name;
  std::size_t side;
  bool psd; // false: sign-unconstrained Hermitian (kept free in the solver)
};

struct ScalarSpec {
  std::string name;
  bool nonneg;
};

struct MatrixTerm {
  std::size_t block; // index into SdpProblem::blocks
  double scale;
  std::shared_ptr<const SparseHermitian> coeff;
};

struct ScalarTerm {
  std::size_t scalar; // index into SdpProblem::scalars
  double coeff;
};

struct EqualityRow {
  std::vector<MatrixTerm> terms;
  std::vector<ScalarTerm> scalar_terms;
  double rhs = 0.0;
};

// Rows of one operator equality, in Hermitian-basis order over a space of
// side `space_side`. A group may designate a slack variable: a PSD block
// entering each row k with coefficient -E_k (operator inequality recast as
// equality), or a nonnegative scalar with coefficient +1 (trace cap).
struct EqualityGroup {
  std::string name;
  std::vector<std::size_t> rows;
  std::size_t space_side = 1;
  std::optional<std::string> slack_block;
  std::optional<std::string> slack_scalar;
};

struct SdpProblem {
  std::vector<BlockSpec> blocks;
  std::vector<ScalarSpec> scalars;
  std::vector<MatrixTerm> objective_terms;
  std::vector<ScalarTerm> objective_scalars;
  bool maximize = false;
  std::vector<EqualityRow> rows;
  std::vector<EqualityGroup> groups;

  // metadata
  std::size_t d = 0;
  std::size_t n = 0;
  std::string kind; // "primal" or "dual"

  // warm-start hint: target trace per block (same order as blocks)
  std::vector<double> block_init_trace;

  std::size_t block_index(const std::string &name) const;
  std::size_t scalar_index(const std::string &name) const;
};

// Primal SDP for the optimal n-broadcast simulation cost:
//   min p1 + p2
//   s.t. tr_{\BBj}[J_N1 - J_N2] = Phi_{BBj}   j = 1..n   (d^4 rows each)
//        tr_{B^n}[J_Ni] = p_i I_B             i = 1,2    (d^2 rows each)
//        J_N1 >= 0, J_N2 >= 0.
SdpProblem build_primal(std::size_t d, std::size_t n,
                        std::size_t side_cap = kDefaultSideCap);

// Dual SDP:
//   max sum_j tr[X_BBj Phi]
//   s.t. tr Z <= 1, tr K <= 1,
//        Z (x) I - sum_j S_j(X_BBj (x) I) >= 0,
//        K (x) I + sum_j S_j(X_BBj (x) I) >= 0,
// with free Hermitian X_BBj, Z, K; the operator inequalities become PSD
// slack blocks W1, W2 of side d^(n+1) and the trace caps nonnegative
// scalar slacks.
SdpProblem build_dual(std::size_t d, std::size_t n,
                      std::size_t side_cap = kDefaultSideCap);

//------------------------------------------------------------------------
// Feasibility checkers
//------------------------------------------------------------------------

struct Candidate {
  std::map<std::string, ComplexMatrix> blocks;
  std::map<std::string, double> scalars;
};

struct GroupResidual {
  std::string name;
  double max_abs;
};

struct FeasibilityReport {
  double max_equality_residual = 0.0; // max-entry over group residual matrices
  double min_block_eigenvalue = 0.0;  // over PSD blocks (incl. computed slacks)
                                      // and nonnegative scalars
  double objective = 0.0;
  bool pass = false;
  std::vector<GroupResidual> group_residuals;
  // min eigenvalue of each slack block computed from an operator inequality
  std::map<std::string, double> inequality_margins;
};

// Evaluates every equality residual (matrix-level max entry per group) and
// every PSD margin for an externally supplied point. Slack-designated
// variables may be omitted; they are derived from their defining group.
// Throws std::invalid_argument on name or shape mismatch.
FeasibilityReport check_feasible(const SdpProblem &p, const Candidate &candidate,
                                 double tol);

FeasibilityReport check_feasible_primal(const SdpProblem &p,
                                        const Candidate &candidate, double tol);
FeasibilityReport check_feasible_dual(const SdpProblem &p,
                                      const Candidate &candidate, double tol);

// Closed-form certificate candidates.
Candidate optimal_2broadcast_primal_candidate(std::size_t d);
Candidate optimal_2broadcast_dual_candidate(std::size_t d);
// Z = K = I/d, X_BBj = 2/(d(n+d-1)) Phi_d - 1/(nd) I for every j.
Candidate nbroadcast_dual_candidate(std::size_t d, std::size_t n);

//------------------------------------------------------------------------
// Solver
//------------------------------------------------------------------------

struct SolveOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-7; // relative: |p-d| / (1 + |p| + |d|)
  std::size_t max_iter = 200;
};

enum class SolveStatus { optimal, max_iter, infeasible_detected };

struct SdpSolution {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0; // primal_objective - dual_objective
  std::map<std::string, ComplexMatrix> block_values;
  std::map<std::string, double> scalar_values;
  std::vector<double> dual_multipliers; // y, one per row
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// Thrown when the Newton system degenerates beyond recovery (distinct from
// plain non-convergence, which returns status max_iter).
class SolverBreakdown : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Primal-dual path-following with HKM scaling and Mehrotra
// predictor-corrector; dense Schur complement by Cholesky. Deterministic.
SdpSolution solve(const SdpProblem &p, const SolveOptions &opts = {});

//------------------------------------------------------------------------
// Problem dump ("vbroadcast-sdp/1")
//------------------------------------------------------------------------

std::string dump_sdp_json(const SdpProblem &p);

} // namespace vbroadcast

#endif
