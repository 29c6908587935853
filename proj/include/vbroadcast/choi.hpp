#ifndef VBROADCAST_CHOI_HPP
#define VBROADCAST_CHOI_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "vbroadcast/linalg.hpp"

namespace vbroadcast {

// Largest allowed matrix side for dense protocol construction. Overridable
// per call (the CLI reads VBROADCAST_SIZE_CAP).
inline constexpr std::size_t kDefaultSideCap = 4096;

// Layout (B, B1..Bn), every subsystem of dimension d.
SystemLayout broadcast_layout(std::size_t d, std::size_t n);

// Choi operator of a Hermitian-preserving map B -> B1..Bn, stored on the
// layout (B, B1..Bn). J = sum_ij |i><j| (x) Gamma(|i><j|).
struct ChoiOperator {
  ComplexMatrix matrix;
  SystemLayout layout;

  std::size_t input_dim() const { return layout.at(0).dim; }
  std::size_t n_outputs() const { return layout.size() - 1; }
};

// Validates Hermiticity (1e-12) and the (B, B1..Bn) layout shape.
ChoiOperator make_choi(ComplexMatrix matrix, SystemLayout layout);

// Choi of the identity channel B -> B1 (Phi_d on (B, B1)).
ChoiOperator choi_identity_channel(std::size_t d);

// The three-term 2-broadcast Choi
//   (1/d) Phi_{BB1} (x) I_{B2} + (1/d) Phi_{BB2} (x) I_{B1}
//   - (1/d) Phi_{B1B2} (x) I_B
// on layout (B, B1, B2). Hermitian, trace d.
ChoiOperator choi_warmup_2broadcast(std::size_t d);

// Universal n-broadcast Choi
//   (1/d^(n-1)) sum_j S_{B1Bj}(Phi_{BB1} (x) I_{B2..Bn})
//   - ((n-1)/d^(n-1)) Phi_{B1B2} (x) I_{B B3..Bn}.
// Equals choi_warmup_2broadcast(d) for n = 2.
ChoiOperator choi_universal_nbroadcast(std::size_t d, std::size_t n,
                                       std::size_t side_cap = kDefaultSideCap);

// Signed two-channel decomposition p1*N1 - p2*N2 of an HPTP map; both Choi
// operators are CPTP (PSD, tr_outputs = I_B).
struct HptpDecomposition {
  double p1;
  ChoiOperator choi1;
  double p2;
  ChoiOperator choi2;

  double gamma() const { return p1 + p2; }
  ComplexMatrix signed_choi() const;
};

// Optimal 2-broadcast split: p1 = 2d/(d+1), p2 = (d-1)/(d+1) with the
// projector-built channel pair
//   J_N1 = (M + NMN + MN + NM) / (2(d+1)),
//   J_N2 = (I - (d(M+NMN) - (MN+NM))/(d^2-1)) / (d^2-2),
// M = Phi_{BB1} (x) I_{B2}, N = I_B (x) F_{B1B2}. Requires d >= 2 (the
// d^2-2 denominator changes sign below d = sqrt 2).
HptpDecomposition choi_optimal_2broadcast(std::size_t d);

// n*M1 - (n-1)*M2 split of the universal n-broadcast map:
//   J_M1 = (1/(n d^(n-1))) sum_j S_{B1Bj}(Phi_{BB1} (x) I_{B2..Bn}),
//   J_M2 = (1/d^(n-1)) Phi_{B1B2} (x) I_{B B3..Bn}.
// Both channels are CPTP, so the split witnesses cost 2n-1.
HptpDecomposition choi_universal_decomposition(
    std::size_t d, std::size_t n, std::size_t side_cap = kDefaultSideCap);

// rho_out = tr_B[(rho^T_B (x) I_outputs)(I_A (x) J)]. rho must contain a
// subsystem labeled "B" matching the Choi input dimension; every other
// subsystem is treated as a reference and carried through. Output layout is
// (reference subsystems in original order, B1..Bn).
std::pair<ComplexMatrix, SystemLayout> apply_choi(const ChoiOperator &choi,
                                                  const ComplexMatrix &rho,
                                                  const SystemLayout &rho_layout);

// Per-output deviation of the Choi marginals from Phi_d. deviations[j-1] is
// the max-entry difference |tr_{\BBj}(J) - Phi_d|; max-entry rather than a
// norm so a failing marginal pinpoints the drifting entry.
struct UniversalityReport {
  std::vector<double> deviations;
  bool pass;
};

UniversalityReport verify_universal(const ChoiOperator &choi, double tol);

// PSD within tol and tr_outputs(J) = scale * I_B within tol.
struct CptpReport {
  double min_eigenvalue;
  double max_tp_deviation;
  bool psd_pass;
  bool tp_pass;
  bool pass;
};

CptpReport verify_cptp(const ChoiOperator &choi, double scale, double tol);

} // namespace vbroadcast

#endif
