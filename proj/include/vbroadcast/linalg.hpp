#ifndef VBROADCAST_LINALG_HPP
#define VBROADCAST_LINALG_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "vbroadcast/layout.hpp"
#include "vbroadcast/matrix.hpp"

namespace vbroadcast {

// Hermiticity tolerances: constructors accept 1e-12 drift, eigensolver input
// 1e-10. Inputs are built from exact +-1/d rationals, so drift is roundoff.
inline constexpr double kHermTolConstruct = 1e-12;
inline constexpr double kHermTolEig = 1e-10;

//------------------------------------------------------------------------
// Tensor-product structure
//------------------------------------------------------------------------

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b);

// Traces out every subsystem not in `keep`; kept subsystems stay in their
// original order. tr(result) == tr(m).
ComplexMatrix partial_trace(const ComplexMatrix &m, const SystemLayout &layout,
                            const std::set<std::string> &keep);
SystemLayout reduced_layout(const SystemLayout &layout,
                            const std::set<std::string> &keep);

// Transposes the indices of the target subsystem only; involution.
ComplexMatrix partial_transpose(const ComplexMatrix &m,
                                const SystemLayout &layout,
                                const std::string &target);

// Relabels tensor factors: new_order[i] is the old position placed at slot i.
// Acting on operators this is conjugation by the permutation unitary.
ComplexMatrix permute_subsystems(const ComplexMatrix &m,
                                 const SystemLayout &layout,
                                 const std::vector<std::size_t> &new_order);

// Conjugation by the swap of two equal-dimension subsystems.
ComplexMatrix swap_conjugate(const ComplexMatrix &m, const SystemLayout &layout,
                             const std::string &a, const std::string &b);

// m * P and P * m where P is the swap permutation of subsystems a, b.
ComplexMatrix swap_right_mul(const ComplexMatrix &m, const SystemLayout &layout,
                             const std::string &a, const std::string &b);
ComplexMatrix swap_left_mul(const ComplexMatrix &m, const SystemLayout &layout,
                            const std::string &a, const std::string &b);

// op acts on the listed subsystems in the given factor order, tensored with
// identity on every other subsystem of the layout.
ComplexMatrix embed(const ComplexMatrix &op,
                    const std::vector<std::string> &op_labels,
                    const SystemLayout &layout);

//------------------------------------------------------------------------
// Structured operators
//------------------------------------------------------------------------

// F = sum_ij |ij><ji|, the d^2 x d^2 swap permutation. F^2 = I.
ComplexMatrix swap_operator(std::size_t d);

// Phi_d = sum_ij |ii><jj|, unnormalized maximally entangled operator,
// rank 1 with trace d.
ComplexMatrix max_entangled(std::size_t d);

//------------------------------------------------------------------------
// Hermitian eigenproblems
//------------------------------------------------------------------------

struct EigResult {
  std::vector<double> eigenvalues; // descending
  ComplexMatrix eigenvectors;      // columns, unitary; m = V diag(w) V^dagger
};

// Householder tridiagonalization + implicit-shift QL. Input must be Hermitian
// within 1e-10 (throws std::invalid_argument otherwise).
EigResult herm_eig(const ComplexMatrix &m);

// Eigenvalues only (descending); considerably cheaper than herm_eig.
std::vector<double> herm_eigvals(const ComplexMatrix &m);

double min_eigenvalue(const ComplexMatrix &m);

// true iff min eigenvalue >= -tol
bool is_psd(const ComplexMatrix &m, double tol);

//------------------------------------------------------------------------
// Orthonormal Hermitian operator basis
//------------------------------------------------------------------------
// Real orthonormal basis {E_k} of the n x n Hermitian matrices under
// <A,B> = tr(AB): the n diagonal units followed by (E_ij+E_ji)/sqrt2 and
// i(E_ij-E_ji)/sqrt2 for each pair i<j. Used to expand operator equalities
// into real scalar equations.

std::size_t herm_basis_dim(std::size_t n); // n^2

ComplexMatrix herm_basis_element(std::size_t n, std::size_t k);

// coefficient vector c with H = sum_k c_k E_k
std::vector<double> herm_encode(const ComplexMatrix &h);
ComplexMatrix herm_decode(const std::vector<double> &coeffs, std::size_t n);

// [[Re M, -Im M], [Im M, Re M]]: the 2n x 2n real symmetric embedding of a
// Hermitian matrix; its spectrum is the Hermitian spectrum with doubled
// multiplicity. Provided for cross-validation of the complex eigen path.
ComplexMatrix real_embedding(const ComplexMatrix &m);

//------------------------------------------------------------------------
// Random test states
//------------------------------------------------------------------------

// G G^dagger / tr(G G^dagger) for a complex Ginibre G; full-rank generic
// density matrix. Deterministic in the seed.
ComplexMatrix random_ginibre_density(std::size_t side, std::uint64_t seed);

ComplexMatrix random_hermitian(std::size_t side, std::uint64_t seed);

} // namespace vbroadcast

#endif
