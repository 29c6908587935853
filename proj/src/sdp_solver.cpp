#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "vbroadcast/sdp.hpp"

// Primal-dual path-following interior-point method over Hermitian PSD blocks
// with free variables kept directly in the Newton system.
//
//   min sum_b <C_b, X_b> + c_f . x_f
//   s.t. sum_b <A_ib, X_b> + (F x_f)_i = rhs_i,  X_b >= 0, x_f free
//
// Search direction: HKM linearization of X S = sigma mu I with explicit
// Hermitian symmetrization, Mehrotra predictor-corrector, and the dense
// Schur complement M_ij = sum_b Re tr(A_ib X_b A_jb S_b^-1) factorized by
// Cholesky. Scalar variables ride along as 1x1 blocks. A presolve pass
// removes linearly dependent equality rows (the grouped operator expansions
// overlap on the e (x) I subspace) so the Schur complement stays positive
// definite; dropped rows are checked for consistency against the kept ones.

namespace vbroadcast {

namespace {

//------------------------------------------------------------------------
// Dense helpers
//------------------------------------------------------------------------

// in-place lower Cholesky of a Hermitian positive definite matrix;
// returns false if a pivot degenerates
bool chol_complex(ComplexMatrix &a) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k)
      diag -= std::norm(a(j, k));
    if (!(diag > 0.0) || !std::isfinite(diag))
      return false;
    const double root = std::sqrt(diag);
    a(j, j) = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      complex_t sum = a(i, j);
      const complex_t *ri = a.row(i);
      const complex_t *rj = a.row(j);
      for (std::size_t k = 0; k < j; ++k)
        sum -= ri[k] * std::conj(rj[k]);
      a(i, j) = sum / root;
    }
    for (std::size_t i = 0; i < j; ++i)
      a(i, j) = 0.0;
  }
  return true;
}

// solve L Y = B (L lower triangular complex), B overwritten with Y
void forward_solve(const ComplexMatrix &l, ComplexMatrix &b) {
  const std::size_t n = l.rows(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    complex_t *bi = b.row(i);
    for (std::size_t k = 0; k < i; ++k) {
      const complex_t lik = l(i, k);
      if (lik == complex_t(0.0, 0.0))
        continue;
      const complex_t *bk = b.row(k);
      for (std::size_t j = 0; j < m; ++j)
        bi[j] -= lik * bk[j];
    }
    const complex_t inv = 1.0 / l(i, i);
    for (std::size_t j = 0; j < m; ++j)
      bi[j] *= inv;
  }
}

// solve L^dagger Y = B, B overwritten
void backward_solve(const ComplexMatrix &l, ComplexMatrix &b) {
  const std::size_t n = l.rows(), m = b.cols();
  for (std::size_t i = n; i-- > 0;) {
    complex_t *bi = b.row(i);
    for (std::size_t k = i + 1; k < n; ++k) {
      const complex_t lki = std::conj(l(k, i));
      if (lki == complex_t(0.0, 0.0))
        continue;
      const complex_t *bk = b.row(k);
      for (std::size_t j = 0; j < m; ++j)
        bi[j] -= lki * bk[j];
    }
    const complex_t inv = 1.0 / std::conj(l(i, i));
    for (std::size_t j = 0; j < m; ++j)
      bi[j] *= inv;
  }
}

ComplexMatrix invert_hpd(const ComplexMatrix &m, bool &ok) {
  ComplexMatrix l = m;
  if (!chol_complex(l)) {
    ok = false;
    return ComplexMatrix();
  }
  ComplexMatrix inv = ComplexMatrix::identity(m.rows());
  forward_solve(l, inv);
  backward_solve(l, inv);
  inv.hermitize();
  ok = true;
  return inv;
}

// real symmetric Cholesky on a flat lower-triangular view
bool chol_real(std::vector<double> &a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    const double *rj = a.data() + j * n;
    for (std::size_t k = 0; k < j; ++k)
      diag -= rj[k] * rj[k];
    if (!(diag > 0.0) || !std::isfinite(diag))
      return false;
    const double root = std::sqrt(diag);
    a[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = a[i * n + j];
      const double *ri = a.data() + i * n;
      for (std::size_t k = 0; k < j; ++k)
        sum -= ri[k] * rj[k];
      a[i * n + j] = sum / root;
    }
  }
  return true;
}

void chol_real_solve(const std::vector<double> &l, std::size_t n,
                     std::vector<double> &x) {
  for (std::size_t i = 0; i < n; ++i) {
    double sum = x[i];
    const double *ri = l.data() + i * n;
    for (std::size_t k = 0; k < i; ++k)
      sum -= ri[k] * x[k];
    x[i] = sum / ri[i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double sum = x[i];
    for (std::size_t k = i + 1; k < n; ++k)
      sum -= l[k * n + i] * x[k];
    x[i] = sum / l[i * n + i];
  }
}

// rank-revealing pivoted Cholesky of a small PSD system; solutions have
// zero component along the detected null space (consistent right-hand sides
// only, which holds for the free-variable lineality directions)
struct PivotedChol {
  std::vector<double> l; // n x n, factored in pivoted order
  std::vector<std::size_t> perm;
  std::size_t n = 0;
  std::size_t rank = 0;

  void factor(std::vector<double> a, std::size_t dim) {
    n = dim;
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), 0);
    double max_diag = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      max_diag = std::max(max_diag, a[i * n + i]);
    const double tol = max_diag * 1e-13;
    rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t best = k;
      for (std::size_t i = k + 1; i < n; ++i)
        if (a[i * n + i] > a[best * n + best])
          best = i;
      if (a[best * n + best] <= tol)
        break;
      if (best != k) {
        std::swap(perm[k], perm[best]);
        for (std::size_t j = 0; j < n; ++j)
          std::swap(a[k * n + j], a[best * n + j]);
        for (std::size_t i = 0; i < n; ++i)
          std::swap(a[i * n + k], a[i * n + best]);
      }
      const double pivot = std::sqrt(a[k * n + k]);
      a[k * n + k] = pivot;
      for (std::size_t i = k + 1; i < n; ++i)
        a[i * n + k] /= pivot;
      for (std::size_t i = k + 1; i < n; ++i) {
        const double aik = a[i * n + k];
        if (aik == 0.0)
          continue;
        for (std::size_t j = k + 1; j <= i; ++j) {
          a[i * n + j] -= aik * a[j * n + k];
          a[j * n + i] = a[i * n + j];
        }
      }
      ++rank;
    }
    l = std::move(a);
  }

  std::vector<double> solve(const std::vector<double> &rhs) const {
    std::vector<double> t(rank);
    for (std::size_t i = 0; i < rank; ++i) {
      double sum = rhs[perm[i]];
      for (std::size_t k = 0; k < i; ++k)
        sum -= l[i * n + k] * t[k];
      t[i] = sum / l[i * n + i];
    }
    for (std::size_t i = rank; i-- > 0;) {
      double sum = t[i];
      for (std::size_t k = i + 1; k < rank; ++k)
        sum -= l[k * n + i] * t[k];
      t[i] = sum / l[i * n + i];
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < rank; ++i)
      x[perm[i]] = t[i];
    return x;
  }
};

//------------------------------------------------------------------------
// Compiled problem
//------------------------------------------------------------------------

struct CompiledBlock {
  std::string name;
  std::size_t side;
  bool from_scalar; // 1x1 block standing in for a nonnegative scalar
  std::size_t source_index;
  double init_scale;
};

struct RowBlockTerm {
  SparseHermitian a; // merged coefficient for one (row, block)
};

struct Compiled {
  std::vector<CompiledBlock> blocks;
  // rows x blocks coefficient table, empty optional when zero
  std::vector<std::vector<std::optional<RowBlockTerm>>> a;
  std::vector<double> rhs;
  std::vector<ComplexMatrix> cost; // C_b per block
  // free coordinates: (block index in problem, basis index) per coordinate
  std::size_t n_free = 0;
  std::vector<std::pair<std::size_t, std::size_t>> free_coords;
  std::vector<std::vector<double>> f_rows; // m x n_free
  std::vector<double> cost_free;
  double obj_sign = 1.0; // -1 when the problem maximizes
};

SparseHermitian scale_sparse(const SparseHermitian &a, double s) {
  SparseHermitian out = a;
  for (auto &[i, j, v] : out.entries)
    v *= s;
  return out;
}

void add_sparse_into(ComplexMatrix &dst, const SparseHermitian &a, double scale) {
  for (const auto &[i, j, v] : a.entries)
    dst(i, j) += scale * v;
}

double sparse_inner(const SparseHermitian &a, const ComplexMatrix &x) {
  complex_t sum = 0.0;
  for (const auto &[i, j, v] : a.entries)
    sum += v * x(j, i);
  return sum.real();
}

std::vector<double> sparse_herm_coeffs(const SparseHermitian &a) {
  return herm_encode(a.to_dense());
}

Compiled compile(const SdpProblem &p) {
  Compiled c;
  c.obj_sign = p.maximize ? -1.0 : 1.0;

  std::vector<std::size_t> block_slot(p.blocks.size(),
                                      static_cast<std::size_t>(-1));
  std::vector<std::size_t> scalar_slot(p.scalars.size(),
                                       static_cast<std::size_t>(-1));
  std::vector<std::size_t> free_base(p.blocks.size(),
                                     static_cast<std::size_t>(-1));

  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    if (p.blocks[i].psd) {
      block_slot[i] = c.blocks.size();
      double init = 1.0;
      if (i < p.block_init_trace.size() && p.block_init_trace[i] > 0.0)
        init = std::max(0.1, p.block_init_trace[i] /
                                 static_cast<double>(p.blocks[i].side));
      c.blocks.push_back({p.blocks[i].name, p.blocks[i].side, false, i, init});
    } else {
      free_base[i] = c.n_free;
      const std::size_t dim = herm_basis_dim(p.blocks[i].side);
      for (std::size_t k = 0; k < dim; ++k)
        c.free_coords.emplace_back(i, k);
      c.n_free += dim;
    }
  }
  for (std::size_t i = 0; i < p.scalars.size(); ++i) {
    if (!p.scalars[i].nonneg)
      throw std::invalid_argument("solve: free scalars are not supported");
    scalar_slot[i] = c.blocks.size();
    c.blocks.push_back({p.scalars[i].name, 1, true, i, 1.0});
  }

  const std::size_t m = p.rows.size();
  c.a.assign(m, std::vector<std::optional<RowBlockTerm>>(c.blocks.size()));
  c.f_rows.assign(m, std::vector<double>(c.n_free, 0.0));
  c.rhs.resize(m);

  for (std::size_t r = 0; r < m; ++r) {
    c.rhs[r] = p.rows[r].rhs;
    for (const auto &term : p.rows[r].terms) {
      if (p.blocks[term.block].psd) {
        const std::size_t slot = block_slot[term.block];
        auto &cell = c.a[r][slot];
        if (!cell) {
          cell = RowBlockTerm{scale_sparse(*term.coeff, term.scale)};
        } else {
          // merge duplicated terms on the same block
          ComplexMatrix dense = cell->a.to_dense();
          add_sparse_into(dense, *term.coeff, term.scale);
          cell->a = SparseHermitian::from_dense(dense, 1e-300);
        }
      } else {
        const auto coeffs = sparse_herm_coeffs(*term.coeff);
        const std::size_t base = free_base[term.block];
        for (std::size_t k = 0; k < coeffs.size(); ++k)
          c.f_rows[r][base + k] += term.scale * coeffs[k];
      }
    }
    for (const auto &term : p.rows[r].scalar_terms) {
      const std::size_t slot = scalar_slot[term.scalar];
      auto &cell = c.a[r][slot];
      SparseHermitian s;
      s.side = 1;
      s.entries.emplace_back(0, 0, complex_t(term.coeff, 0.0));
      s.finalize();
      if (!cell) {
        cell = RowBlockTerm{std::move(s)};
      } else {
        std::get<2>(cell->a.entries[0]) += term.coeff;
      }
    }
  }

  c.cost.resize(c.blocks.size());
  for (std::size_t b = 0; b < c.blocks.size(); ++b)
    c.cost[b] = ComplexMatrix::zero(c.blocks[b].side);
  c.cost_free.assign(c.n_free, 0.0);
  for (const auto &term : p.objective_terms) {
    if (p.blocks[term.block].psd) {
      add_sparse_into(c.cost[block_slot[term.block]], *term.coeff,
                      c.obj_sign * term.scale);
    } else {
      const auto coeffs = sparse_herm_coeffs(*term.coeff);
      const std::size_t base = free_base[term.block];
      for (std::size_t k = 0; k < coeffs.size(); ++k)
        c.cost_free[base + k] += c.obj_sign * term.scale * coeffs[k];
    }
  }
  for (const auto &term : p.objective_scalars)
    c.cost[scalar_slot[term.scalar]](0, 0) += c.obj_sign * term.coeff;

  return c;
}

//------------------------------------------------------------------------
// Presolve: drop linearly dependent rows via the pivoted Gram Cholesky
//------------------------------------------------------------------------

struct Presolve {
  std::vector<std::size_t> kept; // original row indices, ascending
  bool inconsistent = false;
};

// tr(A_i A_j) via binary search over the sorted entry list of the larger row
double sparse_sparse_inner(const SparseHermitian &a, const SparseHermitian &b) {
  const SparseHermitian &probe = (a.entries.size() <= b.entries.size()) ? a : b;
  const SparseHermitian &table = (a.entries.size() <= b.entries.size()) ? b : a;
  complex_t sum = 0.0;
  for (const auto &[r, q, v] : probe.entries) {
    // entries are sorted by (row, col); look up table[(q, r)]
    auto it = std::lower_bound(
        table.entries.begin(), table.entries.end(), std::make_pair(q, r),
        [](const auto &entry, const std::pair<std::size_t, std::size_t> &key) {
          return std::make_pair(std::get<0>(entry), std::get<1>(entry)) < key;
        });
    if (it != table.entries.end() && std::get<0>(*it) == q &&
        std::get<1>(*it) == r)
      sum += v * std::get<2>(*it);
  }
  return sum.real();
}

double row_inner(const Compiled &c, std::size_t i, std::size_t j) {
  double sum = 0.0;
  for (std::size_t b = 0; b < c.blocks.size(); ++b) {
    if (!c.a[i][b] || !c.a[j][b])
      continue;
    sum += sparse_sparse_inner(c.a[i][b]->a, c.a[j][b]->a);
  }
  if (c.n_free > 0)
    sum += std::inner_product(c.f_rows[i].begin(), c.f_rows[i].end(),
                              c.f_rows[j].begin(), 0.0);
  return sum;
}

Presolve presolve(const Compiled &c) {
  const std::size_t m = c.rhs.size();
  std::vector<double> gram(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const double v = row_inner(c, i, j);
      gram[i * m + j] = v;
      gram[j * m + i] = v;
    }

  double max_diag = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    max_diag = std::max(max_diag, gram[i * m + i]);
  const double tol = std::max(max_diag, 1.0) * 1e-12;

  // right-looking Cholesky with diagonal pivoting; rows whose remaining
  // pivot vanishes are linear combinations of the pivoted ones
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t rank = 0;
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t best = k;
    for (std::size_t i = k + 1; i < m; ++i)
      if (gram[i * m + i] > gram[best * m + best])
        best = i;
    if (gram[best * m + best] <= tol)
      break;
    if (best != k) {
      std::swap(perm[k], perm[best]);
      for (std::size_t j = 0; j < m; ++j)
        std::swap(gram[k * m + j], gram[best * m + j]);
      for (std::size_t i = 0; i < m; ++i)
        std::swap(gram[i * m + k], gram[i * m + best]);
    }
    const double pivot = std::sqrt(gram[k * m + k]);
    gram[k * m + k] = pivot;
    for (std::size_t i = k + 1; i < m; ++i)
      gram[i * m + k] /= pivot;
    // keep the trailing block fully symmetric so pivot swaps stay valid
    for (std::size_t i = k + 1; i < m; ++i) {
      const double gik = gram[i * m + k];
      if (gik == 0.0)
        continue;
      double *gi = gram.data() + i * m;
      for (std::size_t j = k + 1; j <= i; ++j) {
        gi[j] -= gik * gram[j * m + k];
        gram[j * m + i] = gi[j];
      }
    }
    ++rank;
  }

  Presolve out;
  out.kept.reserve(rank);
  for (std::size_t k = 0; k < rank; ++k)
    out.kept.push_back(perm[k]);
  std::sort(out.kept.begin(), out.kept.end());

  // consistency of every dropped row: with P G P^T = [L1; L2][L1; L2]^T the
  // combination reproducing dropped row t solves L1^T mu = L2[t,:]^T and its
  // rhs must match mu . rhs_kept
  for (std::size_t t = rank; t < m && !out.inconsistent; ++t) {
    std::vector<double> mu(rank, 0.0);
    for (std::size_t k = rank; k-- > 0;) {
      double v = gram[t * m + k];
      for (std::size_t q = k + 1; q < rank; ++q)
        v -= gram[q * m + k] * mu[q];
      mu[k] = v / gram[k * m + k];
    }
    double combo_rhs = 0.0;
    for (std::size_t k = 0; k < rank; ++k)
      combo_rhs += mu[k] * c.rhs[perm[k]];
    const double scale = std::max(1.0, std::abs(c.rhs[perm[t]]));
    if (std::abs(combo_rhs - c.rhs[perm[t]]) > 1e-7 * scale)
      out.inconsistent = true;
  }
  return out;
}

//------------------------------------------------------------------------
// Iterate state
//------------------------------------------------------------------------

struct Iterate {
  std::vector<ComplexMatrix> x, s;
  std::vector<double> y;  // over kept rows
  std::vector<double> xf; // free coordinates
};

double block_inner(const ComplexMatrix &a, const ComplexMatrix &b) {
  // Re tr(a b) for Hermitian a, b
  complex_t sum = 0.0;
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const complex_t *ra = a.row(i);
    for (std::size_t j = 0; j < n; ++j)
      sum += ra[j] * b(j, i);
  }
  return sum.real();
}

// largest alpha in (0, cap] with X + alpha D >= 0
double max_step(const ComplexMatrix &x, const ComplexMatrix &d, double cap) {
  if (x.rows() == 1) {
    const double xv = x(0, 0).real(), dv = d(0, 0).real();
    if (dv >= 0.0)
      return cap;
    return std::min(cap, -xv / dv);
  }
  ComplexMatrix l = x;
  if (!chol_complex(l))
    throw SolverBreakdown("solve: iterate left the cone");
  ComplexMatrix t = d;
  forward_solve(l, t);                // t = L^-1 D
  ComplexMatrix td = t.dagger();      // D L^-dagger, conjugated
  forward_solve(l, td);               // L^-1 D L^-dagger
  td.hermitize();
  const double lam = min_eigenvalue(td);
  if (lam >= 0.0)
    return cap;
  return std::min(cap, -1.0 / lam);
}

} // namespace

//------------------------------------------------------------------------
// solve
//------------------------------------------------------------------------

SdpSolution solve(const SdpProblem &p, const SolveOptions &opts) {
  Compiled c = compile(p);
  const std::size_t nb = c.blocks.size();
  const std::size_t m_all = c.rhs.size();
  if (m_all == 0)
    throw std::invalid_argument("solve: problem has no constraints");

  Presolve pre = presolve(c);
  SdpSolution sol;
  if (pre.inconsistent) {
    sol.status = SolveStatus::infeasible_detected;
    return sol;
  }
  const std::vector<std::size_t> &rows = pre.kept;
  const std::size_t m = rows.size();
  if (m == 0)
    throw std::invalid_argument("solve: constraint system has rank zero");

  const std::size_t nf = c.n_free;

  // total cone dimension for the duality measure
  double nu = 0.0;
  for (const auto &b : c.blocks)
    nu += static_cast<double>(b.side);

  Iterate it;
  it.x.resize(nb);
  it.s.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    it.x[b] = ComplexMatrix::identity(c.blocks[b].side);
    it.x[b] *= c.blocks[b].init_scale;
    it.s[b] = ComplexMatrix::identity(c.blocks[b].side);
    it.s[b] *= std::max(1.0, c.cost[b].max_abs());
  }
  it.y.assign(m, 0.0);
  it.xf.assign(nf, 0.0);

  double b_norm = 1.0;
  for (std::size_t r : rows)
    b_norm = std::max(b_norm, std::abs(c.rhs[r]));
  double c_norm = 1.0;
  for (const auto &mat : c.cost)
    c_norm = std::max(c_norm, mat.max_abs());

  auto operator_A = [&](const std::vector<ComplexMatrix> &x,
                        const std::vector<double> &xf) {
    std::vector<double> out(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t r = rows[k];
      double v = 0.0;
      for (std::size_t b = 0; b < nb; ++b)
        if (c.a[r][b])
          v += sparse_inner(c.a[r][b]->a, x[b]);
      if (nf > 0)
        v += std::inner_product(c.f_rows[r].begin(), c.f_rows[r].end(),
                                xf.begin(), 0.0);
      out[k] = v;
    }
    return out;
  };

  auto operator_At = [&](const std::vector<double> &y) {
    std::vector<ComplexMatrix> out(nb);
    for (std::size_t b = 0; b < nb; ++b)
      out[b] = ComplexMatrix::zero(c.blocks[b].side);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t r = rows[k];
      if (y[k] == 0.0)
        continue;
      for (std::size_t b = 0; b < nb; ++b)
        if (c.a[r][b])
          add_sparse_into(out[b], c.a[r][b]->a, y[k]);
    }
    return out;
  };

  std::vector<double> schur(m * m);
  std::vector<ComplexMatrix> sinv(nb);
  SolveStatus status = SolveStatus::max_iter;
  std::size_t iterations = 0;

  for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
    iterations = iter;

    // residuals
    std::vector<double> ax = operator_A(it.x, it.xf);
    std::vector<double> rp(m);
    double pinf = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      rp[k] = c.rhs[rows[k]] - ax[k];
      pinf = std::max(pinf, std::abs(rp[k]));
    }
    pinf /= b_norm;

    std::vector<ComplexMatrix> aty = operator_At(it.y);
    std::vector<ComplexMatrix> rd(nb);
    double dinf = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      rd[b] = c.cost[b];
      rd[b] -= aty[b];
      rd[b] -= it.s[b];
      dinf = std::max(dinf, rd[b].max_abs());
    }
    std::vector<double> rf(nf, 0.0);
    for (std::size_t q = 0; q < nf; ++q) {
      double v = c.cost_free[q];
      for (std::size_t k = 0; k < m; ++k)
        v -= c.f_rows[rows[k]][q] * it.y[k];
      rf[q] = v;
      dinf = std::max(dinf, std::abs(v));
    }
    dinf /= c_norm;

    double gap_xs = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
      gap_xs += block_inner(it.x[b], it.s[b]);
    const double mu = gap_xs / nu;

    double pobj = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
      pobj += block_inner(c.cost[b], it.x[b]);
    pobj += std::inner_product(c.cost_free.begin(), c.cost_free.end(),
                               it.xf.begin(), 0.0);
    double dobj = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      dobj += c.rhs[rows[k]] * it.y[k];

    const double relgap =
        std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (pinf <= opts.feas_tol && dinf <= opts.feas_tol && relgap <= opts.gap_tol) {
      status = SolveStatus::optimal;
      break;
    }

    // scaling data
    for (std::size_t b = 0; b < nb; ++b) {
      bool ok = true;
      sinv[b] = invert_hpd(it.s[b], ok);
      if (!ok)
        throw SolverBreakdown("solve: dual block left the cone");
    }

    // Schur complement M_kj = sum_b Re tr(A_kb X_b A_jb S_b^-1), assembled
    // per block from panels P_k = S^-1 A_k restricted to nonzero columns
    std::fill(schur.begin(), schur.end(), 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<std::size_t> touching;
      for (std::size_t k = 0; k < m; ++k)
        if (c.a[rows[k]][b])
          touching.push_back(k);
      if (touching.empty())
        continue;
      const std::size_t side = c.blocks[b].side;

      // panels
      std::vector<std::vector<complex_t>> panels(touching.size());
      for (std::size_t t = 0; t < touching.size(); ++t) {
        const auto &a = c.a[rows[touching[t]]][b]->a;
        auto &panel = panels[t];
        panel.assign(side * a.nonzero_cols.size(), complex_t(0.0, 0.0));
        for (const auto &[ri, ci, v] : a.entries) {
          const std::size_t col_pos =
              std::lower_bound(a.nonzero_cols.begin(), a.nonzero_cols.end(), ci) -
              a.nonzero_cols.begin();
          // P[:, col] += v * S^-1[:, ri]
          for (std::size_t row_i = 0; row_i < side; ++row_i)
            panel[row_i * a.nonzero_cols.size() + col_pos] +=
                v * sinv[b](row_i, ri);
        }
      }

      for (std::size_t ti = 0; ti < touching.size(); ++ti) {
        const std::size_t k = touching[ti];
        const auto &ai = c.a[rows[k]][b]->a;
        const auto &pi = panels[ti];
        const std::size_t ci_count = ai.nonzero_cols.size();
        for (std::size_t tj = ti; tj < touching.size(); ++tj) {
          const std::size_t j = touching[tj];
          const auto &aj = c.a[rows[j]][b]->a;
          // Re tr(P_i X A_j) = Re sum over entries (r,q) of A_j of
          // A_j[r,q] (P_i X)[q,r]
          complex_t acc = 0.0;
          for (const auto &[r, q, v] : aj.entries) {
            complex_t pix = 0.0;
            for (std::size_t lc = 0; lc < ci_count; ++lc) {
              const std::size_t l = ai.nonzero_cols[lc];
              pix += pi[q * ci_count + lc] * it.x[b](l, r);
            }
            acc += v * pix;
          }
          schur[k * m + j] += acc.real();
          if (tj != ti)
            schur[j * m + k] += acc.real();
        }
      }
    }

    std::vector<double> schur_l = schur;
    if (!chol_real(schur_l, m)) {
      // one shot of diagonal regularization before giving up
      double max_d = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        max_d = std::max(max_d, schur[k * m + k]);
      schur_l = schur;
      const double bump = std::max(max_d, 1.0) * 1e-13;
      for (std::size_t k = 0; k < m; ++k)
        schur_l[k * m + k] += bump;
      if (!chol_real(schur_l, m))
        throw SolverBreakdown("solve: singular Schur complement");
    }

    // free-variable reduction: with U = L^-1 F, solve
    // (U^T U) dxf = U^T L^-1 h - rf, then M dy = h - F dxf. The reduction is
    // rank revealing: the dual X_j variables share an e (x) I lineality
    // space, so F is genuinely column deficient and the step keeps a zero
    // component along it.
    std::vector<std::vector<double>> u;
    PivotedChol uu_chol;
    if (nf > 0) {
      u.assign(nf, std::vector<double>(m, 0.0));
      for (std::size_t q = 0; q < nf; ++q) {
        for (std::size_t k = 0; k < m; ++k)
          u[q][k] = c.f_rows[rows[k]][q];
        // forward solve with schur_l
        for (std::size_t i = 0; i < m; ++i) {
          double sum = u[q][i];
          const double *ri = schur_l.data() + i * m;
          for (std::size_t k = 0; k < i; ++k)
            sum -= ri[k] * u[q][k];
          u[q][i] = sum / ri[i];
        }
      }
      std::vector<double> uu(nf * nf, 0.0);
      for (std::size_t a1 = 0; a1 < nf; ++a1)
        for (std::size_t a2 = 0; a2 <= a1; ++a2) {
          const double v = std::inner_product(u[a1].begin(), u[a1].end(),
                                              u[a2].begin(), 0.0);
          uu[a1 * nf + a2] = v;
          uu[a2 * nf + a1] = v;
        }
      uu_chol.factor(std::move(uu), nf);
      if (uu_chol.rank == 0)
        throw SolverBreakdown("solve: free-variable block is rank zero");
    }

    auto solve_direction = [&](double sigma_mu,
                               const std::vector<ComplexMatrix> *e_corr,
                               std::vector<ComplexMatrix> &dx,
                               std::vector<ComplexMatrix> &ds,
                               std::vector<double> &dy,
                               std::vector<double> &dxf) {
      // h_k = rp_k - sum_b <A_kb, G_b>,
      // G_b = Sym(sigma mu S^-1 - X - (E + X R_d) S^-1)
      std::vector<ComplexMatrix> g(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        ComplexMatrix inner = rd[b]; // X R_d
        inner = it.x[b] * inner;
        if (e_corr)
          inner += (*e_corr)[b];
        ComplexMatrix t = inner * sinv[b];
        ComplexMatrix sym = t;
        sym += t.dagger();
        sym *= 0.5;
        g[b] = sinv[b];
        g[b] *= sigma_mu;
        g[b] -= it.x[b];
        g[b] -= sym;
      }
      std::vector<double> h(m);
      for (std::size_t k = 0; k < m; ++k) {
        double v = rp[k];
        for (std::size_t b = 0; b < nb; ++b)
          if (c.a[rows[k]][b])
            v -= sparse_inner(c.a[rows[k]][b]->a, g[b]);
        h[k] = v;
      }

      dy.assign(m, 0.0);
      dxf.assign(nf, 0.0);
      if (nf == 0) {
        dy = h;
        chol_real_solve(schur_l, m, dy);
      } else {
        // t = L^-1 h
        std::vector<double> t = h;
        for (std::size_t i = 0; i < m; ++i) {
          double sum = t[i];
          const double *ri = schur_l.data() + i * m;
          for (std::size_t k = 0; k < i; ++k)
            sum -= ri[k] * t[k];
          t[i] = sum / ri[i];
        }
        std::vector<double> rhs_f(nf);
        for (std::size_t q = 0; q < nf; ++q)
          rhs_f[q] =
              std::inner_product(u[q].begin(), u[q].end(), t.begin(), 0.0) -
              rf[q];
        dxf = uu_chol.solve(rhs_f);
        // dy = M^-1 (h - F dxf)
        for (std::size_t k = 0; k < m; ++k) {
          double v = h[k];
          for (std::size_t q = 0; q < nf; ++q)
            v -= c.f_rows[rows[k]][q] * dxf[q];
          dy[k] = v;
        }
        chol_real_solve(schur_l, m, dy);
      }

      ds.resize(nb);
      dx.resize(nb);
      std::vector<ComplexMatrix> atdy = operator_At(dy);
      for (std::size_t b = 0; b < nb; ++b) {
        ds[b] = rd[b];
        ds[b] -= atdy[b];
        // dX = Sym(sigma mu S^-1 - X - (E + X dS) S^-1)
        ComplexMatrix inner = it.x[b] * ds[b];
        if (e_corr)
          inner += (*e_corr)[b];
        ComplexMatrix t = inner * sinv[b];
        ComplexMatrix sym = t;
        sym += t.dagger();
        sym *= 0.5;
        dx[b] = sinv[b];
        dx[b] *= sigma_mu;
        dx[b] -= it.x[b];
        dx[b] -= sym;
        dx[b].hermitize();
        ds[b].hermitize();
      }
    };

    // predictor
    std::vector<ComplexMatrix> dxa, dsa;
    std::vector<double> dya, dxfa;
    solve_direction(0.0, nullptr, dxa, dsa, dya, dxfa);

    double alpha_p = 1.0, alpha_d = 1.0;
    for (std::size_t b = 0; b < nb; ++b) {
      alpha_p = std::min(alpha_p, max_step(it.x[b], dxa[b], 1.0));
      alpha_d = std::min(alpha_d, max_step(it.s[b], dsa[b], 1.0));
    }
    double gap_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      ComplexMatrix xa = it.x[b];
      ComplexMatrix tmp = dxa[b];
      tmp *= alpha_p;
      xa += tmp;
      ComplexMatrix sa = it.s[b];
      tmp = dsa[b];
      tmp *= alpha_d;
      sa += tmp;
      gap_aff += block_inner(xa, sa);
    }
    const double mu_aff = gap_aff / nu;
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
    sigma = std::clamp(sigma, 1e-10, 1.0);

    // corrector
    std::vector<ComplexMatrix> ecorr(nb);
    for (std::size_t b = 0; b < nb; ++b)
      ecorr[b] = dxa[b] * dsa[b];
    std::vector<ComplexMatrix> dx, ds;
    std::vector<double> dy, dxf;
    solve_direction(sigma * mu, &ecorr, dx, ds, dy, dxf);

    const double tau = 0.98;
    double step_p = 1.0, step_d = 1.0;
    for (std::size_t b = 0; b < nb; ++b) {
      step_p = std::min(step_p, tau * max_step(it.x[b], dx[b], 1.0 / tau));
      step_d = std::min(step_d, tau * max_step(it.s[b], ds[b], 1.0 / tau));
    }
    step_p = std::min(step_p, 1.0);
    step_d = std::min(step_d, 1.0);

    for (std::size_t b = 0; b < nb; ++b) {
      ComplexMatrix tmp = dx[b];
      tmp *= step_p;
      it.x[b] += tmp;
      it.x[b].hermitize();
      tmp = ds[b];
      tmp *= step_d;
      it.s[b] += tmp;
      it.s[b].hermitize();
    }
    for (std::size_t k = 0; k < m; ++k)
      it.y[k] += step_d * dy[k];
    for (std::size_t q = 0; q < nf; ++q)
      it.xf[q] += step_p * dxf[q];
  }

  // report in the problem's own objective sense
  double pobj = 0.0;
  for (std::size_t b = 0; b < nb; ++b)
    pobj += block_inner(c.cost[b], it.x[b]);
  pobj += std::inner_product(c.cost_free.begin(), c.cost_free.end(),
                             it.xf.begin(), 0.0);
  double dobj = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    dobj += c.rhs[rows[k]] * it.y[k];

  sol.primal_objective = c.obj_sign * pobj;
  sol.dual_objective = c.obj_sign * dobj;
  sol.gap = sol.primal_objective - sol.dual_objective;
  sol.iterations = iterations;
  sol.status = status;

  {
    std::vector<double> ax = operator_A(it.x, it.xf);
    double pinf = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      pinf = std::max(pinf, std::abs(c.rhs[rows[k]] - ax[k]));
    sol.primal_residual = pinf / b_norm;
    std::vector<ComplexMatrix> aty = operator_At(it.y);
    double dinf = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      ComplexMatrix r = c.cost[b];
      r -= aty[b];
      r -= it.s[b];
      dinf = std::max(dinf, r.max_abs());
    }
    sol.dual_residual = dinf / c_norm;
  }

  for (std::size_t b = 0; b < nb; ++b) {
    if (c.blocks[b].from_scalar)
      sol.scalar_values[c.blocks[b].name] = it.x[b](0, 0).real();
    else
      sol.block_values[c.blocks[b].name] = it.x[b];
  }
  // free blocks from their coordinates
  {
    std::size_t prev_block = static_cast<std::size_t>(-1);
    std::vector<double> coeffs;
    for (std::size_t q = 0; q <= c.free_coords.size(); ++q) {
      const bool flush =
          q == c.free_coords.size() || c.free_coords[q].first != prev_block;
      if (flush && prev_block != static_cast<std::size_t>(-1)) {
        sol.block_values[p.blocks[prev_block].name] =
            herm_decode(coeffs, p.blocks[prev_block].side);
        coeffs.clear();
      }
      if (q == c.free_coords.size())
        break;
      prev_block = c.free_coords[q].first;
      coeffs.push_back(it.xf[q]);
    }
  }

  sol.dual_multipliers.assign(m_all, 0.0);
  for (std::size_t k = 0; k < m; ++k)
    sol.dual_multipliers[rows[k]] = c.obj_sign * it.y[k];

  return sol;
}

} // namespace vbroadcast
