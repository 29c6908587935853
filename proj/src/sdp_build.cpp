#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "vbroadcast/sdp.hpp"

namespace vbroadcast {

namespace {

std::string output_label(std::size_t j) { return "B" + std::to_string(j); }

void check_side_cap(std::size_t d, std::size_t n, std::size_t side_cap,
                    const char *what) {
  double side = 1.0;
  for (std::size_t i = 0; i < n + 1; ++i) {
    side *= static_cast<double>(d);
    if (side > static_cast<double>(side_cap))
      throw std::invalid_argument(std::string(what) +
                                  ": d^(n+1) exceeds the dense size cap");
  }
}

constexpr double kInvSqrt2 = 0.7071067811865476;

// entries of the k-th orthonormal Hermitian basis element of side n, without
// materializing the matrix (the constraint expansions at side d^(n+1) would
// otherwise dominate the build)
SparseHermitian herm_basis_sparse(std::size_t n, std::size_t k) {
  SparseHermitian out;
  out.side = n;
  if (k < n) {
    out.entries.emplace_back(k, k, complex_t(1.0, 0.0));
  } else {
    std::size_t t = k - n;
    std::size_t p = t / 2;
    std::size_t i = 0;
    while (p >= n - i - 1) {
      p -= n - i - 1;
      ++i;
    }
    const std::size_t j = i + 1 + p;
    if (t % 2 == 0) {
      out.entries.emplace_back(i, j, complex_t(kInvSqrt2, 0.0));
      out.entries.emplace_back(j, i, complex_t(kInvSqrt2, 0.0));
    } else {
      out.entries.emplace_back(i, j, complex_t(0.0, kInvSqrt2));
      out.entries.emplace_back(j, i, complex_t(0.0, -kInvSqrt2));
    }
  }
  out.finalize();
  return out;
}

// partial trace of a sparse operator onto the kept positions
SparseHermitian sparse_partial_trace(const SparseHermitian &a,
                                     const SystemLayout &layout,
                                     const std::vector<std::size_t> &keep) {
  std::size_t dim_kept = 1;
  for (std::size_t p : keep)
    dim_kept *= layout.at(p).dim;
  SparseHermitian out;
  out.side = dim_kept;

  std::vector<bool> kept_mask(layout.size(), false);
  for (std::size_t p : keep)
    kept_mask[p] = true;

  auto kept_flat = [&](const std::vector<std::size_t> &digits) {
    std::size_t flat = 0;
    for (std::size_t p : keep)
      flat = flat * layout.at(p).dim + digits[p];
    return flat;
  };

  std::map<std::pair<std::size_t, std::size_t>, complex_t> acc;
  for (const auto &[r, c, v] : a.entries) {
    const auto rd = layout.digits(r);
    const auto cd = layout.digits(c);
    bool match = true;
    for (std::size_t p = 0; p < layout.size(); ++p)
      if (!kept_mask[p] && rd[p] != cd[p]) {
        match = false;
        break;
      }
    if (match)
      acc[{kept_flat(rd), kept_flat(cd)}] += v;
  }
  for (const auto &[key, v] : acc)
    if (v != complex_t(0.0, 0.0))
      out.entries.emplace_back(key.first, key.second, v);
  out.finalize();
  return out;
}

// op on the listed positions tensored with identity elsewhere
SparseHermitian sparse_embed(const SparseHermitian &op,
                             const std::vector<std::size_t> &positions,
                             const SystemLayout &layout) {
  std::vector<std::size_t> stride(layout.size(), 1);
  for (std::size_t i = layout.size(); i-- > 1;)
    stride[i - 1] = stride[i] * layout.at(i).dim;

  const SystemLayout op_layout = layout.select(positions);

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (std::find(positions.begin(), positions.end(), i) == positions.end())
      rest.push_back(i);
  std::size_t rest_dim = 1;
  for (std::size_t p : rest)
    rest_dim *= layout.at(p).dim;

  auto offset_of = [&](const std::vector<std::size_t> &pos, std::size_t flat,
                       const SystemLayout &sub) {
    const auto digits = sub.digits(flat);
    std::size_t off = 0;
    for (std::size_t k = 0; k < pos.size(); ++k)
      off += digits[k] * stride[pos[k]];
    return off;
  };
  const SystemLayout rest_layout = layout.select(rest);

  SparseHermitian out;
  out.side = layout.total_dim();
  for (const auto &[r, c, v] : op.entries) {
    const std::size_t ro = offset_of(positions, r, op_layout);
    const std::size_t co = offset_of(positions, c, op_layout);
    for (std::size_t t = 0; t < rest_dim; ++t) {
      const std::size_t to = offset_of(rest, t, rest_layout);
      out.entries.emplace_back(ro + to, co + to, v);
    }
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const auto &x, const auto &y) {
              return std::make_pair(std::get<0>(x), std::get<1>(x)) <
                     std::make_pair(std::get<0>(y), std::get<1>(y));
            });
  out.finalize();
  return out;
}

} // namespace

SparseHermitian SparseHermitian::from_dense(const ComplexMatrix &m,
                                            double drop_tol) {
  SparseHermitian out;
  out.side = m.rows();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > drop_tol)
        out.entries.emplace_back(i, j, m(i, j));
  out.finalize();
  return out;
}

ComplexMatrix SparseHermitian::to_dense() const {
  ComplexMatrix out(side, side);
  for (const auto &[i, j, v] : entries)
    out(i, j) = v;
  return out;
}

void SparseHermitian::finalize() {
  nonzero_cols.clear();
  for (const auto &[i, j, v] : entries)
    nonzero_cols.push_back(j);
  std::sort(nonzero_cols.begin(), nonzero_cols.end());
  nonzero_cols.erase(std::unique(nonzero_cols.begin(), nonzero_cols.end()),
                     nonzero_cols.end());
}

std::size_t SdpProblem::block_index(const std::string &name) const {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].name == name)
      return i;
  throw std::invalid_argument("sdp: unknown block '" + name + "'");
}

std::size_t SdpProblem::scalar_index(const std::string &name) const {
  for (std::size_t i = 0; i < scalars.size(); ++i)
    if (scalars[i].name == name)
      return i;
  throw std::invalid_argument("sdp: unknown scalar '" + name + "'");
}

//------------------------------------------------------------------------
// Primal problem
//------------------------------------------------------------------------

SdpProblem build_primal(std::size_t d, std::size_t n, std::size_t side_cap) {
  if (d == 0 || n < 2)
    throw std::invalid_argument("build_primal: need d >= 1, n >= 2");
  check_side_cap(d, n, side_cap, "build_primal");

  const SystemLayout layout = broadcast_layout(d, n);
  SdpProblem p;
  p.d = d;
  p.n = n;
  p.kind = "primal";

  const std::size_t side = layout.total_dim();
  p.blocks.push_back({"J_N1", side, true});
  p.blocks.push_back({"J_N2", side, true});
  p.scalars.push_back({"p1", true});
  p.scalars.push_back({"p2", true});
  p.objective_scalars.push_back({0, 1.0});
  p.objective_scalars.push_back({1, 1.0});

  // the universal-protocol split gives a feasible point with block traces
  // n*d and (n-1)*d; start the solver near it
  p.block_init_trace = {static_cast<double>(n) * d,
                        static_cast<double>(n - 1) * d};

  // marginal constraints tr_{\BBj}[J_N1 - J_N2] = Phi, d^4 rows per group
  const auto phi_coeffs = herm_encode(max_entangled(d));
  const std::size_t pair_dim = herm_basis_dim(d * d);
  for (std::size_t j = 1; j <= n; ++j) {
    EqualityGroup group;
    group.name = "marginal_B" + output_label(j);
    group.space_side = d * d;
    for (std::size_t k = 0; k < pair_dim; ++k) {
      auto coeff = std::make_shared<SparseHermitian>(
          sparse_embed(herm_basis_sparse(d * d, k), {0, j}, layout));
      EqualityRow row;
      row.terms.push_back({0, 1.0, coeff});
      row.terms.push_back({1, -1.0, coeff});
      row.rhs = phi_coeffs[k];
      group.rows.push_back(p.rows.size());
      p.rows.push_back(std::move(row));
    }
    p.groups.push_back(std::move(group));
  }

  // trace preservation tr_{B^n}[J_Ni] = p_i I_B, d^2 rows per channel
  for (std::size_t i = 0; i < 2; ++i) {
    EqualityGroup group;
    group.name = "trace_preservation_N" + std::to_string(i + 1);
    group.space_side = d;
    for (std::size_t m = 0; m < herm_basis_dim(d); ++m) {
      const SparseHermitian e = herm_basis_sparse(d, m);
      EqualityRow row;
      row.terms.push_back({i, 1.0, std::make_shared<SparseHermitian>(
                                       sparse_embed(e, {0}, layout))});
      double tr_e = 0.0;
      for (const auto &[r2, c2, v2] : e.entries)
        if (r2 == c2)
          tr_e += v2.real();
      if (tr_e != 0.0)
        row.scalar_terms.push_back({i, -tr_e});
      row.rhs = 0.0;
      group.rows.push_back(p.rows.size());
      p.rows.push_back(std::move(row));
    }
    p.groups.push_back(std::move(group));
  }

  return p;
}

//------------------------------------------------------------------------
// Dual problem
//------------------------------------------------------------------------

SdpProblem build_dual(std::size_t d, std::size_t n, std::size_t side_cap) {
  if (d == 0 || n < 2)
    throw std::invalid_argument("build_dual: need d >= 1, n >= 2");
  check_side_cap(d, n, side_cap, "build_dual");

  const SystemLayout layout = broadcast_layout(d, n);
  const std::size_t side = layout.total_dim();

  SdpProblem p;
  p.d = d;
  p.n = n;
  p.kind = "dual";
  p.maximize = true;

  for (std::size_t j = 1; j <= n; ++j)
    p.blocks.push_back({"X_B" + output_label(j), d * d, false});
  p.blocks.push_back({"Z_B", d, false});
  p.blocks.push_back({"K_B", d, false});
  p.blocks.push_back({"W1", side, true});
  p.blocks.push_back({"W2", side, true});
  p.scalars.push_back({"s_Z", true});
  p.scalars.push_back({"s_K", true});

  const std::size_t zb = n, kb = n + 1, w1 = n + 2, w2 = n + 3;

  // objective sum_j tr[X_BBj Phi]
  auto phi_sparse = std::make_shared<SparseHermitian>(
      SparseHermitian::from_dense(max_entangled(d)));
  for (std::size_t j = 0; j < n; ++j)
    p.objective_terms.push_back({j, 1.0, phi_sparse});

  // trace caps tr Z <= 1, tr K <= 1 via nonnegative slack scalars
  auto identity_sparse = std::make_shared<SparseHermitian>(
      SparseHermitian::from_dense(ComplexMatrix::identity(d)));
  for (std::size_t i = 0; i < 2; ++i) {
    EqualityGroup group;
    group.name = (i == 0) ? "trace_cap_Z" : "trace_cap_K";
    group.space_side = 1;
    group.slack_scalar = (i == 0) ? "s_Z" : "s_K";
    EqualityRow row;
    row.terms.push_back({(i == 0) ? zb : kb, 1.0, identity_sparse});
    row.scalar_terms.push_back({i, 1.0});
    row.rhs = 1.0;
    group.rows.push_back(p.rows.size());
    p.rows.push_back(std::move(row));
    p.groups.push_back(std::move(group));
  }

  // operator inequalities as PSD slack blocks:
  //   Z (x) I - sum_j lift_j(X_j) - W1 = 0
  //   K (x) I + sum_j lift_j(X_j) - W2 = 0
  const std::size_t full_dim = herm_basis_dim(side);
  for (std::size_t which = 0; which < 2; ++which) {
    EqualityGroup group;
    group.name = (which == 0) ? "psd_constraint_Z" : "psd_constraint_K";
    group.space_side = side;
    group.slack_block = (which == 0) ? "W1" : "W2";
    group.rows.reserve(full_dim);
    const double x_sign = (which == 0) ? -1.0 : 1.0;
    for (std::size_t k = 0; k < full_dim; ++k) {
      const SparseHermitian fk = herm_basis_sparse(side, k);
      EqualityRow row;
      SparseHermitian on_b = sparse_partial_trace(fk, layout, {0});
      if (!on_b.entries.empty())
        row.terms.push_back({(which == 0) ? zb : kb, 1.0,
                             std::make_shared<SparseHermitian>(std::move(on_b))});
      for (std::size_t j = 1; j <= n; ++j) {
        SparseHermitian on_bbj = sparse_partial_trace(fk, layout, {0, j});
        if (!on_bbj.entries.empty())
          row.terms.push_back({j - 1, x_sign,
                               std::make_shared<SparseHermitian>(
                                   std::move(on_bbj))});
      }
      row.terms.push_back(
          {(which == 0) ? w1 : w2, -1.0, std::make_shared<SparseHermitian>(fk)});
      row.rhs = 0.0;
      group.rows.push_back(p.rows.size());
      p.rows.push_back(std::move(row));
    }
    p.groups.push_back(std::move(group));
  }

  return p;
}

//------------------------------------------------------------------------
// Certificate candidates
//------------------------------------------------------------------------

Candidate optimal_2broadcast_primal_candidate(std::size_t d) {
  const HptpDecomposition decomp = choi_optimal_2broadcast(d);
  Candidate c;
  ComplexMatrix j1 = decomp.choi1.matrix;
  j1 *= decomp.p1;
  ComplexMatrix j2 = decomp.choi2.matrix;
  j2 *= decomp.p2;
  c.blocks["J_N1"] = std::move(j1);
  c.blocks["J_N2"] = std::move(j2);
  c.scalars["p1"] = decomp.p1;
  c.scalars["p2"] = decomp.p2;
  return c;
}

Candidate optimal_2broadcast_dual_candidate(std::size_t d) {
  return nbroadcast_dual_candidate(d, 2);
}

Candidate nbroadcast_dual_candidate(std::size_t d, std::size_t n) {
  if (d < 2 || n < 2)
    throw std::invalid_argument("nbroadcast_dual_candidate: need d, n >= 2");
  const double dd = static_cast<double>(d), nn = static_cast<double>(n);
  ComplexMatrix x = max_entangled(d);
  x *= 2.0 / (dd * (nn + dd - 1.0));
  ComplexMatrix shift = ComplexMatrix::identity(d * d);
  shift *= 1.0 / (nn * dd);
  x -= shift;

  ComplexMatrix z = ComplexMatrix::identity(d);
  z *= 1.0 / dd;

  Candidate c;
  for (std::size_t j = 1; j <= n; ++j)
    c.blocks["X_B" + output_label(j)] = x;
  c.blocks["Z_B"] = z;
  c.blocks["K_B"] = z;
  return c;
}

} // namespace vbroadcast
