#include "vbroadcast/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace vbroadcast {

namespace {

void require_square(const ComplexMatrix &m, const char *what) {
  if (!m.square())
    throw std::invalid_argument(std::string(what) + ": matrix not square");
}

void require_layout_match(const ComplexMatrix &m, const SystemLayout &layout,
                          const char *what) {
  require_square(m, what);
  if (m.rows() != layout.total_dim())
    throw std::invalid_argument(std::string(what) +
                                ": matrix side does not match layout dimension");
}

} // namespace

//------------------------------------------------------------------------
// Tensor-product structure
//------------------------------------------------------------------------

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b) {
  require_square(a, "kron");
  require_square(b, "kron");
  const std::size_t na = a.rows(), nb = b.rows();
  ComplexMatrix out(na * nb, na * nb);
  for (std::size_t ia = 0; ia < na; ++ia)
    for (std::size_t ja = 0; ja < na; ++ja) {
      const complex_t av = a(ia, ja);
      if (av == complex_t(0.0, 0.0))
        continue;
      for (std::size_t ib = 0; ib < nb; ++ib)
        for (std::size_t jb = 0; jb < nb; ++jb)
          out(ia * nb + ib, ja * nb + jb) = av * b(ib, jb);
    }
  return out;
}

SystemLayout reduced_layout(const SystemLayout &layout,
                            const std::set<std::string> &keep) {
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (keep.count(layout.at(i).label))
      positions.push_back(i);
  return layout.select(positions);
}

ComplexMatrix partial_trace(const ComplexMatrix &m, const SystemLayout &layout,
                            const std::set<std::string> &keep) {
  require_layout_match(m, layout, "partial_trace");
  for (const auto &label : keep)
    layout.index_of(label); // throws on unknown label

  std::vector<std::size_t> kept, traced;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (keep.count(layout.at(i).label))
      kept.push_back(i);
    else
      traced.push_back(i);
  }

  std::size_t dim_kept = 1, dim_traced = 1;
  for (std::size_t p : kept)
    dim_kept *= layout.at(p).dim;
  for (std::size_t p : traced)
    dim_traced *= layout.at(p).dim;

  // strides of each subsystem in the flat index
  std::vector<std::size_t> stride(layout.size(), 1);
  for (std::size_t i = layout.size(); i-- > 1;)
    stride[i - 1] = stride[i] * layout.at(i).dim;

  // flat offset of a kept (resp. traced) multi-index in the full space
  auto offsets = [&](const std::vector<std::size_t> &positions,
                     std::size_t count) {
    std::vector<std::size_t> out(count, 0);
    for (std::size_t flat = 0; flat < count; ++flat) {
      std::size_t rem = flat, off = 0;
      for (std::size_t k = positions.size(); k-- > 0;) {
        const std::size_t dim = layout.at(positions[k]).dim;
        off += (rem % dim) * stride[positions[k]];
        rem /= dim;
      }
      out[flat] = off;
    }
    return out;
  };

  const auto kept_off = offsets(kept, dim_kept);
  const auto traced_off = offsets(traced, dim_traced);

  ComplexMatrix out(dim_kept, dim_kept);
  for (std::size_t r = 0; r < dim_kept; ++r)
    for (std::size_t c = 0; c < dim_kept; ++c) {
      complex_t sum = 0.0;
      for (std::size_t t = 0; t < dim_traced; ++t)
        sum += m(kept_off[r] + traced_off[t], kept_off[c] + traced_off[t]);
      out(r, c) = sum;
    }
  return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix &m,
                                const SystemLayout &layout,
                                const std::string &target) {
  require_layout_match(m, layout, "partial_transpose");
  const std::size_t pos = layout.index_of(target);
  const std::size_t n = layout.total_dim();

  ComplexMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    auto rd = layout.digits(r);
    for (std::size_t c = 0; c < n; ++c) {
      auto cd = layout.digits(c);
      std::swap(rd[pos], cd[pos]);
      out(layout.flat(rd), layout.flat(cd)) = m(r, c);
      std::swap(rd[pos], cd[pos]);
    }
  }
  return out;
}

ComplexMatrix permute_subsystems(const ComplexMatrix &m,
                                 const SystemLayout &layout,
                                 const std::vector<std::size_t> &new_order) {
  require_layout_match(m, layout, "permute_subsystems");
  if (new_order.size() != layout.size())
    throw std::invalid_argument("permute_subsystems: order length mismatch");

  const SystemLayout target = layout.select(new_order);
  const std::size_t n = layout.total_dim();

  // old flat index of each new flat index
  std::vector<std::size_t> source(n);
  for (std::size_t f = 0; f < n; ++f) {
    auto nd = target.digits(f);
    std::vector<std::size_t> od(layout.size());
    for (std::size_t i = 0; i < new_order.size(); ++i)
      od[new_order[i]] = nd[i];
    source[f] = layout.flat(od);
  }

  ComplexMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      out(r, c) = m(source[r], source[c]);
  return out;
}

namespace {

std::vector<std::size_t> swap_index_map(const SystemLayout &layout,
                                        const std::string &a,
                                        const std::string &b) {
  const std::size_t pa = layout.index_of(a), pb = layout.index_of(b);
  if (layout.at(pa).dim != layout.at(pb).dim)
    throw std::invalid_argument("swap: subsystem dimensions differ");
  const std::size_t n = layout.total_dim();
  std::vector<std::size_t> map(n);
  for (std::size_t f = 0; f < n; ++f) {
    auto d = layout.digits(f);
    std::swap(d[pa], d[pb]);
    map[f] = layout.flat(d);
  }
  return map;
}

} // namespace

ComplexMatrix swap_conjugate(const ComplexMatrix &m, const SystemLayout &layout,
                             const std::string &a, const std::string &b) {
  require_layout_match(m, layout, "swap_conjugate");
  const auto map = swap_index_map(layout, a, b);
  const std::size_t n = m.rows();
  ComplexMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      out(r, c) = m(map[r], map[c]);
  return out;
}

ComplexMatrix swap_right_mul(const ComplexMatrix &m, const SystemLayout &layout,
                             const std::string &a, const std::string &b) {
  require_layout_match(m, layout, "swap_right_mul");
  const auto map = swap_index_map(layout, a, b);
  const std::size_t n = m.rows();
  ComplexMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      out(r, c) = m(r, map[c]);
  return out;
}

ComplexMatrix swap_left_mul(const ComplexMatrix &m, const SystemLayout &layout,
                            const std::string &a, const std::string &b) {
  require_layout_match(m, layout, "swap_left_mul");
  const auto map = swap_index_map(layout, a, b);
  const std::size_t n = m.rows();
  ComplexMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      out(r, c) = m(map[r], c);
  return out;
}

ComplexMatrix embed(const ComplexMatrix &op,
                    const std::vector<std::string> &op_labels,
                    const SystemLayout &layout) {
  require_square(op, "embed");
  std::vector<std::size_t> positions;
  positions.reserve(op_labels.size());
  std::size_t op_dim = 1;
  for (const auto &label : op_labels) {
    positions.push_back(layout.index_of(label));
    op_dim *= layout.at(positions.back()).dim;
  }
  if (op.rows() != op_dim)
    throw std::invalid_argument("embed: operator side does not match subsystems");

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (std::find(positions.begin(), positions.end(), i) == positions.end())
      rest.push_back(i);

  std::vector<std::size_t> stride(layout.size(), 1);
  for (std::size_t i = layout.size(); i-- > 1;)
    stride[i - 1] = stride[i] * layout.at(i).dim;

  const SystemLayout op_layout = layout.select(positions);

  std::size_t rest_dim = 1;
  for (std::size_t p : rest)
    rest_dim *= layout.at(p).dim;
  std::vector<std::size_t> rest_off(rest_dim, 0);
  for (std::size_t flat = 0; flat < rest_dim; ++flat) {
    std::size_t rem = flat, off = 0;
    for (std::size_t k = rest.size(); k-- > 0;) {
      const std::size_t dim = layout.at(rest[k]).dim;
      off += (rem % dim) * stride[rest[k]];
      rem /= dim;
    }
    rest_off[flat] = off;
  }

  std::vector<std::size_t> op_off(op_dim, 0);
  for (std::size_t flat = 0; flat < op_dim; ++flat) {
    auto d = op_layout.digits(flat);
    std::size_t off = 0;
    for (std::size_t k = 0; k < positions.size(); ++k)
      off += d[k] * stride[positions[k]];
    op_off[flat] = off;
  }

  ComplexMatrix out(layout.total_dim(), layout.total_dim());
  for (std::size_t r = 0; r < op_dim; ++r)
    for (std::size_t c = 0; c < op_dim; ++c) {
      const complex_t v = op(r, c);
      if (v == complex_t(0.0, 0.0))
        continue;
      for (std::size_t t = 0; t < rest_dim; ++t)
        out(op_off[r] + rest_off[t], op_off[c] + rest_off[t]) = v;
    }
  return out;
}

//------------------------------------------------------------------------
// Structured operators
//------------------------------------------------------------------------

ComplexMatrix swap_operator(std::size_t d) {
  if (d == 0)
    throw std::invalid_argument("swap_operator: d must be positive");
  ComplexMatrix f(d * d, d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      f(i * d + j, j * d + i) = 1.0;
  return f;
}

ComplexMatrix max_entangled(std::size_t d) {
  if (d == 0)
    throw std::invalid_argument("max_entangled: d must be positive");
  ComplexMatrix phi(d * d, d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      phi(i * d + i, j * d + j) = 1.0;
  return phi;
}

//------------------------------------------------------------------------
// Hermitian operator basis
//------------------------------------------------------------------------

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

std::size_t herm_basis_dim(std::size_t n) { return n * n; }

ComplexMatrix herm_basis_element(std::size_t n, std::size_t k) {
  if (k >= n * n)
    throw std::invalid_argument("herm_basis_element: index out of range");
  ComplexMatrix e(n, n);
  if (k < n) {
    e(k, k) = 1.0;
    return e;
  }
  std::size_t t = k - n;
  // pairs (i, j), i < j, in row-major order; two elements per pair
  std::size_t p = t / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t count = n - i - 1;
    if (p < count) {
      const std::size_t j = i + 1 + p;
      if (t % 2 == 0) {
        e(i, j) = 1.0 / kSqrt2;
        e(j, i) = 1.0 / kSqrt2;
      } else {
        e(i, j) = complex_t(0.0, 1.0 / kSqrt2);
        e(j, i) = complex_t(0.0, -1.0 / kSqrt2);
      }
      return e;
    }
    p -= count;
  }
  throw std::logic_error("herm_basis_element: enumeration error");
}

std::vector<double> herm_encode(const ComplexMatrix &h) {
  require_square(h, "herm_encode");
  const std::size_t n = h.rows();
  std::vector<double> c;
  c.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    c.push_back(h(i, i).real());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      c.push_back(kSqrt2 * h(i, j).real());
      c.push_back(kSqrt2 * h(i, j).imag());
    }
  return c;
}

ComplexMatrix herm_decode(const std::vector<double> &coeffs, std::size_t n) {
  if (coeffs.size() != n * n)
    throw std::invalid_argument("herm_decode: coefficient count mismatch");
  ComplexMatrix h(n, n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    h(i, i) = coeffs[k++];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double re = coeffs[k++] / kSqrt2;
      const double im = coeffs[k++] / kSqrt2;
      h(i, j) = complex_t(re, im);
      h(j, i) = complex_t(re, -im);
    }
  return h;
}

ComplexMatrix real_embedding(const ComplexMatrix &m) {
  require_square(m, "real_embedding");
  const std::size_t n = m.rows();
  ComplexMatrix out(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double re = m(i, j).real(), im = m(i, j).imag();
      out(i, j) = re;
      out(i, j + n) = -im;
      out(i + n, j) = im;
      out(i + n, j + n) = re;
    }
  return out;
}

//------------------------------------------------------------------------
// Random test states
//------------------------------------------------------------------------

ComplexMatrix random_ginibre_density(std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix g(side, side);
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j)
      g(i, j) = complex_t(gauss(rng), gauss(rng));
  ComplexMatrix rho = g * g.dagger();
  rho *= 1.0 / rho.trace().real();
  rho.hermitize();
  return rho;
}

ComplexMatrix random_hermitian(std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix h(side, side);
  for (std::size_t i = 0; i < side; ++i) {
    h(i, i) = gauss(rng);
    for (std::size_t j = i + 1; j < side; ++j) {
      h(i, j) = complex_t(gauss(rng), gauss(rng));
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

} // namespace vbroadcast
