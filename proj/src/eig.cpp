#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "vbroadcast/linalg.hpp"

// Hermitian eigensolver: complex Householder reduction to tridiagonal form,
// a diagonal phase similarity making the subdiagonal real nonnegative, then
// the classic implicit-shift QL iteration on the real tridiagonal matrix.
// Rotations are accumulated straight into the complex transform when
// eigenvectors are requested.

namespace vbroadcast {

namespace {

// Reduce Hermitian a (modified in place) to tridiagonal form: d gets the
// diagonal, e[0..n-2] the (real, nonnegative) subdiagonal. If q is non-null
// it accumulates the unitary with q^dagger a q tridiagonal.
void tridiagonalize(ComplexMatrix &a, std::vector<double> &d,
                    std::vector<double> &e, ComplexMatrix *q) {
  const std::size_t n = a.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  if (q)
    *q = ComplexMatrix::identity(n);
  if (n == 1) {
    d[0] = a(0, 0).real();
    return;
  }

  std::vector<complex_t> v(n), p(n), w(n);

  // columns below eps^2 * |A| are roundoff residue of exact cancellation;
  // eliminating them feeds a geometric noise cascade that eventually
  // underflows, so they are flushed to zero instead
  const double eps = std::numeric_limits<double>::epsilon();
  const double zero_tol = a.max_abs() * eps * eps;

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - 1 - k; // length of the column below the diagonal

    // scale by the column 1-norm so roundoff-level columns cannot overflow
    // the reflector normalization
    double scale = 0.0;
    for (std::size_t i = k + 1; i < n; ++i)
      scale += std::abs(a(i, k).real()) + std::abs(a(i, k).imag());
    if (scale <= zero_tol) {
      for (std::size_t i = k + 1; i < n; ++i) {
        a(i, k) = 0.0;
        a(k, i) = 0.0;
      }
      continue;
    }
    const double inv_scale = 1.0 / scale;

    double tail2 = 0.0;
    for (std::size_t i = k + 2; i < n; ++i)
      tail2 += std::norm(a(i, k) * inv_scale);
    const complex_t alpha = a(k + 1, k) * inv_scale;
    if (tail2 == 0.0)
      continue; // column already tridiagonal (phase fixed later)

    const double nu = std::sqrt(std::norm(alpha) + tail2);
    const complex_t u =
        (std::abs(alpha) > 0.0) ? alpha / std::abs(alpha) : complex_t(1.0, 0.0);

    // Householder vector v with (I - beta v v^dagger) x = -u nu e1; the
    // reflector is invariant under rescaling of v, so the scaled column works
    v[0] = alpha + u * nu;
    for (std::size_t i = 1; i < len; ++i)
      v[i] = a(k + 1 + i, k) * inv_scale;
    const double vnorm2 = std::norm(v[0]) + tail2;
    const double beta = 2.0 / vnorm2;

    a(k + 1, k) = -u * nu * scale;
    a(k, k + 1) = std::conj(a(k + 1, k));
    for (std::size_t i = k + 2; i < n; ++i) {
      a(i, k) = 0.0;
      a(k, i) = 0.0;
    }

    // rank-2 update of the trailing block B = a[k+1.., k+1..]:
    // p = beta B v, w = p - (beta/2)(v^dagger p) v, B -= w v^dagger + v w^dagger
    for (std::size_t i = 0; i < len; ++i) {
      complex_t sum = 0.0;
      const complex_t *arow = a.row(k + 1 + i) + (k + 1);
      for (std::size_t jj = 0; jj < len; ++jj)
        sum += arow[jj] * v[jj];
      p[i] = beta * sum;
    }
    complex_t vp = 0.0;
    for (std::size_t i = 0; i < len; ++i)
      vp += std::conj(v[i]) * p[i];
    const complex_t kappa = 0.5 * beta * vp;
    for (std::size_t i = 0; i < len; ++i)
      w[i] = p[i] - kappa * v[i];
    for (std::size_t i = 0; i < len; ++i) {
      complex_t *arow = a.row(k + 1 + i) + (k + 1);
      const complex_t wi = w[i], vi = v[i];
      for (std::size_t jj = 0; jj < len; ++jj)
        arow[jj] -= wi * std::conj(v[jj]) + vi * std::conj(w[jj]);
    }

    if (q) {
      // Q <- Q (I - beta v v^dagger) on columns k+1..n-1
      for (std::size_t r = 0; r < n; ++r) {
        complex_t *qrow = q->row(r) + (k + 1);
        complex_t t = 0.0;
        for (std::size_t jj = 0; jj < len; ++jj)
          t += qrow[jj] * v[jj];
        t *= beta;
        for (std::size_t jj = 0; jj < len; ++jj)
          qrow[jj] -= t * std::conj(v[jj]);
      }
    }
  }

  // phase similarity making the subdiagonal real nonnegative
  std::vector<complex_t> phase(n, complex_t(1.0, 0.0));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const complex_t t = a(k + 1, k);
    const double mag = std::abs(t);
    e[k] = mag;
    phase[k + 1] = (mag > 0.0) ? phase[k] * (std::conj(t) / mag) : phase[k];
  }
  for (std::size_t i = 0; i < n; ++i)
    d[i] = a(i, i).real();
  if (q)
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        (*q)(r, c) *= std::conj(phase[c]);
}

// Implicit-shift QL on the real symmetric tridiagonal (d, e). Rotations are
// applied to the columns of z when z is non-null.
void tql(std::vector<double> &d, std::vector<double> &e, ComplexMatrix *z) {
  const std::size_t n = d.size();
  if (n <= 1)
    return;
  const double eps = std::numeric_limits<double>::epsilon();

  // absolute deflation floor: couplings below eps * |T| only shift
  // eigenvalues at roundoff level, and leaving them in place stalls the
  // shift strategy on graded noise cascades
  double anorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(d[i]);
    if (i > 0)
      row += std::abs(e[i - 1]);
    if (i + 1 < n)
      row += std::abs(e[i]);
    anorm = std::max(anorm, row);
  }
  const double floor_tol = eps * anorm + 1e-300;

  for (std::size_t l = 0; l < n; ++l) {
    std::size_t iter = 0;
    while (true) {
      std::size_t m = l;
      while (m + 1 < n) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd + floor_tol)
          break;
        ++m;
      }
      if (m == l)
        break;
      if (++iter > 64)
        throw std::runtime_error("herm_eig: QL iteration failed to converge");

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;

      bool underflow = false;
      for (std::size_t i = m; i-- > l;) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (z) {
          for (std::size_t k = 0; k < z->rows(); ++k) {
            const complex_t zf = (*z)(k, i + 1);
            (*z)(k, i + 1) = s * (*z)(k, i) + c * zf;
            (*z)(k, i) = c * (*z)(k, i) - s * zf;
          }
        }
      }
      if (underflow)
        continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

ComplexMatrix checked_hermitian_copy(const ComplexMatrix &m) {
  if (!m.square())
    throw std::invalid_argument("herm_eig: matrix not square");
  if (m.herm_defect() > kHermTolEig)
    throw std::invalid_argument("herm_eig: input is not Hermitian");
  ComplexMatrix a = m;
  a.hermitize();
  return a;
}

} // namespace

EigResult herm_eig(const ComplexMatrix &m) {
  ComplexMatrix a = checked_hermitian_copy(m);
  const std::size_t n = a.rows();

  std::vector<double> d, e;
  ComplexMatrix q;
  tridiagonalize(a, d, e, &q);
  tql(d, e, &q);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return d[x] > d[y]; });

  EigResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = d[order[c]];
    for (std::size_t r = 0; r < n; ++r)
      out.eigenvectors(r, c) = q(r, order[c]);
  }
  return out;
}

std::vector<double> herm_eigvals(const ComplexMatrix &m) {
  ComplexMatrix a = checked_hermitian_copy(m);
  std::vector<double> d, e;
  tridiagonalize(a, d, e, nullptr);
  tql(d, e, nullptr);
  std::sort(d.begin(), d.end(), std::greater<double>());
  return d;
}

double min_eigenvalue(const ComplexMatrix &m) {
  const auto vals = herm_eigvals(m);
  return vals.back();
}

bool is_psd(const ComplexMatrix &m, double tol) {
  return min_eigenvalue(m) >= -tol;
}

} // namespace vbroadcast
