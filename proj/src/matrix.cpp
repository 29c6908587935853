#include "vbroadcast/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vbroadcast {

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    m(i, i) = 1.0;
  return m;
}

ComplexMatrix &ComplexMatrix::operator+=(const ComplexMatrix &other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("matrix addition: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i)
    data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix &ComplexMatrix::operator-=(const ComplexMatrix &other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("matrix subtraction: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i)
    data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix &ComplexMatrix::operator*=(complex_t scale) {
  for (auto &v : data_)
    v *= scale;
  return *this;
}

ComplexMatrix &ComplexMatrix::operator*=(double scale) {
  for (auto &v : data_)
    v *= scale;
  return *this;
}

ComplexMatrix ComplexMatrix::dagger() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      out(j, i) = std::conj((*this)(i, j));
  return out;
}

complex_t ComplexMatrix::trace() const {
  if (!square())
    throw std::invalid_argument("trace: matrix not square");
  complex_t t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const auto &v : data_)
    m = std::max(m, std::abs(v));
  return m;
}

double ComplexMatrix::herm_defect() const {
  if (!square())
    return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i; j < cols_; ++j)
      m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return m;
}

void ComplexMatrix::hermitize() {
  if (!square())
    throw std::invalid_argument("hermitize: matrix not square");
  for (std::size_t i = 0; i < rows_; ++i) {
    (*this)(i, i) = complex_t((*this)(i, i).real(), 0.0);
    for (std::size_t j = i + 1; j < cols_; ++j) {
      complex_t avg = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
      (*this)(i, j) = avg;
      (*this)(j, i) = std::conj(avg);
    }
  }
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix &b) {
  a += b;
  return a;
}

ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix &b) {
  a -= b;
  return a;
}

ComplexMatrix operator*(complex_t s, ComplexMatrix m) {
  m *= s;
  return m;
}

ComplexMatrix operator*(double s, ComplexMatrix m) {
  m *= s;
  return m;
}

ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matrix product: inner dimension mismatch");
  ComplexMatrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    complex_t *ci = c.row(i);
    const complex_t *ai = a.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const complex_t aip = ai[p];
      if (aip == complex_t(0.0, 0.0))
        continue;
      const complex_t *bp = b.row(p);
      for (std::size_t j = 0; j < m; ++j)
        ci[j] += aip * bp[j];
    }
  }
  return c;
}

double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

} // namespace vbroadcast
