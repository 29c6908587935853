#ifndef VBROADCAST_MATRIX_HPP
#define VBROADCAST_MATRIX_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace vbroadcast {

using complex_t = std::complex<double>;

// Dense complex matrix with row-major storage. Row-major dense is all we
// need: the largest operator in the suite has side d^(n+1) <= 256.
class ComplexMatrix {
public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zero(std::size_t n) { return ComplexMatrix(n, n); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  complex_t &operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  const complex_t &operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  complex_t *data() { return data_.data(); }
  const complex_t *data() const { return data_.data(); }
  complex_t *row(std::size_t i) { return data_.data() + i * cols_; }
  const complex_t *row(std::size_t i) const { return data_.data() + i * cols_; }

  ComplexMatrix &operator+=(const ComplexMatrix &other);
  ComplexMatrix &operator-=(const ComplexMatrix &other);
  ComplexMatrix &operator*=(complex_t scale);
  ComplexMatrix &operator*=(double scale);

  ComplexMatrix dagger() const;
  complex_t trace() const;
  double max_abs() const;

  // max_ij |M(i,j) - conj(M(j,i))|
  double herm_defect() const;
  bool is_hermitian(double tol = 1e-12) const { return herm_defect() <= tol; }
  // M <- (M + M^dagger)/2, killing antihermitian roundoff drift
  void hermitize();

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<complex_t> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix &b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix &b);
ComplexMatrix operator*(complex_t s, ComplexMatrix m);
ComplexMatrix operator*(double s, ComplexMatrix m);
ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b);

double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b);

} // namespace vbroadcast

#endif
