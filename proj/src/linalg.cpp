#include "propcov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "propcov/errors.hpp"

namespace propcov::linalg {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                            "x" + std::to_string(b.cols()));
  }
}

void require_square(const Matrix& m, const char* what) {
  if (!m.is_square() || m.rows() == 0) {
    throw DimensionMismatch(std::string(what) + ": expected a non-empty square matrix");
  }
}

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t nr = rows.size();
  const std::size_t nc = nr == 0 ? 0 : rows.begin()->size();
  Matrix m(nr, nc);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != nc) throw DimensionMismatch("ragged matrix literal");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : Matrix(from_rows(rows)) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  Matrix m(v.size(), 1);
  std::copy(v.begin(), v.end(), m.data_.begin());
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionMismatch("block out of range");
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) {
    throw DimensionMismatch("set_block out of range");
  }
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

Vector Matrix::col(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

Vector Matrix::diag() const {
  const std::size_t n = std::min(rows_, cols_);
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (*this)(i, i);
  return v;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  require_same_shape(*this, rhs, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  require_same_shape(*this, rhs, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("matrix-vector product");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Matrix outer(std::span<const double> a, std::span<const double> b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const Matrix& m) {
  double r = 0.0;
  for (double v : m.data()) r = std::max(r, std::abs(v));
  return r;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double r = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    r = std::max(r, std::abs(a.data()[k] - b.data()[k]));
  return r;
}

double max_asymmetry(const Matrix& m) {
  require_square(m, "max_asymmetry");
  double r = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) r = std::max(r, std::abs(m(i, j) - m(j, i)));
  return r;
}

// --- SymMatrix ----------------------------------------------------------

SymMatrix::SymMatrix(const Matrix& m) : m_(m) {
  require_square(m, "SymMatrix");
  const double asym = max_asymmetry(m);
  if (asym == 0.0) return;
  if (asym > 1e-9 * max_abs(m)) {
    throw InvalidArgument("SymMatrix: matrix is not symmetric (max asymmetry " +
                          std::to_string(asym) + ")");
  }
  for (std::size_t i = 0; i < m_.rows(); ++i) {
    for (std::size_t j = i + 1; j < m_.cols(); ++j) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m_(i, j) = avg;
      m_(j, i) = avg;
    }
  }
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : SymMatrix(Matrix(rows)) {}

SymMatrix SymMatrix::identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }

// --- triangular ---------------------------------------------------------

LowerTriangular::LowerTriangular(const Matrix& m) : m_(m) {
  require_square(m, "LowerTriangular");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != 0.0) throw InvalidArgument("LowerTriangular: nonzero entry above diagonal");
}

LowerTriangular::LowerTriangular(std::initializer_list<std::initializer_list<double>> rows)
    : LowerTriangular(Matrix(rows)) {}

LowerTriangular LowerTriangular::identity(std::size_t n) {
  return LowerTriangular(Matrix::identity(n));
}

bool LowerTriangular::has_positive_diagonal() const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(m_(i, i) > 0.0)) return false;
  return true;
}

UpperTriangular::UpperTriangular(const Matrix& m) : m_(m) {
  require_square(m, "UpperTriangular");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (m(i, j) != 0.0) throw InvalidArgument("UpperTriangular: nonzero entry below diagonal");
}

UpperTriangular::UpperTriangular(std::initializer_list<std::initializer_list<double>> rows)
    : UpperTriangular(Matrix(rows)) {}

UpperTriangular UpperTriangular::identity(std::size_t n) {
  return UpperTriangular(Matrix::identity(n));
}

bool UpperTriangular::has_positive_diagonal() const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(m_(i, i) > 0.0)) return false;
  return true;
}

LowerTriangular transpose(const UpperTriangular& u) { return LowerTriangular(u.matrix().transpose()); }
UpperTriangular transpose(const LowerTriangular& l) { return UpperTriangular(l.matrix().transpose()); }

// --- factorizations -----------------------------------------------------

LowerTriangular cholesky_lower(const SymMatrix& m) {
  const std::size_t p = m.dim();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, m(i, i));
  const double threshold = 1e-12 * max_diag;

  Matrix a(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    double pivot = m(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= a(j, k) * a(j, k);
    if (!(pivot > threshold) || !(max_diag > 0.0)) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j + 1) + " is " +
                                std::to_string(pivot));
    }
    const double ajj = std::sqrt(pivot);
    a(j, j) = ajj;
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ajj;
    }
  }
  return LowerTriangular(a);
}

LowerTriangular invert_lower_triangular(const LowerTriangular& l) {
  const std::size_t p = l.dim();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, std::abs(l(i, i)));
  for (std::size_t i = 0; i < p; ++i) {
    if (l(i, i) == 0.0 || std::abs(l(i, i)) <= 1e-14 * max_diag) {
      throw SingularMatrix("invert_lower_triangular: diagonal entry " + std::to_string(i + 1) +
                           " is numerically zero");
    }
  }
  Matrix inv(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    inv(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s += l(i, k) * inv(k, j);
      inv(i, j) = -s / l(i, i);
    }
  }
  return LowerTriangular(inv);
}

SymMatrix sym_inverse(const SymMatrix& m) {
  const LowerTriangular a = cholesky_lower(m);
  const LowerTriangular ainv = invert_lower_triangular(a);
  // M⁻¹ = A⁻ᵀ A⁻¹
  const std::size_t p = m.dim();
  Matrix r(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < p; ++k) s += ainv(k, i) * ainv(k, j);
      r(i, j) = s;
      r(j, i) = s;
    }
  }
  return SymMatrix(r);
}

double trace_of_product(const SymMatrix& m, const SymMatrix& n) {
  if (m.dim() != n.dim()) throw DimensionMismatch("trace_of_product: dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) s += m(i, j) * n(j, i);
  return s;
}

SymMatrix gram(const LowerTriangular& l) {
  const std::size_t p = l.dim();
  Matrix r(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += l(i, k) * l(j, k);
      r(i, j) = s;
      r(j, i) = s;
    }
  }
  return SymMatrix(r);
}

SymMatrix gram(const UpperTriangular& u) {
  const std::size_t p = u.dim();
  Matrix r(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < p; ++k) s += u(i, k) * u(j, k);
      r(i, j) = s;
      r(j, i) = s;
    }
  }
  return SymMatrix(r);
}

double log_det(const SymMatrix& m) {
  const LowerTriangular a = cholesky_lower(m);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::log(a(i, i));
  return 2.0 * s;
}

SymMatrix scaled(const SymMatrix& m, double s) { return SymMatrix(s * m.matrix()); }

double quadratic_form(const Matrix& m, std::span<const double> x) {
  return dot(x, m * x);
}

}  // namespace propcov::linalg
