#pragma once

// Small dense linear algebra for the proportional covariance model.
//
// Matrices are dense and row-major. Dimensions stay small (p up to a few
// dozen), so nothing here is blocked or packed. The three strong types
// SymMatrix, LowerTriangular and UpperTriangular carry their structural
// invariant; everything else is a plain Matrix.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace propcov::linalg {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix column(std::span<const double> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  Matrix transpose() const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);
  Vector col(std::size_t j) const;
  Vector diag() const;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

// a bᵀ
Matrix outer(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

// Infinity norm of the entries (max |m_ij|), not the induced operator norm.
double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_asymmetry(const Matrix& m);

class SymMatrix {
 public:
  SymMatrix() = default;
  // Accepts round-off asymmetry up to 1e-9 * max|m| and symmetrizes it away;
  // anything larger throws InvalidArgument.
  explicit SymMatrix(const Matrix& m);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix identity(std::size_t n);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  Matrix m_;
};

class LowerTriangular {
 public:
  LowerTriangular() = default;
  // Entries strictly above the diagonal must be exactly zero.
  explicit LowerTriangular(const Matrix& m);
  LowerTriangular(std::initializer_list<std::initializer_list<double>> rows);

  static LowerTriangular identity(std::size_t n);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }
  bool has_positive_diagonal() const;

  friend bool operator==(const LowerTriangular&, const LowerTriangular&) = default;

 private:
  Matrix m_;
};

class UpperTriangular {
 public:
  UpperTriangular() = default;
  explicit UpperTriangular(const Matrix& m);
  UpperTriangular(std::initializer_list<std::initializer_list<double>> rows);

  static UpperTriangular identity(std::size_t n);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }
  bool has_positive_diagonal() const;

  friend bool operator==(const UpperTriangular&, const UpperTriangular&) = default;

 private:
  Matrix m_;
};

LowerTriangular transpose(const UpperTriangular& u);
UpperTriangular transpose(const LowerTriangular& l);

// A with A Aᵀ = M and positive diagonal. A pivot at or below
// 1e-12 * max diag(M) raises NotPositiveDefinite.
LowerTriangular cholesky_lower(const SymMatrix& m);

// Forward substitution on the identity. SingularMatrix if some diagonal
// entry is zero or below 1e-14 * max |l_jj|.
LowerTriangular invert_lower_triangular(const LowerTriangular& l);

SymMatrix sym_inverse(const SymMatrix& m);

// Σᵢⱼ M[i][j] N[j][i] without forming the product.
double trace_of_product(const SymMatrix& m, const SymMatrix& n);

// L Lᵀ for lower triangular L (symmetric by construction).
SymMatrix gram(const LowerTriangular& l);
// U Uᵀ for upper triangular U.
SymMatrix gram(const UpperTriangular& u);

double log_det(const SymMatrix& m);

SymMatrix scaled(const SymMatrix& m, double s);

// x' M x
double quadratic_form(const Matrix& m, std::span<const double> x);

}  // namespace propcov::linalg
