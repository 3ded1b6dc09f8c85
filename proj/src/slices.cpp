#include "propcov/slices.hpp"

#include "propcov/errors.hpp"

namespace propcov::slices {

Vector col_head(const Matrix& m, std::size_t col, std::size_t len) {
  if (col >= m.cols() || len > m.rows()) throw DimensionMismatch("col_head out of range");
  Vector v(len);
  for (std::size_t r = 0; r < len; ++r) v[r] = m(r, col);
  return v;
}

Vector col_tail(const Matrix& m, std::size_t col, std::size_t skip) {
  if (col >= m.cols() || skip > m.rows()) throw DimensionMismatch("col_tail out of range");
  Vector v(m.rows() - skip);
  for (std::size_t r = skip; r < m.rows(); ++r) v[r - skip] = m(r, col);
  return v;
}

Vector row_tail(const Matrix& m, std::size_t row, std::size_t skip) {
  if (row >= m.rows() || skip > m.cols()) throw DimensionMismatch("row_tail out of range");
  Vector v(m.cols() - skip);
  for (std::size_t c = skip; c < m.cols(); ++c) v[c - skip] = m(row, c);
  return v;
}

Matrix leading(const Matrix& m, std::size_t n) { return m.block(0, 0, n, n); }

Matrix trailing(const Matrix& m, std::size_t skip) {
  return m.block(skip, skip, m.rows() - skip, m.cols() - skip);
}

Matrix corner(const Matrix& m, std::size_t row, std::size_t col) {
  return m.block(row, col, m.rows() - row, m.cols() - col);
}

Vector unit(std::size_t n, std::size_t pos) {
  if (pos >= n) throw DimensionMismatch("unit vector position out of range");
  Vector v(n, 0.0);
  v[pos] = 1.0;
  return v;
}

Matrix selector(std::size_t n, std::size_t skip) {
  if (skip > n) throw DimensionMismatch("selector: skip exceeds dimension");
  Matrix s(n - skip, n);
  for (std::size_t r = 0; r < n - skip; ++r) s(r, skip + r) = 1.0;
  return s;
}

}  // namespace propcov::slices
