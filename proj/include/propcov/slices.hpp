#pragma once

// Sub-vector and sub-matrix extractors used to assemble the block-structured
// covariance formulas. All indices are 0-based; "skip" counts leading rows
// (or columns) dropped.
//
//   col_head(M, j, len)    first `len` entries of column j
//   col_tail(M, j, skip)   column j with the first `skip` rows removed
//   row_tail(M, i, skip)   row i with the first `skip` columns removed
//   leading(M, n)          leading principal n x n submatrix
//   trailing(M, skip)      M with the first `skip` rows and columns removed
//   corner(M, i, j)        lower-right corner starting at (i, j)
//   unit(n, pos)           unit vector of length n, one at pos
//   selector(n, skip)      (n - skip) x n matrix [0 | I]
//
// With these, the A-packing block i is col_tail(A, i, i), the B-packing
// block i is col_head(B, i, i + 1), and Σ₁'s block i is col_tail(Σ₁, i, i).

#include <cstddef>

#include "propcov/linalg.hpp"

namespace propcov::slices {

using linalg::Matrix;
using linalg::Vector;

Vector col_head(const Matrix& m, std::size_t col, std::size_t len);
Vector col_tail(const Matrix& m, std::size_t col, std::size_t skip);
Vector row_tail(const Matrix& m, std::size_t row, std::size_t skip);
Matrix leading(const Matrix& m, std::size_t n);
Matrix trailing(const Matrix& m, std::size_t skip);
Matrix corner(const Matrix& m, std::size_t row, std::size_t col);
Vector unit(std::size_t n, std::size_t pos);
Matrix selector(std::size_t n, std::size_t skip);

}  // namespace propcov::slices
