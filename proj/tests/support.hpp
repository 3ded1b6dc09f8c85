#pragma once

#include <cstdint>
#include <random>

#include "propcov/linalg.hpp"
#include "propcov/model.hpp"

namespace propcov::testing {

using linalg::LowerTriangular;
using linalg::Matrix;
using linalg::SymMatrix;

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

inline LowerTriangular random_lower(std::mt19937_64& rng, std::size_t p) {
  std::uniform_real_distribution<double> diag(0.5, 2.0);
  std::normal_distribution<double> off(0.0, 0.5);
  Matrix a(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    a(i, i) = diag(rng);
    for (std::size_t j = 0; j < i; ++j) a(i, j) = off(rng);
  }
  return LowerTriangular(a);
}

// G Gᵀ + p I, comfortably conditioned.
inline SymMatrix random_spd(std::mt19937_64& rng, std::size_t p) {
  const Matrix g = random_matrix(rng, p, p);
  Matrix m = g * g.transpose();
  for (std::size_t i = 0; i < p; ++i) m(i, i) += static_cast<double>(p);
  return SymMatrix(m);
}

inline SampleSet random_samples(std::mt19937_64& rng, std::size_t p, std::size_t k) {
  std::uniform_int_distribution<int> dof(static_cast<int>(p) + 5, 200);
  std::vector<GroupSample> groups;
  for (std::size_t g = 0; g < k; ++g) groups.emplace_back(random_spd(rng, p), dof(rng));
  return SampleSet(std::move(groups));
}

}  // namespace propcov::testing
