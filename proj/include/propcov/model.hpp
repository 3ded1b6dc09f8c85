#pragma once

// Data and parameter containers for the proportional covariance model
// Σₖ = cₖ Σ₁ (k = 1..K, c₁ = 1), in three equivalent parametrizations:
//
//   CovParam       (c, Σ₁)
//   CholRootParam  (c, A)   Σ₁ = A Aᵀ, A lower triangular
//   CholInvParam   (c, B)   Σ₁⁻¹ = B Bᵀ, B = A⁻ᵀ upper triangular
//
// Parameter vectors put the free coefficients (c₂..c_K) first, followed by
// the p(p+1)/2 free entries of the triangular factor (or of Σ₁) packed as
// column blocks:
//
//   B:  column i, rows 1..i      (b₁ᵢ, …, bᵢᵢ)
//   A:  column i, rows i..p      (aᵢᵢ, …, a_pᵢ)
//   Σ₁: column i, rows i..p      (σᵢᵢ, …, σ_pᵢ)
//
// All indices in code are 0-based; group 0 is the reference group.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "propcov/linalg.hpp"

namespace propcov {

using linalg::LowerTriangular;
using linalg::Matrix;
using linalg::SymMatrix;
using linalg::UpperTriangular;
using linalg::Vector;

struct GroupSample {
  GroupSample(SymMatrix s, int n);

  SymMatrix S;  // unbiased covariance estimate
  int n;        // degrees of freedom, N - 1
};

class SampleSet {
 public:
  // Every S must be positive definite with n >= p; otherwise
  // NotPositiveDefinite. Mixed dimensions raise DimensionMismatch.
  explicit SampleSet(std::vector<GroupSample> groups);

  std::size_t groups() const { return groups_.size(); }
  std::size_t dim() const { return groups_.front().S.dim(); }
  const GroupSample& operator[](std::size_t k) const { return groups_[k]; }
  const std::vector<GroupSample>& all() const { return groups_; }

  long n_plus() const { return n_plus_; }
  // rₖ = nₖ / n₊
  const Vector& weights() const { return weights_; }

 private:
  std::vector<GroupSample> groups_;
  long n_plus_ = 0;
  Vector weights_;
};

// rₖ = nₖ / n₊ for raw degrees of freedom.
Vector weights_from_dof(std::span<const int> n);

class Coefficients {
 public:
  // Full-length vector; c[0] must be exactly 1 and all entries positive.
  explicit Coefficients(Vector full);
  static Coefficients ones(std::size_t k);
  static Coefficients from_free(std::span<const double> free);

  std::size_t size() const { return c_.size(); }
  double operator[](std::size_t k) const { return c_[k]; }
  const Vector& full() const { return c_; }
  // (c₂, …, c_K)
  Vector free() const { return Vector(c_.begin() + 1, c_.end()); }

  friend bool operator==(const Coefficients&, const Coefficients&) = default;

 private:
  Vector c_;
};

struct CholInvParam {
  Coefficients c;
  UpperTriangular B;
};

struct CholRootParam {
  Coefficients c;
  LowerTriangular A;
};

struct CovParam {
  Coefficients c;
  SymMatrix Sigma1;
};

enum class Parametrization { CholInv, CholRoot, Cov };

std::string to_string(Parametrization tag);
// Accepts "b", "a", "sigma" (and the long names); InvalidArgument otherwise.
Parametrization parse_parametrization(const std::string& s);

// Bᵀ = A⁻¹
UpperTriangular b_from_a(const LowerTriangular& a);
LowerTriangular a_from_b(const UpperTriangular& b);
SymMatrix sigma_from_a(const LowerTriangular& a);
LowerTriangular a_from_sigma(const SymMatrix& sigma1);

CholRootParam to_root(const CovParam& p);
CholRootParam to_root(const CholInvParam& p);
CholInvParam to_inv(const CholRootParam& p);
CovParam to_cov(const CholRootParam& p);

// Σₖ⁻¹ = (1/cₖ) B Bᵀ
SymMatrix group_precision(const CholInvParam& p, std::size_t k);
// Σₖ = cₖ A Aᵀ
SymMatrix group_covariance(const CholRootParam& p, std::size_t k);

std::size_t tri_size(std::size_t p);

Vector pack_b(const UpperTriangular& b);
UpperTriangular unpack_b(std::size_t p, std::span<const double> v);
Vector pack_a(const LowerTriangular& a);
LowerTriangular unpack_a(std::size_t p, std::span<const double> v);
Vector pack_sigma(const SymMatrix& s);
SymMatrix unpack_sigma(std::size_t p, std::span<const double> v);

// Full parameter vectors (c₂..c_K, triangular blocks).
Vector pack(const CholInvParam& p);
Vector pack(const CholRootParam& p);
Vector pack(const CovParam& p);
CholInvParam unpack_inv(std::size_t k, std::size_t p, std::span<const double> v);
CholRootParam unpack_root(std::size_t k, std::size_t p, std::span<const double> v);
CovParam unpack_cov(std::size_t k, std::size_t p, std::span<const double> v);

// Position of each parameter in the packed vector for a given
// parametrization.
class ParamIndexMap {
 public:
  struct Entry {
    bool is_coefficient;
    std::size_t group;  // valid when is_coefficient (1..K-1)
    std::size_t row;    // matrix entry otherwise
    std::size_t col;
  };

  ParamIndexMap(std::size_t k, std::size_t p, Parametrization tag);

  std::size_t groups() const { return k_; }
  std::size_t dim() const { return p_; }
  Parametrization tag() const { return tag_; }
  std::size_t size() const { return k_ - 1 + tri_size(p_); }
  std::size_t coef_count() const { return k_ - 1; }

  std::size_t coefficient(std::size_t group) const;
  // Index of matrix entry (row, col); DimensionMismatch for entries that are
  // structurally zero (or the redundant upper half of Σ₁).
  std::size_t entry(std::size_t row, std::size_t col) const;
  Entry at(std::size_t pos) const;

  // Offset and length of column block i within the packed vector.
  std::size_t block_offset(std::size_t i) const;
  std::size_t block_length(std::size_t i) const;

  // Human-readable 1-based label: "c2", "b[1,2]", "a[2,1]", "sigma[2,1]".
  std::string label(std::size_t pos) const;

  friend bool operator==(const ParamIndexMap&, const ParamIndexMap&) = default;

 private:
  std::size_t k_;
  std::size_t p_;
  Parametrization tag_;
};

}  // namespace propcov
