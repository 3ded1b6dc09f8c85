#pragma once

// Independent numerical cross-checks for the closed forms in asymptotics.
//
// Nothing in the core library depends on this target. Dense inverses,
// factorizations and eigenvalues come from Eigen rather than from
// propcov::linalg, so a bug in the core linear algebra cannot validate itself.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "propcov/asymptotics.hpp"
#include "propcov/model.hpp"

namespace propcov::oracle {

struct FdSettings {
  double step = 1e-6;           // relative; scaled by max(1, |x|) per coordinate
  double symmetry_tol = 1e-5;   // FD Hessian asymmetry that raises StepTooLarge
  double stability_tol = 1e-4;  // step vs 2*step disagreement for fd_jacobian
};

// Gradient of −l/n₊ in the packed (c₂..c_K, B) coordinates.
Vector loglik_gradient(const CholInvParam& params, const SampleSet& data);

// Central-difference Hessian of −l/n₊ in the packed (c₂..c_K, B)
// coordinates, differencing the gradient. With Sₖ = cₖ A Aᵀ exactly this is
// the expected information.
Matrix fd_hessian_loglik(const CholInvParam& params, const SampleSet& data_at_expectation,
                         const FdSettings& fd = {});

using VectorMap = std::function<Vector(std::span<const double>)>;

Matrix fd_jacobian(const VectorMap& map, std::span<const double> at, const FdSettings& fd = {});

// Cholesky-based inverse (Eigen LLT).
SymMatrix numeric_inverse(const SymMatrix& m);
Matrix numeric_inverse(const Matrix& m);
double min_eigenvalue(const Matrix& m);

// Packed B ↦ packed A through Σ₁ = (B Bᵀ)⁻¹ and its Cholesky factor.
Vector a_from_b_packed(std::size_t p, std::span<const double> b_packed);
// Packed A ↦ packed Σ₁ = A Aᵀ.
Vector sigma_from_a_packed(std::size_t p, std::span<const double> a_packed);

// Sₖ = cₖ A Aᵀ with the given degrees of freedom.
SampleSet data_at_expectation(const CholRootParam& params, std::span<const int> dof);

// cov(s_ij, s_kl) = σ_ik σ_jl + σ_il σ_jk in the Σ₁ packing.
Matrix wishart_covariance(const SymMatrix& sigma);

// I₁₁ − I₁₂ I₂₂⁻¹ I₂₁ computed numerically from a full information matrix.
Matrix schur_complement(const Matrix& info, std::size_t coef_count);

// block-diag(I_{K−1}, J)
Matrix with_identity_block(const Matrix& j, std::size_t coef_count);

struct Instance {
  CholRootParam params;
  std::vector<int> dof;
  Vector weights;
};

// Random valid instance: diag(A) in [0.5, 2], off-diagonal A ~ N(0, 0.5²),
// cₖ in [0.3, 3], nₖ in [20, 200].
Instance random_instance(std::uint64_t seed, std::size_t p, std::size_t k);

// Each helper identity returns the largest discrepancy over every valid index
// combination for the given factor.
namespace identities {
double selector_picks_tail(const LowerTriangular& a);
double tail_dot_unit_is_entry(const LowerTriangular& a);
double sigma_column_from_a_columns(const LowerTriangular& a);
double unit_row_of_trailing(const LowerTriangular& a);
double selector_rows_of_trailing(const LowerTriangular& a);
double row_tail_times_corner(const LowerTriangular& a);
double row_tail_inner_product(const LowerTriangular& a);
double sigma_outer_expansion(const LowerTriangular& a);
double sigma_cross_expansion(const LowerTriangular& a);
double sigma_corner_split(const LowerTriangular& a);
double scaled_sigma_corner_split(const LowerTriangular& a);
double a_column_dot_b_column(const LowerTriangular& a);
double a_column_times_b_leading(const LowerTriangular& a);
}  // namespace identities

struct Check {
  std::string name;
  std::optional<asymptotics::ClosedForm> form;  // empty for helper identities
  double tolerance;
  std::size_t min_groups;
  std::function<double(const Instance&)> discrepancy;
};

const std::vector<Check>& registry();

struct CheckOutcome {
  std::string name;
  double max_discrepancy = 0.0;
  double tolerance = 0.0;
  int instances = 0;
  bool passed = true;
};

// Runs every registered check over `instances` seeded random instances with
// p cycling through 1..5 and K through 2, 3, 4, 1 (every pair within 20).
std::vector<CheckOutcome> run_registry(std::uint64_t seed, int instances);

}  // namespace propcov::oracle
