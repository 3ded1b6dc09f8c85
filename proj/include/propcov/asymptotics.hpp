#pragma once

// Closed-form information matrix and asymptotic covariance matrices of the
// maximum-likelihood estimators in the three parametrizations.
//
// Everything here is per unit n₊: √n₊ (θ̂ − θ) → N(0, V). Divide by n₊ to get
// the finite-sample covariance (see standard_errors).
//
// Block conventions follow model.hpp: the free coefficients (c₂..c_K) come
// first, then the column blocks of B, A or Σ₁. "weights" is the full vector
// r = (r₁, …, r_K), rₖ = nₖ/n₊.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "propcov/model.hpp"

namespace propcov::asymptotics {

// d = {1 − (1+p) r₁} / (2 p r₁), e = (1 − r₁) / (2 p r₁)
double d_coefficient(double r1, std::size_t p);
double e_coefficient(double r1, std::size_t p);

struct InfoMatrix {
  Matrix matrix;
  ParamIndexMap index;  // always the (c, B) ordering
};

struct AsymptoticCov {
  Matrix matrix;
  ParamIndexMap index;
  Parametrization tag;
};

// Expected information per unit n₊ for (c₂..c_K, B), evaluated at (c, A).
InfoMatrix information_cb(const CholRootParam& params, std::span<const double> weights);

// Diagonal block of the B-part of the information for column block `block`
// (order block+1): a_ii² e eᵀ + Aᵢ Aᵢᵀ, and its closed-form inverse
// Bᵢ Bᵢᵀ − ½ b bᵀ.
Matrix i22_block(const LowerTriangular& a, std::size_t block);
Matrix i22_block_inverse(const LowerTriangular& a, std::size_t block);

// Schur complement of the B-part in the information: the inverse of the
// marginal covariance of ĉ. KTooSmall for K < 2.
Matrix u11(const Coefficients& c, std::span<const double> weights, std::size_t p);
// Asymptotic covariance of ĉ. Independent of Σ₁.
Matrix v11(const Coefficients& c, std::span<const double> weights, std::size_t p);

// (c, B) parametrization.
Matrix v12_cb(const Coefficients& c, const UpperTriangular& b, std::span<const double> weights);
Matrix v22_cb(const UpperTriangular& b, std::span<const double> weights);

// ∂a/∂b in packed coordinates: rows follow the A packing, columns the B
// packing. Block upper triangular.
Matrix jacobian_a_wrt_b(const LowerTriangular& a);

// (c, A) parametrization.
Matrix v12_ca(const Coefficients& c, const LowerTriangular& a, std::span<const double> weights);
Matrix v22_ca(const LowerTriangular& a, std::span<const double> weights);

// ∂σ/∂a in packed coordinates. Block lower triangular.
Matrix jacobian_sigma_wrt_a(const LowerTriangular& a);

// (c, Σ₁) parametrization; Σ₁ is formed from A so every slice comes from
// the same factor.
Matrix v12_csigma(const Coefficients& c, const LowerTriangular& a,
                  std::span<const double> weights);
Matrix v22_csigma(const LowerTriangular& a, std::span<const double> weights);

// Full symmetric V in the requested parametrization. For K = 1 only the
// matrix block is present. Throws NotPositiveSemidefinite if a diagonal
// entry is below −1e-10.
AsymptoticCov assemble_v(const CholRootParam& params, std::span<const double> weights,
                         Parametrization tag);

// sqrt(diag(V) / n₊)
Vector standard_errors(const AsymptoticCov& v, double n_plus);

// Every closed form that must be paired with an independent numerical check.
enum class ClosedForm {
  InformationCB,
  I22BlockInverse,
  U11Schur,
  V11,
  V12CB,
  V22CB,
  JacobianAB,
  V12CA,
  V22CA,
  JacobianSigmaA,
  V12CSigma,
  V22CSigma,
  HomogeneitySimplified,
};

const std::vector<ClosedForm>& closed_forms();
std::string name(ClosedForm form);

}  // namespace propcov::asymptotics
