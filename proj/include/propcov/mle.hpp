#pragma once

// Maximum-likelihood fit of the proportional covariance model by
// alternating exact block maximization ("flip-flop"):
//
//   Σ₁ ← Σₖ rₖ Sₖ / cₖ            (maximizer over Σ₁ for fixed c)
//   cₖ ← tr(Σ₁⁻¹ Sₖ) / p, k ≥ 2    (maximizer over c for fixed Σ₁)
//
// starting from c = 1 (pooled covariance). Each half-step maximizes the
// log-likelihood in its block, so the objective never decreases.

#include <vector>

#include "propcov/model.hpp"

namespace propcov::mle {

struct FitOptions {
  double tol = 1e-10;
  int max_iter = 500;
};

struct FitResult {
  CovParam params;
  CholRootParam root;
  CholInvParam inv;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  // Log-likelihood at the initializer followed by one entry per iteration.
  std::vector<double> loglik_trace;
};

// l(c, B) = n₊ Σᵢ log bᵢᵢ − Σₖ (nₖ/2) {p log cₖ + (1/cₖ) Σᵢ bᵢᵀ Sₖ bᵢ},
// constant terms dropped.
double loglik(const CholInvParam& params, const SampleSet& data);
double loglik(const CovParam& params, const SampleSet& data);

Coefficients update_c(const SymMatrix& sigma1, const SampleSet& data);
SymMatrix update_sigma(const Coefficients& c, const SampleSet& data);

// Non-convergence is reported through FitResult::converged, not thrown.
FitResult fit(const SampleSet& data, const FitOptions& opts = {});

}  // namespace propcov::mle
