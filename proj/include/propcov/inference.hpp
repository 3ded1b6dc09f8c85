#pragma once

// Test of H₀: c₂ = … = c_K = 1 (homogeneity of the K covariance matrices
// within the proportional model).

#include <cstddef>
#include <span>

#include "propcov/mle.hpp"
#include "propcov/model.hpp"

namespace propcov::inference {

struct TestReport {
  double statistic = 0.0;       // simplified closed form (reported value)
  double quadratic_form = 0.0;  // n₊ (ĉ−1)ᵀ Û₁₁ (ĉ−1), kept as a cross-check
  int df = 0;
  double p_value = 1.0;
  Coefficients c_hat = Coefficients::ones(1);
  double form_check = 0.0;      // |statistic − quadratic_form|
};

// Evaluates the statistic both ways at ĉ with weights r and total degrees of
// freedom n₊. KTooSmall for K < 2.
TestReport homogeneity_statistic(const Coefficients& c_hat, std::span<const double> weights,
                                 double n_plus, std::size_t p);

// Same, from a fit. NotConverged if the fit did not converge.
TestReport homogeneity_test(const mle::FitResult& fit, const SampleSet& data);

// Upper tail of χ²(df): Q(df/2, x/2). InvalidArgument for x < 0 or df < 1.
double chi_square_sf(double x, int df);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 − P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

}  // namespace propcov::inference
