#include "propcov/inference.hpp"

#include <cmath>
#include <limits>

#include "propcov/asymptotics.hpp"
#include "propcov/errors.hpp"

namespace propcov::inference {

TestReport homogeneity_statistic(const Coefficients& c_hat, std::span<const double> weights,
                                 double n_plus, std::size_t p) {
  const std::size_t k = c_hat.size();
  if (k < 2) throw KTooSmall("homogeneity test needs at least two groups");
  if (weights.size() != k) throw DimensionMismatch("homogeneity test: weights length");
  if (!(n_plus > 0.0)) throw InvalidArgument("homogeneity test: n_plus must be positive");

  // (n₊ p / 2) [Σₖ rₖ/ĉₖ² − (Σₖ rₖ/ĉₖ)²], ĉ₁ = 1
  double sum_inv = 0.0;
  double sum_inv2 = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    const double inv = 1.0 / c_hat[g];
    sum_inv += weights[g] * inv;
    sum_inv2 += weights[g] * inv * inv;
  }
  const double simplified =
      0.5 * n_plus * static_cast<double>(p) * (sum_inv2 - sum_inv * sum_inv);

  Vector dev(k - 1);
  for (std::size_t g = 1; g < k; ++g) dev[g - 1] = c_hat[g] - 1.0;
  const Matrix u = asymptotics::u11(c_hat, weights, p);
  const double quad = n_plus * linalg::quadratic_form(u, dev);

  TestReport report;
  // The variance-like bracket is nonnegative; clamp round-off below zero.
  report.statistic = std::max(0.0, simplified);
  report.quadratic_form = quad;
  report.df = static_cast<int>(k - 1);
  report.p_value = chi_square_sf(report.statistic, report.df);
  report.c_hat = c_hat;
  report.form_check = std::abs(simplified - quad);
  return report;
}

TestReport homogeneity_test(const mle::FitResult& fit, const SampleSet& data) {
  if (!fit.converged) throw NotConverged("homogeneity test requires a converged fit");
  return homogeneity_statistic(fit.params.c, data.weights(), static_cast<double>(data.n_plus()),
                               data.dim());
}

// --- incomplete gamma -------------------------------------------------------

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 10000;

// P(a, x) by its power series; good for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the Legendre continued fraction (modified Lentz); x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw InvalidArgument("incomplete gamma: shape must be positive");
  if (!(x >= 0.0)) throw InvalidArgument("incomplete gamma: x must be nonnegative");
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double chi_square_sf(double x, int df) {
  if (!(x >= 0.0)) throw InvalidArgument("chi_square_sf: x must be nonnegative");
  if (df < 1) throw InvalidArgument("chi_square_sf: df must be >= 1");
  return gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace propcov::inference
