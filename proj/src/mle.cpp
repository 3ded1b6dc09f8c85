#include "propcov/mle.hpp"

#include <algorithm>
#include <cmath>

#include "propcov/errors.hpp"

namespace propcov::mle {

namespace {

void require_compatible(const Coefficients& c, std::size_t p, const SampleSet& data) {
  if (c.size() != data.groups()) {
    throw DimensionMismatch("coefficient vector has " + std::to_string(c.size()) +
                            " entries for " + std::to_string(data.groups()) + " groups");
  }
  if (p != data.dim()) throw DimensionMismatch("parameter dimension differs from data");
}

double relative_change(const Coefficients& c_old, const Coefficients& c_new,
                       const SymMatrix& s_old, const SymMatrix& s_new) {
  double change = 0.0;
  for (std::size_t k = 1; k < c_old.size(); ++k)
    change = std::max(change, std::abs(c_new[k] - c_old[k]) / std::max(1.0, std::abs(c_old[k])));
  const double scale = std::max(linalg::max_abs(s_old.matrix()), 1e-300);
  change = std::max(change, linalg::max_abs_diff(s_old.matrix(), s_new.matrix()) / scale);
  return change;
}

}  // namespace

double loglik(const CholInvParam& params, const SampleSet& data) {
  const std::size_t p = params.B.dim();
  require_compatible(params.c, p, data);
  if (!params.B.has_positive_diagonal()) {
    throw NotPositiveDefinite("loglik: B must have a positive diagonal");
  }
  double log_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) log_diag += std::log(params.B(i, i));

  // Σᵢ bᵢᵀ Sₖ bᵢ = tr(Bᵀ Sₖ B) = tr(Sₖ B Bᵀ)
  const SymMatrix precision = linalg::gram(params.B);
  double l = static_cast<double>(data.n_plus()) * log_diag;
  for (std::size_t k = 0; k < data.groups(); ++k) {
    const double ck = params.c[k];
    const double quad = linalg::trace_of_product(precision, data[k].S);
    l -= 0.5 * data[k].n * (static_cast<double>(p) * std::log(ck) + quad / ck);
  }
  return l;
}

double loglik(const CovParam& params, const SampleSet& data) {
  return loglik(to_inv(to_root(params)), data);
}

Coefficients update_c(const SymMatrix& sigma1, const SampleSet& data) {
  if (sigma1.dim() != data.dim()) throw DimensionMismatch("update_c: dimension mismatch");
  const SymMatrix precision = linalg::sym_inverse(sigma1);
  const double p = static_cast<double>(data.dim());
  Vector c(data.groups(), 1.0);
  for (std::size_t k = 1; k < data.groups(); ++k)
    c[k] = linalg::trace_of_product(precision, data[k].S) / p;
  return Coefficients(std::move(c));
}

SymMatrix update_sigma(const Coefficients& c, const SampleSet& data) {
  require_compatible(c, data.dim(), data);
  const std::size_t p = data.dim();
  const Vector& r = data.weights();
  Matrix pooled(p, p);
  for (std::size_t k = 0; k < data.groups(); ++k) pooled += (r[k] / c[k]) * data[k].S.matrix();
  return SymMatrix(pooled);
}

FitResult fit(const SampleSet& data, const FitOptions& opts) {
  if (!(opts.tol > 0.0) || opts.max_iter < 1) {
    throw InvalidArgument("fit: tol must be positive and max_iter >= 1");
  }

  Coefficients c = Coefficients::ones(data.groups());
  SymMatrix sigma = update_sigma(c, data);
  double ll = loglik(CovParam{c, sigma}, data);

  FitResult result{CovParam{c, sigma}, {c, {}}, {c, {}}, ll, 0, false, {ll}};

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    Coefficients c_next = update_c(sigma, data);
    SymMatrix sigma_next = update_sigma(c_next, data);
    const double ll_next = loglik(CovParam{c_next, sigma_next}, data);

    const double change = relative_change(c, c_next, sigma, sigma_next);
    const double gain = ll_next - ll;

    c = std::move(c_next);
    sigma = std::move(sigma_next);
    ll = ll_next;
    result.loglik_trace.push_back(ll);
    result.iterations = iter;

    if (change < opts.tol && gain < opts.tol * std::max(1.0, std::abs(ll))) {
      result.converged = true;
      break;
    }
  }

  result.params = CovParam{c, sigma};
  result.root = to_root(result.params);
  result.inv = to_inv(result.root);
  result.loglik = ll;
  return result;
}

}  // namespace propcov::mle
