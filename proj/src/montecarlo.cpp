#include "propcov/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "propcov/errors.hpp"
#include "propcov/inference.hpp"

#ifdef PROPCOV_HAVE_OPENMP
#include <omp.h>
#endif

namespace propcov::montecarlo {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Runs body(i) for i in [0, n) on the requested execution path. The body
// must only write to its own slot.
template <typename Body>
void for_each_replication(int n, Execution execution, Body&& body) {
  if (execution == Execution::Serial) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef PROPCOV_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) body(i);
#else
  for (int i = 0; i < n; ++i) body(i);
#endif
}

void check_failures(int failed, int total) {
  if (failed > kMaxFailureFraction * total) {
    throw NotConverged("simulation aborted: " + std::to_string(failed) + " of " +
                       std::to_string(total) + " fits failed");
  }
}

Vector true_vector(const SimConfig& cfg) {
  const CholRootParam root = to_root(cfg.truth);
  switch (cfg.tag) {
    case Parametrization::CholInv: return pack(to_inv(root));
    case Parametrization::CholRoot: return pack(root);
    case Parametrization::Cov: return pack(cfg.truth);
  }
  return {};
}

Vector estimate_vector(const mle::FitResult& f, Parametrization tag) {
  switch (tag) {
    case Parametrization::CholInv: return pack(f.inv);
    case Parametrization::CholRoot: return pack(f.root);
    case Parametrization::Cov: return pack(f.params);
  }
  return {};
}

std::vector<int> dof(const SimConfig& cfg) {
  std::vector<int> n(cfg.sample_sizes.size());
  for (std::size_t k = 0; k < n.size(); ++k) n[k] = cfg.sample_sizes[k] - 1;
  return n;
}

}  // namespace

Rng stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed ^ (0x632be59bd9b4e019ULL * (index + 1));
  const std::uint64_t a = splitmix64(state);
  const std::uint64_t b = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

SymMatrix sample_wishart(const LowerTriangular& root, int n, Rng& rng) {
  const std::size_t p = root.dim();
  if (n < 1 || static_cast<std::size_t>(n) < p) {
    throw InvalidArgument("sample_wishart: need n >= p (n = " + std::to_string(n) +
                          ", p = " + std::to_string(p) + ")");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix bartlett(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi2(static_cast<double>(n - static_cast<int>(i)));
    bartlett(i, i) = std::sqrt(chi2(rng));
    for (std::size_t j = 0; j < i; ++j) bartlett(i, j) = normal(rng);
  }
  const Matrix f = root.matrix() * bartlett;
  Matrix s = f * f.transpose();
  s *= 1.0 / n;
  return SymMatrix(s);
}

SymMatrix sample_wishart(const SymMatrix& sigma, int n, Rng& rng) {
  return sample_wishart(linalg::cholesky_lower(sigma), n, rng);
}

void validate(const SimConfig& cfg) {
  const std::size_t k = cfg.truth.c.size();
  const std::size_t p = cfg.truth.Sigma1.dim();
  if (cfg.sample_sizes.size() != k) {
    throw InvalidArgument("simulation: " + std::to_string(cfg.sample_sizes.size()) +
                          " sample sizes for " + std::to_string(k) + " groups");
  }
  for (int nk : cfg.sample_sizes)
    if (nk <= static_cast<int>(p)) throw InvalidArgument("simulation: every N_k must exceed p");
  if (cfg.replications < 100) throw InvalidArgument("simulation: need at least 100 replications");
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw InvalidArgument("simulation: alpha in [0, 1]");
  (void)linalg::cholesky_lower(cfg.truth.Sigma1);
}

SampleSet draw_samples(const SimConfig& cfg, std::uint64_t index) {
  Rng rng = stream(cfg.seed, index);
  const LowerTriangular root = linalg::cholesky_lower(cfg.truth.Sigma1);
  std::vector<GroupSample> groups;
  groups.reserve(cfg.sample_sizes.size());
  for (std::size_t k = 0; k < cfg.sample_sizes.size(); ++k) {
    const int n = cfg.sample_sizes[k] - 1;
    Matrix scaled_root = std::sqrt(cfg.truth.c[k]) * root.matrix();
    groups.emplace_back(sample_wishart(LowerTriangular(scaled_root), n, rng), n);
  }
  return SampleSet(std::move(groups));
}

Matrix empirical_covariance(std::span<const Vector> draws) {
  if (draws.size() < 2) throw InvalidArgument("empirical_covariance: need two draws");
  const std::size_t q = draws.front().size();
  Vector mean(q, 0.0);
  for (const Vector& d : draws)
    for (std::size_t i = 0; i < q; ++i) mean[i] += d[i];
  for (double& m : mean) m /= static_cast<double>(draws.size());
  Matrix cov(q, q);
  for (const Vector& d : draws)
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j <= i; ++j) cov(i, j) += (d[i] - mean[i]) * (d[j] - mean[j]);
  const double denom = static_cast<double>(draws.size() - 1);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
  return cov;
}

CovarianceStudy run_covariance_study(const SimConfig& cfg) {
  validate(cfg);
  const std::vector<int> n = dof(cfg);
  const Vector weights = weights_from_dof(n);
  double n_plus = 0.0;
  for (int v : n) n_plus += v;
  const double root_n = std::sqrt(n_plus);
  const Vector theta = true_vector(cfg);

  std::vector<std::optional<Vector>> slots(cfg.replications);
  for_each_replication(cfg.replications, cfg.execution, [&](int i) {
    try {
      const SampleSet data = draw_samples(cfg, static_cast<std::uint64_t>(i));
      const mle::FitResult f = mle::fit(data, cfg.fit);
      if (!f.converged) return;
      Vector dev = estimate_vector(f, cfg.tag);
      for (std::size_t j = 0; j < dev.size(); ++j) dev[j] = root_n * (dev[j] - theta[j]);
      slots[i] = std::move(dev);
    } catch (const Error&) {
      // counted as a failed fit below
    }
  });

  std::vector<Vector> draws;
  draws.reserve(slots.size());
  for (auto& s : slots)
    if (s) draws.push_back(std::move(*s));

  CovarianceStudy out;
  out.tag = cfg.tag;
  out.replications = cfg.replications;
  out.failed_fits = cfg.replications - static_cast<int>(draws.size());
  check_failures(out.failed_fits, cfg.replications);

  out.empirical = empirical_covariance(draws);
  out.theoretical = asymptotics::assemble_v(to_root(cfg.truth), weights, cfg.tag).matrix;

  const std::size_t q = out.theoretical.rows();
  const double vmax = linalg::max_abs(out.theoretical);
  out.relative_error = Matrix(q, q);
  out.compared.assign(q, std::vector<bool>(q, false));
  double diff2 = 0.0;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      const double v = out.theoretical(i, j);
      const double diff = out.empirical(i, j) - v;
      diff2 += diff * diff;
      norm2 += v * v;
      if (std::abs(v) > 0.05 * vmax) {
        out.compared[i][j] = true;
        out.relative_error(i, j) = std::abs(diff) / std::abs(v);
        out.max_relative_error = std::max(out.max_relative_error, out.relative_error(i, j));
      }
    }
  }
  out.frobenius_error = std::sqrt(diff2 / norm2);
  return out;
}

LevelStudy run_level_study(const SimConfig& cfg) {
  validate(cfg);
  for (double c : cfg.truth.c.full())
    if (c != 1.0) throw InvalidArgument("level study: true coefficients must all equal 1");
  if (cfg.truth.c.size() < 2) throw KTooSmall("level study needs at least two groups");

  std::vector<std::optional<double>> slots(cfg.replications);
  for_each_replication(cfg.replications, cfg.execution, [&](int i) {
    try {
      const SampleSet data = draw_samples(cfg, static_cast<std::uint64_t>(i));
      const mle::FitResult f = mle::fit(data, cfg.fit);
      if (!f.converged) return;
      slots[i] = inference::homogeneity_test(f, data).p_value;
    } catch (const Error&) {
    }
  });

  LevelStudy out;
  out.alpha = cfg.alpha;
  out.replications = cfg.replications;
  for (const auto& s : slots)
    if (s) out.p_values.push_back(*s);
  out.failed_fits = cfg.replications - static_cast<int>(out.p_values.size());
  check_failures(out.failed_fits, cfg.replications);

  const double used = static_cast<double>(out.p_values.size());
  const auto rejected = std::count_if(out.p_values.begin(), out.p_values.end(),
                                      [&](double pv) { return pv < cfg.alpha || cfg.alpha >= 1.0; });
  out.rejection_rate = static_cast<double>(rejected) / used;
  out.standard_error = std::sqrt(cfg.alpha * (1.0 - cfg.alpha) / used);
  out.ci_low = std::max(0.0, cfg.alpha - 3.0 * out.standard_error);
  out.ci_high = std::min(1.0, cfg.alpha + 3.0 * out.standard_error);
  const KsResult ks = ks_uniform(out.p_values);
  out.ks_statistic = ks.statistic;
  out.ks_p_value = ks.p_value;
  return out;
}

// --- Kolmogorov–Smirnov -------------------------------------------------------

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  // Small lambda: the alternating series converges slowly; use the dual
  // theta-function form instead.
  if (lambda < 1.18) {
    const double y = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
    double s = 0.0;
    for (int k = 1; k < 50; k += 2) s += std::pow(y, k * k);
    return 1.0 - std::sqrt(2.0 * M_PI) / lambda * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_uniform(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("ks_uniform: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double u = std::clamp(values[i], 0.0, 1.0);
    d = std::max({d, (i + 1) / n - u, u - i / n});
  }
  const double root_n = std::sqrt(n);
  // Stephens' finite-sample correction.
  const double lambda = (root_n + 0.12 + 0.11 / root_n) * d;
  return {d, kolmogorov_sf(lambda)};
}

}  // namespace propcov::montecarlo
