#include <cmath>

#include "doctest.h"
#include "propcov/errors.hpp"
#include "propcov/montecarlo.hpp"
#include "support.hpp"

#ifdef PROPCOV_HAVE_OPENMP
#include <omp.h>
#endif

using namespace propcov;
using namespace propcov::montecarlo;

namespace {

SimConfig config(Vector c, const SymMatrix& sigma, std::vector<int> sizes, int reps, std::uint64_t seed) {
  SimConfig cfg{CovParam{Coefficients(std::move(c)), sigma}, std::move(sizes)};
  cfg.replications = reps;
  cfg.seed = seed;
  return cfg;
}

const SymMatrix kSigma{{1.0, 0.5}, {0.5, 2.0}};

}  // namespace

TEST_CASE("sample_wishart moments") {
  Rng rng = stream(1, 0);
  const SymMatrix one{{1.0}};
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += sample_wishart(one, 1000, rng)(0, 0);
  CHECK(std::abs(sum / draws - 1.0) <= 0.02);

  // Elementwise mean within 4 standard errors; var(s_ij) = (σ_ij² + σ_ii σ_jj) / n.
  std::mt19937_64 g(2);
  const SymMatrix sigma = testing::random_spd(g, 3);
  const int n = 7;
  Matrix mean(3, 3);
  for (int i = 0; i < draws; ++i) mean += sample_wishart(sigma, n, rng).matrix();
  mean *= 1.0 / draws;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double var = (sigma(i, j) * sigma(i, j) + sigma(i, i) * sigma(j, j)) / n;
      CHECK(std::abs(mean(i, j) - sigma(i, j)) <= 4.0 * std::sqrt(var / draws));
    }
}

TEST_CASE("sample_wishart edge cases and determinism") {
  Rng rng = stream(3, 0);
  for (int i = 0; i < 1000; ++i) CHECK(sample_wishart(SymMatrix{{2.0}}, 1, rng)(0, 0) >= 0.0);
  CHECK_THROWS_AS(sample_wishart(SymMatrix::identity(3), 2, rng), InvalidArgument);

  Rng a = stream(99, 5);
  Rng b = stream(99, 5);
  CHECK(sample_wishart(kSigma, 10, a) == sample_wishart(kSigma, 10, b));
  Rng c = stream(99, 6);
  Rng d = stream(99, 5);
  CHECK_FALSE(sample_wishart(kSigma, 10, c) == sample_wishart(kSigma, 10, d));
}

TEST_CASE("empirical_covariance") {
  const std::vector<Vector> draws{{1.0, 2.0}, {3.0, 2.0}, {5.0, 8.0}};
  const Matrix cov = empirical_covariance(draws);
  CHECK(cov(0, 0) == doctest::Approx(4.0));
  CHECK(cov(1, 1) == doctest::Approx(12.0));
  CHECK(cov(0, 1) == doctest::Approx(6.0));
  CHECK(cov(1, 0) == cov(0, 1));
}

TEST_CASE("single-population covariance study") {
  SimConfig cfg = config({1.0}, SymMatrix{{1.7}}, {500}, 10000, 4);
  const CovarianceStudy s = run_covariance_study(cfg);
  const double want = 2.0 * 1.7 * 1.7;
  CHECK(s.theoretical(0, 0) == doctest::Approx(want));
  CHECK(std::abs(s.empirical(0, 0) - want) / want <= 0.10);
  CHECK(s.failed_fits == 0);
}

TEST_CASE("coefficient block is exchangeable under H0") {
  SimConfig cfg = config({1.0, 1.0, 1.0}, kSigma, {300, 300, 300}, 4000, 5);
  cfg.tag = Parametrization::CholRoot;
  const CovarianceStudy s = run_covariance_study(cfg);
  const double v22 = s.empirical(0, 0);
  const double v33 = s.empirical(1, 1);
  CHECK(std::abs(v22 - v33) / (0.5 * (v22 + v33)) <= 0.1);
}

TEST_CASE("p = 2, K = 3 covariance study in every parametrization") {
  for (auto tag : {Parametrization::CholInv, Parametrization::CholRoot, Parametrization::Cov}) {
    SimConfig cfg = config({1.0, 1.5, 0.7}, kSigma, {500, 500, 500}, 2000, 6);
    cfg.tag = tag;
    const CovarianceStudy s = run_covariance_study(cfg);
    CHECK(s.max_relative_error <= 0.15);
    CHECK(s.empirical.rows() == 2 + 3);
    CHECK(linalg::max_asymmetry(s.empirical) == 0.0);
  }
}

TEST_CASE("covariance error shrinks with sample size") {
  SimConfig small = config({1.0, 2.0}, kSigma, {200, 200}, 4000, 7);
  SimConfig large = config({1.0, 2.0}, kSigma, {2000, 2000}, 4000, 7);
  CHECK(run_covariance_study(large).frobenius_error <= run_covariance_study(small).frobenius_error);
}

TEST_CASE("level study") {
  SimConfig cfg = config({1.0, 1.0, 1.0}, kSigma, {500, 500, 500}, 5000, 8);
  const LevelStudy s = run_level_study(cfg);
  CHECK(s.rejection_rate >= 0.035);
  CHECK(s.rejection_rate <= 0.065);
  CHECK(s.ks_p_value >= 0.01);
  CHECK(s.ci_low == doctest::Approx(0.05 - 3.0 * std::sqrt(0.05 * 0.95 / 5000)));
  CHECK(s.p_values.size() == 5000);

  SimConfig zero = config({1.0, 1.0}, kSigma, {50, 50}, 100, 9);
  zero.alpha = 0.0;
  CHECK(run_level_study(zero).rejection_rate == 0.0);
  zero.alpha = 1.0;
  CHECK(run_level_study(zero).rejection_rate == 1.0);

  SimConfig alt = config({1.0, 2.0}, kSigma, {50, 50}, 100, 9);
  CHECK_THROWS_AS(run_level_study(alt), InvalidArgument);
  SimConfig single = config({1.0}, kSigma, {50}, 100, 9);
  CHECK_THROWS_AS(run_level_study(single), KTooSmall);
}

TEST_CASE("serial and parallel runs are bit-identical") {
#ifdef PROPCOV_HAVE_OPENMP
  omp_set_num_threads(4);
#endif
  SimConfig cfg = config({1.0, 1.5, 0.7}, kSigma, {100, 100, 100}, 500, 10);
  cfg.execution = Execution::Serial;
  const CovarianceStudy serial = run_covariance_study(cfg);
  cfg.execution = Execution::Parallel;
  const CovarianceStudy parallel = run_covariance_study(cfg);
  CHECK(serial.empirical == parallel.empirical);

  SimConfig lcfg = config({1.0, 1.0, 1.0}, kSigma, {100, 100, 100}, 500, 11);
  lcfg.execution = Execution::Serial;
  const LevelStudy ls = run_level_study(lcfg);
  lcfg.execution = Execution::Parallel;
  const LevelStudy lp = run_level_study(lcfg);
  CHECK(ls.p_values == lp.p_values);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(validate(config({1.0, 2.0}, kSigma, {100}, 100, 1)), InvalidArgument);
  CHECK_THROWS_AS(validate(config({1.0}, kSigma, {2}, 100, 1)), InvalidArgument);
  CHECK_THROWS_AS(validate(config({1.0}, kSigma, {100}, 99, 1)), InvalidArgument);
  SimConfig bad_alpha = config({1.0}, kSigma, {100}, 100, 1);
  bad_alpha.alpha = 1.5;
  CHECK_THROWS_AS(validate(bad_alpha), InvalidArgument);
  CHECK_NOTHROW(validate(config({1.0}, kSigma, {3}, 100, 1)));
}

TEST_CASE("Kolmogorov-Smirnov") {
  CHECK(kolmogorov_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_sf(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(kolmogorov_sf(0.0) == 1.0);
  // The two evaluation branches meet smoothly.
  CHECK(kolmogorov_sf(1.18 - 1e-12) == doctest::Approx(kolmogorov_sf(1.18)).epsilon(1e-9));

  std::vector<double> even;
  for (int i = 0; i < 1000; ++i) even.push_back((i + 0.5) / 1000.0);
  const KsResult good = ks_uniform(even);
  CHECK(good.statistic == doctest::Approx(0.0005));
  CHECK(good.p_value > 0.99);

  std::vector<double> skewed;
  for (int i = 0; i < 1000; ++i) skewed.push_back(std::pow((i + 0.5) / 1000.0, 2.0));
  CHECK(ks_uniform(skewed).p_value < 1e-6);
}
