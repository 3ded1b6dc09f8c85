#pragma once

// Wishart sampling and simulation studies that check the asymptotic
// covariance formulas and the size of the homogeneity test.
//
// Each replication draws from its own generator, seeded from
// (seed, replication index), and writes its result into a slot indexed by
// the replication. Aggregation happens afterwards in index order, so the
// serial and the OpenMP execution paths give bit-identical reports for any
// thread count.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "propcov/asymptotics.hpp"
#include "propcov/mle.hpp"
#include "propcov/model.hpp"

namespace propcov::montecarlo {

using Rng = std::mt19937_64;

// Independent stream for replication `index` of a study seeded with `seed`.
Rng stream(std::uint64_t seed, std::uint64_t index);

// S ~ W_p(Σ, n) / n via the Bartlett factorization: S = (1/n) A L Lᵀ Aᵀ with
// A = chol(Σ), L lower triangular, L_ii² ~ χ²(n − i) (0-based i) and
// standard normal entries below the diagonal. InvalidArgument if n < p.
SymMatrix sample_wishart(const SymMatrix& sigma, int n, Rng& rng);
SymMatrix sample_wishart(const LowerTriangular& sigma_root, int n, Rng& rng);

enum class Execution { Serial, Parallel };

struct SimConfig {
  CovParam truth;
  std::vector<int> sample_sizes;  // Nₖ; degrees of freedom nₖ = Nₖ − 1
  int replications = 1000;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  Parametrization tag = Parametrization::Cov;
  mle::FitOptions fit;
  Execution execution = Execution::Parallel;
};

// Throws InvalidArgument unless Nₖ > p, replications >= 100,
// 0 <= alpha <= 1 and group counts agree.
void validate(const SimConfig& cfg);

struct CovarianceStudy {
  Parametrization tag = Parametrization::Cov;
  Matrix empirical;    // covariance of √n₊ (θ̂ − θ)
  Matrix theoretical;  // closed form at the true parameters
  Matrix relative_error;
  std::vector<std::vector<bool>> compared;  // entries with |V| > 0.05 max|V|
  double max_relative_error = 0.0;
  double frobenius_error = 0.0;  // ‖V_emp − V‖_F / ‖V‖_F
  int replications = 0;
  int failed_fits = 0;
};

struct LevelStudy {
  double alpha = 0.05;
  double rejection_rate = 0.0;
  double standard_error = 0.0;  // binomial sqrt(α(1−α)/R) at the nominal level
  double ci_low = 0.0;          // α ± 3 standard errors
  double ci_high = 0.0;
  double ks_statistic = 0.0;    // p-value uniformity
  double ks_p_value = 1.0;
  int replications = 0;
  int failed_fits = 0;
  std::vector<double> p_values;
};

// Fraction of failed fits above which a study aborts.
inline constexpr double kMaxFailureFraction = 0.001;

CovarianceStudy run_covariance_study(const SimConfig& cfg);
LevelStudy run_level_study(const SimConfig& cfg);

// Draws the K sample covariances of one replication.
SampleSet draw_samples(const SimConfig& cfg, std::uint64_t index);

// Sample covariance (divisor R − 1) of the rows of `draws`.
Matrix empirical_covariance(std::span<const Vector> draws);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov–Smirnov test against U(0, 1).
KsResult ks_uniform(std::vector<double> values);
// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_sf(double lambda);

}  // namespace propcov::montecarlo
