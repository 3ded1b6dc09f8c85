#pragma once

// Subcommands of the propcov tool. Each report is a JSON value whose numbers
// are already rounded to 12 significant digits, so parse(dump(report)) ==
// report; the text format is rendered from the same value.
//
// Exit codes:
//   0  success
//   1  a validation check or a simulation failed
//   2  usage or parse error (bad flags, malformed or inconsistent input)
//   3  input matrix not symmetric positive definite (or n < p)
//   4  maximum-likelihood iteration did not converge
//   5  fewer than two groups where the command needs K >= 2

#include <iosfwd>
#include <optional>
#include <string>

#include "io.hpp"
#include "propcov/mle.hpp"
#include "propcov/montecarlo.hpp"

namespace propcov::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kParseError = 2,
  kNotPositiveDefinite = 3,
  kNotConverged = 4,
  kTooFewGroups = 5,
};

json estimate_report(const InputDocument& doc, const SampleSet& data, const mle::FitResult& fit,
                     std::optional<Parametrization> cov);
std::string render_estimate(const json& report);

json test_report(const SampleSet& data, const mle::FitResult& fit, double level);
std::string render_test(const json& report);

struct SimOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<double> level;
  std::optional<Parametrization> tag;
  std::optional<double> tol;
  std::optional<int> max_iter;
};

// Builds a SimConfig from a simulation config document:
//   {"study": "covariance" | "level", "c": [...], "sigma1": [[...]],
//    "sample_sizes": [...], "replications": R, "seed": s, "alpha": a,
//    "parametrization": "b" | "a" | "sigma", "execution": "serial" | "parallel"}
struct SimRequest {
  std::string study;
  montecarlo::SimConfig config;
};
SimRequest parse_sim_config(const std::string& text, const SimOverrides& overrides);

json simulate_report(const SimRequest& request);
std::string render_simulate(const json& report);

json validate_report(std::uint64_t seed, int instances);
std::string render_validate(const json& report);

// Entry point; stdout carries the report, stderr diagnostics only.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace propcov::cli
