#include "commands.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "propcov/asymptotics.hpp"
#include "propcov/errors.hpp"
#include "propcov/inference.hpp"
#include "propcov/oracle.hpp"

namespace propcov::cli {

namespace {

std::vector<std::string> group_labels(const InputDocument& doc) {
  if (!doc.labels.empty()) return doc.labels;
  std::vector<std::string> out;
  for (std::size_t k = 0; k < doc.n.size(); ++k) out.push_back("group" + std::to_string(k + 1));
  return out;
}

void render_matrix(std::ostringstream& os, const json& m, const std::string& indent) {
  for (const auto& row : m) {
    os << indent;
    for (const auto& x : row) {
      const std::string s = x.is_null() ? "nan" : fmt6(x.get<double>());
      os << std::string(s.size() < 12 ? 12 - s.size() : 1, ' ') << s;
    }
    os << '\n';
  }
}

std::string num6(const json& x) { return x.is_null() ? "nan" : fmt6(x.get<double>()); }

}  // namespace

// --- estimate ------------------------------------------------------------------

json estimate_report(const InputDocument& doc, const SampleSet& data, const mle::FitResult& fit,
                     std::optional<Parametrization> cov) {
  const std::size_t k = data.groups();
  const double n_plus = static_cast<double>(data.n_plus());
  json r;
  r["command"] = "estimate";
  r["groups"] = k;
  r["p"] = data.dim();
  r["labels"] = group_labels(doc);
  r["n"] = doc.n;
  r["n_plus"] = data.n_plus();
  r["converged"] = fit.converged;
  r["iterations"] = fit.iterations;
  r["loglik"] = number(fit.loglik);
  r["c"] = vector_json(fit.params.c.full());
  if (k >= 2) {
    const Matrix v11 = asymptotics::v11(fit.params.c, data.weights(), data.dim());
    Vector se(k - 1);
    for (std::size_t g = 0; g + 1 < k; ++g) se[g] = std::sqrt(v11(g, g) / n_plus);
    r["c_se"] = vector_json(se);
  } else {
    r["c_se"] = json::array();
  }
  r["sigma1"] = matrix_json(fit.params.Sigma1.matrix());
  r["A"] = matrix_json(fit.root.A.matrix());
  r["B"] = matrix_json(fit.inv.B.matrix());
  if (cov) {
    const asymptotics::AsymptoticCov v = asymptotics::assemble_v(fit.root, data.weights(), *cov);
    json c;
    c["parametrization"] = to_string(*cov);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < v.index.size(); ++i) labels.push_back(v.index.label(i));
    c["labels"] = labels;
    c["V"] = matrix_json(v.matrix);
    c["standard_errors"] = vector_json(asymptotics::standard_errors(v, n_plus));
    r["covariance"] = c;
  }
  return r;
}

std::string render_estimate(const json& r) {
  std::ostringstream os;
  os << "groups: " << r["groups"].get<int>() << "  p: " << r["p"].get<int>()
     << "  n+: " << r["n_plus"].get<long>() << '\n';
  os << "converged: " << (r["converged"].get<bool>() ? "yes" : "NO") << " after "
     << r["iterations"].get<int>() << " iterations\n";
  os << "log-likelihood: " << num6(r["loglik"]) << '\n';
  os << "proportionality coefficients:\n";
  const auto& labels = r["labels"];
  for (std::size_t g = 0; g < r["c"].size(); ++g) {
    os << "  c" << g + 1 << " (" << labels[g].get<std::string>() << ")  " << num6(r["c"][g]);
    if (g == 0) {
      os << "  reference";
    } else {
      os << "  se " << num6(r["c_se"][g - 1]);
    }
    os << '\n';
  }
  os << "Sigma1:\n";
  render_matrix(os, r["sigma1"], "  ");
  os << "A (Sigma1 = A A'):\n";
  render_matrix(os, r["A"], "  ");
  os << "B (inverse Sigma1 = B B'):\n";
  render_matrix(os, r["B"], "  ");
  if (r.contains("covariance")) {
    const auto& c = r["covariance"];
    os << "asymptotic covariance V(c, " << c["parametrization"].get<std::string>()
       << "), per unit n+:\n";
    os << "  order:";
    for (const auto& l : c["labels"]) os << ' ' << l.get<std::string>();
    os << '\n';
    render_matrix(os, c["V"], "  ");
    os << "standard errors:\n";
    for (std::size_t i = 0; i < c["labels"].size(); ++i)
      os << "  " << c["labels"][i].get<std::string>() << "  " << num6(c["standard_errors"][i]) << '\n';
  }
  return os.str();
}

// --- test ----------------------------------------------------------------------

json test_report(const SampleSet& data, const mle::FitResult& fit, double level) {
  const inference::TestReport t = inference::homogeneity_test(fit, data);
  json r;
  r["command"] = "test";
  r["statistic"] = number(t.statistic);
  r["quadratic_form"] = number(t.quadratic_form);
  r["form_check"] = number(t.form_check);
  r["df"] = t.df;
  r["p_value"] = number(t.p_value);
  r["level"] = number(level);
  r["reject"] = t.p_value < level;
  r["c_hat"] = vector_json(t.c_hat.full());
  return r;
}

std::string render_test(const json& r) {
  std::ostringstream os;
  os << "homogeneity test of c2 = ... = cK = 1\n";
  os << "  statistic: " << num6(r["statistic"]) << "  df: " << r["df"].get<int>()
     << "  p-value: " << num6(r["p_value"]) << '\n';
  os << "  dual-form residual: " << num6(r["form_check"]) << '\n';
  os << "  at level " << num6(r["level"]) << ": "
     << (r["reject"].get<bool>() ? "reject" : "do not reject") << '\n';
  return os.str();
}

// --- simulate ------------------------------------------------------------------

SimRequest parse_sim_config(const std::string& text, const SimOverrides& o) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("malformed simulation config", line, col);
  }
  if (!doc.is_object()) throw ParseError("simulation config: expected an object");
  for (const char* key : {"c", "sigma1", "sample_sizes"})
    if (!doc.contains(key)) throw ParseError(std::string("simulation config: missing \"") + key + "\"");

  const Vector c = vector_from_json(doc["c"], "c");
  const Matrix sigma = matrix_from_json(doc["sigma1"], "sigma1");
  std::vector<int> sizes;
  for (const auto& v : doc["sample_sizes"]) {
    if (!v.is_number_integer()) throw ParseError("sample_sizes: expected integers");
    sizes.push_back(v.get<int>());
  }

  montecarlo::SimConfig defaults{CovParam{Coefficients(c), SymMatrix(sigma)}, sizes, 1000, 1, 0.05,
                                 Parametrization::Cov, mle::FitOptions{}, montecarlo::Execution::Parallel};
  SimRequest req{doc.value("study", std::string("covariance")), std::move(defaults)};
  if (req.study != "covariance" && req.study != "level") {
    throw ParseError("simulation config: study must be \"covariance\" or \"level\"");
  }
  auto& cfg = req.config;
  try {
    cfg.replications = doc.value("replications", cfg.replications);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.alpha = doc.value("alpha", cfg.alpha);
    cfg.fit.tol = doc.value("tol", cfg.fit.tol);
    cfg.fit.max_iter = doc.value("max_iter", cfg.fit.max_iter);
    if (doc.contains("parametrization")) cfg.tag = parse_parametrization(doc["parametrization"].get<std::string>());
    const std::string exec = doc.value("execution", std::string("parallel"));
    if (exec != "serial" && exec != "parallel") throw ParseError("execution must be serial or parallel");
    cfg.execution = exec == "serial" ? montecarlo::Execution::Serial : montecarlo::Execution::Parallel;
  } catch (const json::type_error& e) {
    throw ParseError(std::string("simulation config: ") + e.what());
  }

  if (o.seed) cfg.seed = *o.seed;
  if (o.replications) cfg.replications = *o.replications;
  if (o.level) cfg.alpha = *o.level;
  if (o.tag) cfg.tag = *o.tag;
  if (o.tol) cfg.fit.tol = *o.tol;
  if (o.max_iter) cfg.fit.max_iter = *o.max_iter;
  montecarlo::validate(cfg);
  return req;
}

json simulate_report(const SimRequest& req) {
  const auto& cfg = req.config;
  json r;
  r["command"] = "simulate";
  r["study"] = req.study;
  r["seed"] = cfg.seed;
  r["replications"] = cfg.replications;
  r["sample_sizes"] = cfg.sample_sizes;
  r["c"] = vector_json(cfg.truth.c.full());
  r["sigma1"] = matrix_json(cfg.truth.Sigma1.matrix());
  if (req.study == "covariance") {
    const montecarlo::CovarianceStudy s = montecarlo::run_covariance_study(cfg);
    const ParamIndexMap index(cfg.truth.c.size(), cfg.truth.Sigma1.dim(), cfg.tag);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < index.size(); ++i) labels.push_back(index.label(i));
    r["parametrization"] = to_string(cfg.tag);
    r["labels"] = labels;
    r["failed_fits"] = s.failed_fits;
    r["theoretical"] = matrix_json(s.theoretical);
    r["empirical"] = matrix_json(s.empirical);
    r["max_relative_error"] = number(s.max_relative_error);
    r["frobenius_error"] = number(s.frobenius_error);
  } else {
    const montecarlo::LevelStudy s = montecarlo::run_level_study(cfg);
    r["alpha"] = number(s.alpha);
    r["failed_fits"] = s.failed_fits;
    r["rejection_rate"] = number(s.rejection_rate);
    r["standard_error"] = number(s.standard_error);
    r["ci"] = vector_json(Vector{s.ci_low, s.ci_high});
    r["within_ci"] = s.rejection_rate >= s.ci_low && s.rejection_rate <= s.ci_high;
    r["ks_statistic"] = number(s.ks_statistic);
    r["ks_p_value"] = number(s.ks_p_value);
  }
  return r;
}

std::string render_simulate(const json& r) {
  std::ostringstream os;
  os << r["study"].get<std::string>() << " study: " << r["replications"].get<int>()
     << " replications, seed " << r["seed"].get<std::uint64_t>() << ", failed fits "
     << r["failed_fits"].get<int>() << '\n';
  if (r["study"] == "covariance") {
    os << "parametrization: " << r["parametrization"].get<std::string>() << "  order:";
    for (const auto& l : r["labels"]) os << ' ' << l.get<std::string>();
    os << "\nclosed-form V:\n";
    render_matrix(os, r["theoretical"], "  ");
    os << "empirical covariance of sqrt(n+) (estimate - truth):\n";
    render_matrix(os, r["empirical"], "  ");
    os << "max relative error (|V| > 0.05 max|V|): " << num6(r["max_relative_error"]) << '\n';
    os << "relative Frobenius error: " << num6(r["frobenius_error"]) << '\n';
  } else {
    os << "nominal level " << num6(r["alpha"]) << ", rejection rate " << num6(r["rejection_rate"])
       << ", 3-SE band [" << num6(r["ci"][0]) << ", " << num6(r["ci"][1]) << "] "
       << (r["within_ci"].get<bool>() ? "(inside)" : "(OUTSIDE)") << '\n';
    os << "KS uniformity of p-values: D = " << num6(r["ks_statistic"]) << ", p = " << num6(r["ks_p_value"])
       << '\n';
  }
  return os.str();
}

// --- validate ------------------------------------------------------------------

json validate_report(std::uint64_t seed, int instances) {
  const auto outcomes = oracle::run_registry(seed, instances);
  json r;
  r["command"] = "validate";
  r["seed"] = seed;
  r["instances"] = instances;
  json checks = json::array();
  bool all = true;
  for (const auto& o : outcomes) {
    checks.push_back({{"name", o.name},
                      {"instances", o.instances},
                      {"max_discrepancy", number(o.max_discrepancy)},
                      {"tolerance", number(o.tolerance)},
                      {"passed", o.passed}});
    all = all && o.passed;
  }
  r["checks"] = checks;
  r["passed"] = all;
  return r;
}

std::string render_validate(const json& r) {
  std::ostringstream os;
  os << "oracle registry: " << r["instances"].get<int>() << " random instances, seed "
     << r["seed"].get<std::uint64_t>() << '\n';
  for (const auto& c : r["checks"]) {
    os << (c["passed"].get<bool>() ? "  PASS  " : "  FAIL  ") << c["name"].get<std::string>()
       << "  max " << num6(c["max_discrepancy"]) << " (tol " << num6(c["tolerance"]) << ", "
       << c["instances"].get<int>() << " instances)\n";
  }
  os << (r["passed"].get<bool>() ? "all checks passed\n" : "SOME CHECKS FAILED\n");
  return os.str();
}

// --- dispatch ------------------------------------------------------------------

namespace {

void emit(std::ostream& out, const json& report, const std::string& format,
          std::string (*render)(const json&)) {
  if (format == "json") {
    out << report.dump(2) << '\n';
  } else {
    out << render(report);
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proportional covariance matrices: estimation, inference and simulation"};
  app.require_subcommand(1);

  std::string format = "text";
  double tol = mle::FitOptions{}.tol;
  int max_iter = mle::FitOptions{}.max_iter;
  std::string cov_flag;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<double> level;
  std::string input_path;
  std::optional<int> csv_n;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--tol", tol, "Convergence tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", max_iter, "Iteration cap")->check(CLI::PositiveNumber);
    sub->add_option("--cov", cov_flag, "Report V in this parametrization")
        ->check(CLI::IsMember({"b", "a", "sigma"}));
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--reps", reps, "Replications (simulate) or random instances (validate)");
    sub->add_option("--level", level, "Significance level")->check(CLI::Range(0.0, 1.0));
  };

  CLI::App* est = app.add_subcommand("estimate", "Fit the proportional model");
  est->add_option("input", input_path, "JSON document or CSV matrix")->required();
  est->add_option("--n", csv_n, "Degrees of freedom for CSV input");
  add_common(est);

  CLI::App* tst = app.add_subcommand("test", "Test homogeneity c2 = ... = cK = 1");
  tst->add_option("input", input_path, "JSON document or CSV matrix")->required();
  tst->add_option("--n", csv_n, "Degrees of freedom for CSV input");
  add_common(tst);

  CLI::App* sim = app.add_subcommand("simulate", "Run a Monte Carlo study from a config file");
  sim->add_option("config", input_path, "Simulation config (JSON)")->required();
  add_common(sim);

  CLI::App* val = app.add_subcommand("validate", "Check every closed form against its oracle");
  add_common(val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParseError;
  }

  const mle::FitOptions opts{tol, max_iter};
  try {
    if (*est || *tst) {
      const InputDocument doc = load_input(input_path, csv_n);
      const SampleSet data = to_samples(doc);
      if (*tst && data.groups() < 2) {
        throw KTooSmall("the homogeneity test needs at least two groups");
      }
      const mle::FitResult fit = mle::fit(data, opts);
      if (*est) {
        std::optional<Parametrization> cov;
        if (!cov_flag.empty()) cov = parse_parametrization(cov_flag);
        emit(out, estimate_report(doc, data, fit, cov), format, render_estimate);
        if (!fit.converged) {
          err << "error: no convergence after " << fit.iterations << " iterations\n";
          return kNotConverged;
        }
        return kOk;
      }
      if (!fit.converged) throw NotConverged("no convergence after " + std::to_string(fit.iterations) + " iterations");
      emit(out, test_report(data, fit, level.value_or(0.05)), format, render_test);
      return kOk;
    }
    if (*sim) {
      SimOverrides o;
      o.seed = seed;
      o.replications = reps;
      o.level = level;
      if (!cov_flag.empty()) o.tag = parse_parametrization(cov_flag);
      if (sim->count("--tol")) o.tol = tol;
      if (sim->count("--max-iter")) o.max_iter = max_iter;
      const SimRequest req = parse_sim_config(read_file(input_path), o);
      emit(out, simulate_report(req), format, render_simulate);
      return kOk;
    }
    const json report = validate_report(seed.value_or(1), reps.value_or(50));
    emit(out, report, format, render_validate);
    if (!report["passed"].get<bool>()) {
      err << "error: at least one oracle check failed\n";
      return kCheckFailed;
    }
    return kOk;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const KTooSmall& e) {
    err << "error: " << e.what() << '\n';
    return kTooFewGroups;
  } catch (const NotPositiveDefinite& e) {
    err << "error: " << e.what() << '\n';
    return kNotPositiveDefinite;
  } catch (const SingularMatrix& e) {
    err << "error: " << e.what() << '\n';
    return kNotPositiveDefinite;
  } catch (const NotConverged& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace propcov::cli
