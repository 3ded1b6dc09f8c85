#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "commands.hpp"
#include "doctest.h"
#include "propcov/inference.hpp"

using namespace propcov;
using namespace propcov::cli;

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "propcov");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "propcov_cli_test";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream(path) << content;
  return path.string();
}

const char* kIdentical = R"({"groups": [
  {"n": 60, "S": [[2.0, 0.3], [0.3, 1.0]]},
  {"n": 40, "S": [[2.0, 0.3], [0.3, 1.0]]}
]})";

const char* kWorked = R"({"groups": [
  {"n": 50, "S": [[1.0, 0.0], [0.0, 1.0]], "label": "first"},
  {"n": 50, "S": [[2.0, 0.0], [0.0, 2.0]], "label": "second"}
]})";

const char* kLevelConfig = R"({"study": "level", "c": [1, 1, 1],
  "sigma1": [[1.0, 0.5], [0.5, 2.0]], "sample_sizes": [200, 200, 200],
  "replications": 1000, "seed": 17, "alpha": 0.05})";

const char* kCovConfig = R"({"study": "covariance", "c": [1, 1.5],
  "sigma1": [[1.0, 0.5], [0.5, 2.0]], "sample_sizes": [100, 100],
  "replications": 200, "seed": 3, "parametrization": "a"})";

}  // namespace

TEST_CASE("estimate: identical groups") {
  const std::string path = write_temp("identical.json", kIdentical);
  const Result r = run_cli({"estimate", path, "--format", "json"});
  REQUIRE(r.code == kOk);
  const json rep = json::parse(r.out);
  CHECK(rep["c"][1].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  // se from v11 = (2 c² / p)(1/r₁ + 1/r₂) over n₊
  const double v11 = (2.0 / 2.0) * (1.0 / 0.6 + 1.0 / 0.4);
  CHECK(rep["c_se"][0].get<double>() == doctest::Approx(std::sqrt(v11 / 100.0)).epsilon(1e-10));
  CHECK(rep["sigma1"][0][1].get<double>() == doctest::Approx(0.3));

  const Result text = run_cli({"estimate", path});
  CHECK(text.code == kOk);
  CHECK(text.out.find("c2 (group2)  1  se") != std::string::npos);
}

TEST_CASE("estimate: p = 1 closed form") {
  const std::string path = write_temp(
      "p1.json", R"({"groups": [{"n": 100, "S": [[1.0]]}, {"n": 100, "S": [[4.0]]}]})");
  const Result r = run_cli({"estimate", path, "--format", "json", "--cov", "sigma"});
  REQUIRE(r.code == kOk);
  const json rep = json::parse(r.out);
  CHECK(rep["c"][1].get<double>() == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(rep["sigma1"][0][0].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep["covariance"]["labels"] == json({"c2", "sigma[1,1]"}));
}

TEST_CASE("estimate: error paths") {
  const std::string bad = write_temp("bad.json", "{\"groups\": [\n  {\"n\": 10,\n   \"S\": [[1, 0], [0, 1]]]\n}");
  const Result parse = run_cli({"estimate", bad});
  CHECK(parse.code == kParseError);
  CHECK(parse.out.empty());
  CHECK(parse.err.find("line 3, column") != std::string::npos);

  const std::string indefinite =
      write_temp("indef.json", R"({"groups": [{"n": 10, "S": [[1, 2], [2, 1]]}]})");
  CHECK(run_cli({"estimate", indefinite}).code == kNotPositiveDefinite);

  const std::string small_n = write_temp("smalln.json", R"({"groups": [{"n": 1, "S": [[1, 0], [0, 1]]}]})");
  CHECK(run_cli({"estimate", small_n}).code == kNotPositiveDefinite);

  const std::string asym = write_temp("asym.json", R"({"groups": [{"n": 10, "S": [[1, 0.2], [0.3, 1]]}]})");
  CHECK(run_cli({"estimate", asym}).code == kParseError);

  const std::string missing = write_temp("missing.json", R"({"grps": []})");
  CHECK(run_cli({"estimate", missing}).code == kParseError);

  CHECK(run_cli({"estimate", "/nonexistent/file.json"}).code == kParseError);
  CHECK(run_cli({"estimate"}).code == kParseError);
  CHECK(run_cli({"estimate", bad, "--cov", "q"}).code == kParseError);
}

TEST_CASE("estimate: non-convergence still writes the report") {
  const std::string path = write_temp("slow.json", R"({"groups": [
    {"n": 30, "S": [[2.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 3.0]]},
    {"n": 30, "S": [[1.0, -0.4, 0.0], [-0.4, 2.5, 0.1], [0.0, 0.1, 0.7]]},
    {"n": 30, "S": [[4.0, 0.0, 0.5], [0.0, 1.0, 0.0], [0.5, 0.0, 1.0]]}]})");
  const Result r = run_cli({"estimate", path, "--max-iter", "1", "--format", "json"});
  CHECK(r.code == kNotConverged);
  const json rep = json::parse(r.out);
  CHECK_FALSE(rep["converged"].get<bool>());
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("estimate: CSV input") {
  const std::string path = write_temp("one.csv", "4,2\n2,5\n");
  const Result r = run_cli({"estimate", path, "--n", "20", "--format", "json"});
  REQUIRE(r.code == kOk);
  const json rep = json::parse(r.out);
  CHECK(rep["A"] == json::parse("[[2.0, 0.0], [1.0, 2.0]]"));

  CHECK(run_cli({"estimate", path}).code == kParseError);
  const std::string ragged = write_temp("ragged.csv", "4,2\n2\n");
  CHECK(run_cli({"estimate", ragged, "--n", "20"}).code == kParseError);
  const std::string junk = write_temp("junk.csv", "4,x\n2,5\n");
  const Result j = run_cli({"estimate", junk, "--n", "20"});
  CHECK(j.code == kParseError);
  CHECK(j.err.find("line 1, column 3") != std::string::npos);
}

TEST_CASE("test command") {
  const Result same = run_cli({"test", write_temp("identical.json", kIdentical), "--format", "json"});
  REQUIRE(same.code == kOk);
  const json s = json::parse(same.out);
  CHECK(s["statistic"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s["p_value"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));

  const Result worked = run_cli({"test", write_temp("worked.json", kWorked), "--format", "json"});
  REQUIRE(worked.code == kOk);
  const json w = json::parse(worked.out);
  CHECK(w["statistic"].get<double>() == doctest::Approx(6.25).epsilon(1e-8));
  CHECK(w["df"].get<int>() == 1);
  CHECK(w["p_value"].get<double>() ==
        doctest::Approx(inference::chi_square_sf(6.25, 1)).epsilon(1e-7));
  CHECK(w["reject"].get<bool>());

  const Result one = run_cli({"test", write_temp("single.json", R"({"groups": [{"n": 10, "S": [[1.0]]}]})")});
  CHECK(one.code == kTooFewGroups);
  CHECK_FALSE(one.err.empty());
}

TEST_CASE("validate command") {
  const Result r = run_cli({"validate", "--reps", "20"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("all checks passed") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("simulate command") {
  const std::string level = write_temp("level.json", kLevelConfig);
  const Result r = run_cli({"simulate", level, "--format", "json"});
  REQUIRE(r.code == kOk);
  const json rep = json::parse(r.out);
  CHECK(rep["within_ci"].get<bool>());

  const Result again = run_cli({"simulate", level, "--format", "json"});
  CHECK(again.out == r.out);
  const Result other = run_cli({"simulate", level, "--format", "json", "--seed", "18"});
  CHECK(other.out != r.out);

  const Result cov = run_cli({"simulate", write_temp("cov.json", kCovConfig)});
  CHECK(cov.code == kOk);
  CHECK(cov.out.find("max relative error") != std::string::npos);

  CHECK(run_cli({"simulate", level, "--reps", "10"}).code == kParseError);
  CHECK(run_cli({"simulate", write_temp("badsim.json", R"({"c": [1]})")}).code == kParseError);
}

TEST_CASE("JSON reports round-trip") {
  const std::vector<std::vector<std::string>> commands{
      {"estimate", write_temp("worked.json", kWorked), "--cov", "a"},
      {"test", write_temp("worked.json", kWorked)},
      {"simulate", write_temp("cov.json", kCovConfig)},
      {"validate", "--reps", "10"},
  };
  for (auto args : commands) {
    args.push_back("--format");
    args.push_back("json");
    const Result r = run_cli(args);
    REQUIRE(r.code == kOk);
    const json first = json::parse(r.out);
    const json second = json::parse(first.dump(2));
    CHECK(first == second);
    CHECK(second.dump(2) + "\n" == r.out);
  }
}

TEST_CASE("number formatting") {
  CHECK(round12(0.1 + 0.2) == 0.3);
  CHECK(round12(1.0 / 3.0) == 0.333333333333);
  CHECK(fmt6(1.0 / 3.0) == "0.333333");
  CHECK(number(std::nan("")).is_null());
  CHECK(line_column("ab\ncd", 4) == std::pair<std::size_t, std::size_t>{2, 2});
}

TEST_CASE("binary keeps diagnostics on stderr") {
  const std::string bad = write_temp("bad2.json", "{\"groups\": [}");
  const fs::path dir = fs::temp_directory_path() / "propcov_cli_test";
  const std::string cmd = std::string(PROPCOV_CLI_PATH) + " estimate " + bad + " > " +
                          (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == kParseError);
  CHECK(fs::file_size(dir / "stdout.txt") == 0);
  CHECK(fs::file_size(dir / "stderr.txt") > 0);
}

TEST_CASE("validate with fewer instances than (p, K) pairs") {
  for (const char* reps : {"1", "2", "5"}) CHECK(run_cli({"validate", "--reps", reps}).code == kOk);
  CHECK(fmt6(-0.0) == "0");
}
