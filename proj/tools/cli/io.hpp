#pragma once

// Input parsing and number formatting for the command-line tool.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "propcov/model.hpp"

namespace propcov::cli {

using json = nlohmann::json;

// Malformed input. line/column are 1-based; 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct InputDocument {
  std::vector<int> n;
  std::vector<Matrix> S;  // as read; symmetry is checked when building samples
  std::vector<std::string> labels;
};

std::string read_file(const std::string& path);

// {"groups":[{"n":…, "S":[[…]], "label":…}, …], "labels":[…]}
InputDocument parse_input_json(const std::string& text);
// p lines of p comma-separated values; one group with the given n.
InputDocument parse_input_csv(const std::string& text, int n);

// Reads JSON, or CSV when the path ends in .csv or n is given.
InputDocument load_input(const std::string& path, std::optional<int> csv_n);

// Throws InvalidArgument for S asymmetric beyond 1e-9 relative and
// NotPositiveDefinite for S that is not SPD or n < p.
SampleSet to_samples(const InputDocument& doc);

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset);

// Rounds to 12 significant digits so that emitted JSON re-parses to a value
// that emits identically.
double round12(double x);
json number(double x);
json vector_json(std::span<const double> v);
json matrix_json(const Matrix& m);

Vector vector_from_json(const json& j, const std::string& where);
Matrix matrix_from_json(const json& j, const std::string& where);

// Human-readable number with 6 significant digits.
std::string fmt6(double x);

}  // namespace propcov::cli
