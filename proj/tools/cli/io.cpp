#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "propcov/errors.hpp"

namespace propcov::cli {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                                        std::to_string(column) + ")"
                                  : what),
      line_(line),
      column_(column) {}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Vector vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of numbers");
  Vector v;
  for (const auto& x : j) {
    if (!x.is_number()) throw ParseError(where + ": expected a number");
    v.push_back(x.get<double>());
  }
  return v;
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  Matrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const Vector row = vector_from_json(j[i], where + "[" + std::to_string(i) + "]");
    if (i == 0) m = Matrix(rows, row.size());
    if (row.size() != m.cols()) throw ParseError(where + ": rows have different lengths");
    for (std::size_t c = 0; c < row.size(); ++c) m(i, c) = row[c];
  }
  if (!m.is_square()) throw ParseError(where + ": matrix must be square");
  return m;
}

InputDocument parse_input_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = line_column(text, offset);
    throw ParseError("malformed JSON", line, col);
  }
  if (!doc.is_object() || !doc.contains("groups")) {
    throw ParseError("input: expected an object with a \"groups\" array");
  }
  const json& groups = doc["groups"];
  if (!groups.is_array() || groups.empty()) throw ParseError("input: \"groups\" must be a non-empty array");

  InputDocument out;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const std::string where = "groups[" + std::to_string(k) + "]";
    const json& g = groups[k];
    if (!g.is_object() || !g.contains("n") || !g.contains("S")) {
      throw ParseError(where + ": expected {\"n\": integer, \"S\": matrix}");
    }
    if (!g["n"].is_number_integer()) throw ParseError(where + ".n: expected an integer");
    out.n.push_back(g["n"].get<int>());
    out.S.push_back(matrix_from_json(g["S"], where + ".S"));
    if (g.contains("label")) {
      if (!g["label"].is_string()) throw ParseError(where + ".label: expected a string");
      out.labels.push_back(g["label"].get<std::string>());
    }
  }
  if (doc.contains("labels")) {
    if (!out.labels.empty()) throw ParseError("input: labels given both per group and globally");
    for (const auto& l : doc["labels"]) {
      if (!l.is_string()) throw ParseError("labels: expected strings");
      out.labels.push_back(l.get<std::string>());
    }
  }
  if (!out.labels.empty() && out.labels.size() != out.n.size()) {
    throw ParseError("input: " + std::to_string(out.labels.size()) + " labels for " +
                     std::to_string(out.n.size()) + " groups");
  }
  const std::size_t p = out.S.front().rows();
  for (std::size_t k = 0; k < out.S.size(); ++k) {
    if (out.S[k].rows() != p) {
      throw ParseError("groups[" + std::to_string(k) + "].S: dimension differs from group 0");
    }
  }
  return out;
}

InputDocument parse_input_csv(const std::string& text, int n) {
  std::vector<Vector> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Vector row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      const std::string cell = line.substr(pos, comma - pos);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ParseError("CSV: expected a number", line_no, pos + 1);
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos) {
        throw ParseError("CSV: trailing characters after number", line_no, pos + used + 1);
      }
      row.push_back(v);
      pos = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("CSV: no data");
  const std::size_t p = rows.size();
  Matrix m(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    if (rows[i].size() != p) {
      throw ParseError("CSV: row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                       " values, expected " + std::to_string(p));
    }
    for (std::size_t j = 0; j < p; ++j) m(i, j) = rows[i][j];
  }
  return InputDocument{{n}, {m}, {}};
}

InputDocument load_input(const std::string& path, std::optional<int> csv_n) {
  const std::string text = read_file(path);
  const bool is_csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  if (is_csv || csv_n) {
    if (!csv_n) throw ParseError("CSV input needs --n");
    return parse_input_csv(text, *csv_n);
  }
  return parse_input_json(text);
}

SampleSet to_samples(const InputDocument& doc) {
  std::vector<GroupSample> groups;
  for (std::size_t k = 0; k < doc.S.size(); ++k) {
    const Matrix& s = doc.S[k];
    if (linalg::max_asymmetry(s) > 1e-9 * linalg::max_abs(s)) {
      throw InvalidArgument("group " + std::to_string(k + 1) + ": S is not symmetric");
    }
    groups.emplace_back(SymMatrix(s), doc.n[k]);
  }
  return SampleSet(std::move(groups));
}

double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round12(x);
}

json vector_json(std::span<const double> v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.data().subspan(i * m.cols(), m.cols())));
  return out;
}

std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x == 0.0 ? 0.0 : x);
  return buf;
}

}  // namespace propcov::cli
