#include "propcov/model.hpp"

#include <cmath>
#include <numeric>

#include "propcov/errors.hpp"

namespace propcov {

using linalg::cholesky_lower;
using linalg::gram;
using linalg::invert_lower_triangular;

GroupSample::GroupSample(SymMatrix s, int n_dof) : S(std::move(s)), n(n_dof) {
  if (n < 1) throw InvalidArgument("GroupSample: degrees of freedom must be >= 1");
}

SampleSet::SampleSet(std::vector<GroupSample> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) throw InvalidArgument("SampleSet: need at least one group");
  const std::size_t p = groups_.front().S.dim();
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    const GroupSample& g = groups_[k];
    if (g.S.dim() != p) {
      throw DimensionMismatch("SampleSet: group " + std::to_string(k + 1) + " has dimension " +
                              std::to_string(g.S.dim()) + ", expected " + std::to_string(p));
    }
    if (static_cast<std::size_t>(g.n) < p) {
      throw NotPositiveDefinite("SampleSet: group " + std::to_string(k + 1) + " has n = " +
                                std::to_string(g.n) + " < p = " + std::to_string(p) +
                                " (sample covariance is singular)");
    }
    try {
      (void)cholesky_lower(g.S);
    } catch (const NotPositiveDefinite& e) {
      throw NotPositiveDefinite("SampleSet: group " + std::to_string(k + 1) +
                                " covariance is not positive definite (" + e.what() + ")");
    }
    n_plus_ += g.n;
  }
  weights_.resize(groups_.size());
  for (std::size_t k = 0; k < groups_.size(); ++k)
    weights_[k] = static_cast<double>(groups_[k].n) / static_cast<double>(n_plus_);
}

Vector weights_from_dof(std::span<const int> n) {
  const double total = std::accumulate(n.begin(), n.end(), 0.0);
  Vector r(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) r[k] = n[k] / total;
  return r;
}

// --- Coefficients --------------------------------------------------------

Coefficients::Coefficients(Vector full) : c_(std::move(full)) {
  if (c_.empty()) throw InvalidArgument("Coefficients: empty");
  if (c_[0] != 1.0) throw InvalidArgument("Coefficients: c1 must be exactly 1");
  for (double v : c_)
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument("Coefficients: entries must be finite and positive");
}

Coefficients Coefficients::ones(std::size_t k) { return Coefficients(Vector(k, 1.0)); }

Coefficients Coefficients::from_free(std::span<const double> free) {
  Vector full(free.size() + 1, 1.0);
  std::copy(free.begin(), free.end(), full.begin() + 1);
  return Coefficients(std::move(full));
}

std::string to_string(Parametrization tag) {
  switch (tag) {
    case Parametrization::CholInv: return "b";
    case Parametrization::CholRoot: return "a";
    case Parametrization::Cov: return "sigma";
  }
  return "?";
}

Parametrization parse_parametrization(const std::string& s) {
  if (s == "b" || s == "cholinv") return Parametrization::CholInv;
  if (s == "a" || s == "cholroot") return Parametrization::CholRoot;
  if (s == "sigma" || s == "cov") return Parametrization::Cov;
  throw InvalidArgument("unknown parametrization '" + s + "' (expected b, a or sigma)");
}

// --- conversions -----------------------------------------------------------

UpperTriangular b_from_a(const LowerTriangular& a) {
  return linalg::transpose(invert_lower_triangular(a));
}

// A = (Bᵀ)⁻¹
LowerTriangular a_from_b(const UpperTriangular& b) {
  return invert_lower_triangular(linalg::transpose(b));
}

SymMatrix sigma_from_a(const LowerTriangular& a) { return gram(a); }

LowerTriangular a_from_sigma(const SymMatrix& sigma1) { return cholesky_lower(sigma1); }

CholRootParam to_root(const CovParam& p) { return {p.c, a_from_sigma(p.Sigma1)}; }
CholRootParam to_root(const CholInvParam& p) { return {p.c, a_from_b(p.B)}; }
CholInvParam to_inv(const CholRootParam& p) { return {p.c, b_from_a(p.A)}; }
CovParam to_cov(const CholRootParam& p) { return {p.c, sigma_from_a(p.A)}; }

SymMatrix group_precision(const CholInvParam& p, std::size_t k) {
  return linalg::scaled(gram(p.B), 1.0 / p.c[k]);
}

SymMatrix group_covariance(const CholRootParam& p, std::size_t k) {
  return linalg::scaled(gram(p.A), p.c[k]);
}

// --- packing -----------------------------------------------------------------

std::size_t tri_size(std::size_t p) { return p * (p + 1) / 2; }

namespace {

void require_length(std::size_t p, std::span<const double> v, const char* what) {
  if (v.size() != tri_size(p)) {
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(tri_size(p)) +
                            " entries, got " + std::to_string(v.size()));
  }
}

// Column i, rows i..p-1, column after column.
Vector pack_lower_columns(const Matrix& m) {
  const std::size_t p = m.rows();
  Vector v;
  v.reserve(tri_size(p));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t r = i; r < p; ++r) v.push_back(m(r, i));
  return v;
}

Matrix unpack_lower_columns(std::size_t p, std::span<const double> v) {
  Matrix m(p, p);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t r = i; r < p; ++r) m(r, i) = v[pos++];
  return m;
}

}  // namespace

Vector pack_b(const UpperTriangular& b) {
  const std::size_t p = b.dim();
  Vector v;
  v.reserve(tri_size(p));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t r = 0; r <= i; ++r) v.push_back(b(r, i));
  return v;
}

UpperTriangular unpack_b(std::size_t p, std::span<const double> v) {
  require_length(p, v, "unpack_b");
  Matrix m(p, p);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t r = 0; r <= i; ++r) m(r, i) = v[pos++];
  return UpperTriangular(m);
}

Vector pack_a(const LowerTriangular& a) { return pack_lower_columns(a.matrix()); }

LowerTriangular unpack_a(std::size_t p, std::span<const double> v) {
  require_length(p, v, "unpack_a");
  return LowerTriangular(unpack_lower_columns(p, v));
}

Vector pack_sigma(const SymMatrix& s) { return pack_lower_columns(s.matrix()); }

SymMatrix unpack_sigma(std::size_t p, std::span<const double> v) {
  require_length(p, v, "unpack_sigma");
  Matrix m = unpack_lower_columns(p, v);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) m(i, j) = m(j, i);
  return SymMatrix(m);
}

namespace {

Vector concat(const Vector& a, const Vector& b) {
  Vector v(a);
  v.insert(v.end(), b.begin(), b.end());
  return v;
}

void require_full_length(std::size_t k, std::size_t p, std::span<const double> v) {
  if (k == 0 || v.size() != k - 1 + tri_size(p)) {
    throw DimensionMismatch("parameter vector has length " + std::to_string(v.size()) +
                            ", expected " + std::to_string(k - 1 + tri_size(p)));
  }
}

}  // namespace

Vector pack(const CholInvParam& p) { return concat(p.c.free(), pack_b(p.B)); }
Vector pack(const CholRootParam& p) { return concat(p.c.free(), pack_a(p.A)); }
Vector pack(const CovParam& p) { return concat(p.c.free(), pack_sigma(p.Sigma1)); }

CholInvParam unpack_inv(std::size_t k, std::size_t p, std::span<const double> v) {
  require_full_length(k, p, v);
  return {Coefficients::from_free(v.first(k - 1)), unpack_b(p, v.subspan(k - 1))};
}

CholRootParam unpack_root(std::size_t k, std::size_t p, std::span<const double> v) {
  require_full_length(k, p, v);
  return {Coefficients::from_free(v.first(k - 1)), unpack_a(p, v.subspan(k - 1))};
}

CovParam unpack_cov(std::size_t k, std::size_t p, std::span<const double> v) {
  require_full_length(k, p, v);
  return {Coefficients::from_free(v.first(k - 1)), unpack_sigma(p, v.subspan(k - 1))};
}

// --- ParamIndexMap -----------------------------------------------------------

ParamIndexMap::ParamIndexMap(std::size_t k, std::size_t p, Parametrization tag)
    : k_(k), p_(p), tag_(tag) {
  if (k == 0 || p == 0) throw InvalidArgument("ParamIndexMap: K and p must be positive");
}

std::size_t ParamIndexMap::coefficient(std::size_t group) const {
  if (group == 0 || group >= k_) throw DimensionMismatch("ParamIndexMap: no free coefficient");
  return group - 1;
}

std::size_t ParamIndexMap::block_offset(std::size_t i) const {
  if (tag_ == Parametrization::CholInv) return k_ - 1 + i * (i + 1) / 2;
  // blocks before i have lengths p, p-1, ..., p-i+1
  return k_ - 1 + i * p_ - (i * (i + 1)) / 2 + i;
}

std::size_t ParamIndexMap::block_length(std::size_t i) const {
  return tag_ == Parametrization::CholInv ? i + 1 : p_ - i;
}

std::size_t ParamIndexMap::entry(std::size_t row, std::size_t col) const {
  if (row >= p_ || col >= p_) throw DimensionMismatch("ParamIndexMap: entry out of range");
  if (tag_ == Parametrization::CholInv) {
    if (row > col) throw DimensionMismatch("ParamIndexMap: B is upper triangular");
    return block_offset(col) + row;
  }
  if (row < col) throw DimensionMismatch("ParamIndexMap: only the lower half is packed");
  return block_offset(col) + (row - col);
}

ParamIndexMap::Entry ParamIndexMap::at(std::size_t pos) const {
  if (pos >= size()) throw DimensionMismatch("ParamIndexMap: position out of range");
  if (pos < k_ - 1) return {true, pos + 1, 0, 0};
  for (std::size_t i = 0; i < p_; ++i) {
    const std::size_t off = block_offset(i);
    if (pos < off + block_length(i)) {
      const std::size_t t = pos - off;
      if (tag_ == Parametrization::CholInv) return {false, 0, t, i};
      return {false, 0, i + t, i};
    }
  }
  throw DimensionMismatch("ParamIndexMap: position out of range");
}

std::string ParamIndexMap::label(std::size_t pos) const {
  const Entry e = at(pos);
  if (e.is_coefficient) return "c" + std::to_string(e.group + 1);
  return to_string(tag_) + "[" + std::to_string(e.row + 1) + "," + std::to_string(e.col + 1) + "]";
}

}  // namespace propcov
