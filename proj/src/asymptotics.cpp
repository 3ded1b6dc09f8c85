#include "propcov/asymptotics.hpp"

#include <cmath>
#include <numeric>

#include "propcov/errors.hpp"
#include "propcov/slices.hpp"

namespace propcov::asymptotics {

using linalg::outer;
using slices::col_head;
using slices::col_tail;
using slices::corner;
using slices::leading;
using slices::selector;
using slices::trailing;
using slices::unit;

namespace {

void check_weights(std::span<const double> r, std::size_t k) {
  if (r.size() != k) {
    throw DimensionMismatch("weights: expected " + std::to_string(k) + " entries, got " +
                            std::to_string(r.size()));
  }
  for (double v : r)
    if (!(v > 0.0)) throw InvalidArgument("weights must be positive");
  const double total = std::accumulate(r.begin(), r.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("weights must sum to one");
}

void require_k2(std::size_t k) {
  if (k < 2) throw KTooSmall("need at least two groups (K >= 2)");
}

// Free coefficients (c₂..c_K) as a column vector.
Vector free_c(const Coefficients& c) { return c.free(); }

Matrix mirror_upper(Matrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) m(i, j) = m(j, i);
  return m;
}

// Offsets of the column blocks in the triangular part (without the c-block).
std::size_t b_offset(std::size_t i) { return i * (i + 1) / 2; }
std::size_t a_offset(std::size_t i, std::size_t p) { return i * p - i * (i - 1) / 2; }

}  // namespace

double d_coefficient(double r1, std::size_t p) {
  const double pd = static_cast<double>(p);
  return (1.0 - (1.0 + pd) * r1) / (2.0 * pd * r1);
}

double e_coefficient(double r1, std::size_t p) {
  const double pd = static_cast<double>(p);
  return (1.0 - r1) / (2.0 * pd * r1);
}

// --- information ------------------------------------------------------------

Matrix i22_block(const LowerTriangular& a, std::size_t block) {
  const std::size_t n = block + 1;
  const Matrix ai = leading(a.matrix(), n);
  Matrix m = ai * ai.transpose();
  m(block, block) += a(block, block) * a(block, block);
  return m;
}

InfoMatrix information_cb(const CholRootParam& params, std::span<const double> weights) {
  const std::size_t k = params.c.size();
  const std::size_t p = params.A.dim();
  check_weights(weights, k);
  ParamIndexMap index(k, p, Parametrization::CholInv);
  Matrix info(index.size(), index.size());

  // I₁₁ = (p/2) diag(rₖ/cₖ²)
  for (std::size_t g = 1; g < k; ++g) {
    const double cg = params.c[g];
    info(g - 1, g - 1) = 0.5 * static_cast<double>(p) * weights[g] / (cg * cg);
  }

  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t off = index.block_offset(i);
    // I₁₂: only the bᵢᵢ column of block i is nonzero, −aᵢᵢ αₖ.
    for (std::size_t g = 1; g < k; ++g) {
      const double v = -params.A(i, i) * weights[g] / params.c[g];
      info(g - 1, off + i) = v;
      info(off + i, g - 1) = v;
    }
    info.set_block(off, off, i22_block(params.A, i));
  }
  return {std::move(info), index};
}

Matrix i22_block_inverse(const LowerTriangular& a, std::size_t block) {
  if (block >= a.dim()) throw DimensionMismatch("i22_block_inverse: block out of range");
  const UpperTriangular b = b_from_a(a);
  const std::size_t n = block + 1;
  const Matrix bi = leading(b.matrix(), n);
  const Vector bii = col_head(b.matrix(), block, n);
  return bi * bi.transpose() - 0.5 * outer(bii, bii);
}

Matrix u11(const Coefficients& c, std::span<const double> weights, std::size_t p) {
  const std::size_t k = c.size();
  require_k2(k);
  check_weights(weights, k);
  Matrix m(k - 1, k - 1);
  for (std::size_t g = 1; g < k; ++g) {
    const double ag = weights[g] / c[g];
    m(g - 1, g - 1) += weights[g] / (c[g] * c[g]);
    for (std::size_t h = 1; h < k; ++h) m(g - 1, h - 1) -= ag * weights[h] / c[h];
  }
  return 0.5 * static_cast<double>(p) * m;
}

Matrix v11(const Coefficients& c, std::span<const double> weights, std::size_t p) {
  const std::size_t k = c.size();
  require_k2(k);
  check_weights(weights, k);
  const Vector cf = free_c(c);
  Matrix m = (1.0 / weights[0]) * outer(cf, cf);
  for (std::size_t g = 1; g < k; ++g) m(g - 1, g - 1) += c[g] * c[g] / weights[g];
  return (2.0 / static_cast<double>(p)) * m;
}

// --- (c, B) -----------------------------------------------------------------

Matrix v12_cb(const Coefficients& c, const UpperTriangular& b, std::span<const double> weights) {
  const std::size_t k = c.size();
  const std::size_t p = b.dim();
  require_k2(k);
  check_weights(weights, k);
  const Vector cf = free_c(c);
  const double scale = 1.0 / (static_cast<double>(p) * weights[0]);
  Matrix m(k - 1, tri_size(p));
  for (std::size_t i = 0; i < p; ++i)
    m.set_block(0, b_offset(i), scale * outer(cf, col_head(b.matrix(), i, i + 1)));
  return m;
}

Matrix v22_cb(const UpperTriangular& b, std::span<const double> weights) {
  const std::size_t p = b.dim();
  if (weights.empty()) throw DimensionMismatch("v22_cb: empty weights");
  check_weights(weights, weights.size());
  const double d = d_coefficient(weights[0], p);
  const double e = e_coefficient(weights[0], p);
  Matrix m(tri_size(p), tri_size(p));
  for (std::size_t i = 0; i < p; ++i) {
    const Vector bi = col_head(b.matrix(), i, i + 1);
    const Matrix lead = leading(b.matrix(), i + 1);
    m.set_block(b_offset(i), b_offset(i), lead * lead.transpose() + d * outer(bi, bi));
    for (std::size_t j = i + 1; j < p; ++j) {
      const Matrix off = e * outer(bi, col_head(b.matrix(), j, j + 1));
      m.set_block(b_offset(i), b_offset(j), off);
      m.set_block(b_offset(j), b_offset(i), off.transpose());
    }
  }
  return m;
}

// --- (c, A) -----------------------------------------------------------------

Matrix jacobian_a_wrt_b(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  Matrix j(tri_size(p), tri_size(p));
  // Row block i (column i of A from the diagonal down), column block g ≥ i
  // (column g of B down to the diagonal): −a_{g, rows i..p} a_{i, rows 1..g}ᵀ.
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t g = i; g < p; ++g)
      j.set_block(a_offset(i, p), b_offset(g),
                  -1.0 * outer(col_tail(a.matrix(), g, i), col_head(a.matrix(), i, g + 1)));
  return j;
}

Matrix v12_ca(const Coefficients& c, const LowerTriangular& a, std::span<const double> weights) {
  const std::size_t k = c.size();
  const std::size_t p = a.dim();
  require_k2(k);
  check_weights(weights, k);
  const Vector cf = free_c(c);
  const double scale = -1.0 / (static_cast<double>(p) * weights[0]);
  Matrix m(k - 1, tri_size(p));
  for (std::size_t i = 0; i < p; ++i)
    m.set_block(0, a_offset(i, p), scale * outer(cf, col_tail(a.matrix(), i, i)));
  return m;
}

Matrix v22_ca(const LowerTriangular& a, std::span<const double> weights) {
  const std::size_t p = a.dim();
  if (weights.empty()) throw DimensionMismatch("v22_ca: empty weights");
  check_weights(weights, weights.size());
  const double d = d_coefficient(weights[0], p);
  const double e = e_coefficient(weights[0], p);
  Matrix m(tri_size(p), tri_size(p));
  for (std::size_t i = 0; i < p; ++i) {
    const Vector ai = col_tail(a.matrix(), i, i);
    const Matrix tail = trailing(a.matrix(), i);
    m.set_block(a_offset(i, p), a_offset(i, p), tail * tail.transpose() + d * outer(ai, ai));
    for (std::size_t j = i + 1; j < p; ++j) {
      const Matrix off = e * outer(ai, col_tail(a.matrix(), j, j));
      m.set_block(a_offset(i, p), a_offset(j, p), off);
      m.set_block(a_offset(j, p), a_offset(i, p), off.transpose());
    }
  }
  return m;
}

// --- (c, Σ₁) ----------------------------------------------------------------

Matrix jacobian_sigma_wrt_a(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  Matrix jac(tri_size(p), tri_size(p));
  // Row block i (σ column i from the diagonal), column block j ≤ i:
  //   a_ij [0 | I] + a_{j, rows i..p} e_{i-j}ᵀ
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Matrix blk = a(i, j) * selector(p - j, i - j);
      blk += outer(col_tail(a.matrix(), j, i), unit(p - j, i - j));
      jac.set_block(a_offset(i, p), a_offset(j, p), blk);
    }
  }
  return jac;
}

Matrix v12_csigma(const Coefficients& c, const LowerTriangular& a,
                  std::span<const double> weights) {
  const std::size_t k = c.size();
  const std::size_t p = a.dim();
  require_k2(k);
  check_weights(weights, k);
  const Matrix sigma = sigma_from_a(a).matrix();
  const Vector cf = free_c(c);
  const double scale = -2.0 / (static_cast<double>(p) * weights[0]);
  Matrix m(k - 1, tri_size(p));
  for (std::size_t i = 0; i < p; ++i)
    m.set_block(0, a_offset(i, p), scale * outer(cf, col_tail(sigma, i, i)));
  return m;
}

Matrix v22_csigma(const LowerTriangular& a, std::span<const double> weights) {
  const std::size_t p = a.dim();
  if (weights.empty()) throw DimensionMismatch("v22_csigma: empty weights");
  check_weights(weights, weights.size());
  const double e = e_coefficient(weights[0], p);
  const Matrix sigma = sigma_from_a(a).matrix();
  Matrix m(tri_size(p), tri_size(p));
  for (std::size_t i = 0; i < p; ++i) {
    const Vector si = col_tail(sigma, i, i);
    for (std::size_t j = i; j < p; ++j) {
      Matrix blk = sigma(i, j) * corner(sigma, i, j);
      blk += 4.0 * e * outer(si, col_tail(sigma, j, j));
      blk += outer(col_tail(sigma, j, i), col_tail(sigma, i, j));
      m.set_block(a_offset(i, p), a_offset(j, p), blk);
      if (j != i) m.set_block(a_offset(j, p), a_offset(i, p), blk.transpose());
    }
  }
  return m;
}

// --- assembly ---------------------------------------------------------------

AsymptoticCov assemble_v(const CholRootParam& params, std::span<const double> weights,
                         Parametrization tag) {
  const std::size_t k = params.c.size();
  const std::size_t p = params.A.dim();
  check_weights(weights, k);
  ParamIndexMap index(k, p, tag);
  Matrix v(index.size(), index.size());
  const std::size_t off = k - 1;

  Matrix v22;
  Matrix v12;
  switch (tag) {
    case Parametrization::CholInv: {
      const UpperTriangular b = b_from_a(params.A);
      v22 = v22_cb(b, weights);
      if (k >= 2) v12 = v12_cb(params.c, b, weights);
      break;
    }
    case Parametrization::CholRoot:
      v22 = v22_ca(params.A, weights);
      if (k >= 2) v12 = v12_ca(params.c, params.A, weights);
      break;
    case Parametrization::Cov:
      v22 = v22_csigma(params.A, weights);
      if (k >= 2) v12 = v12_csigma(params.c, params.A, weights);
      break;
  }

  v.set_block(off, off, v22);
  if (k >= 2) {
    v.set_block(0, 0, v11(params.c, weights, p));
    v.set_block(0, off, v12);
    v.set_block(off, 0, v12.transpose());
  }

  for (std::size_t i = 0; i < v.rows(); ++i) {
    if (v(i, i) < -1e-10) {
      throw NotPositiveSemidefinite("assemble_v: negative variance for " + index.label(i));
    }
  }
  return {mirror_upper(std::move(v)), index, tag};
}

Vector standard_errors(const AsymptoticCov& v, double n_plus) {
  if (!(n_plus > 0.0)) throw InvalidArgument("standard_errors: n_plus must be positive");
  Vector se(v.matrix.rows());
  for (std::size_t i = 0; i < se.size(); ++i) se[i] = std::sqrt(std::max(0.0, v.matrix(i, i)) / n_plus);
  return se;
}

const std::vector<ClosedForm>& closed_forms() {
  static const std::vector<ClosedForm> all{
      ClosedForm::InformationCB, ClosedForm::I22BlockInverse, ClosedForm::U11Schur,
      ClosedForm::V11,           ClosedForm::V12CB,           ClosedForm::V22CB,
      ClosedForm::JacobianAB,    ClosedForm::V12CA,           ClosedForm::V22CA,
      ClosedForm::JacobianSigmaA, ClosedForm::V12CSigma,      ClosedForm::V22CSigma,
      ClosedForm::HomogeneitySimplified,
  };
  return all;
}

std::string name(ClosedForm form) {
  switch (form) {
    case ClosedForm::InformationCB: return "information_cb";
    case ClosedForm::I22BlockInverse: return "i22_block_inverse";
    case ClosedForm::U11Schur: return "u11";
    case ClosedForm::V11: return "v11";
    case ClosedForm::V12CB: return "v12_cb";
    case ClosedForm::V22CB: return "v22_cb";
    case ClosedForm::JacobianAB: return "jacobian_a_wrt_b";
    case ClosedForm::V12CA: return "v12_ca";
    case ClosedForm::V22CA: return "v22_ca";
    case ClosedForm::JacobianSigmaA: return "jacobian_sigma_wrt_a";
    case ClosedForm::V12CSigma: return "v12_csigma";
    case ClosedForm::V22CSigma: return "v22_csigma";
    case ClosedForm::HomogeneitySimplified: return "homogeneity_simplified";
  }
  return "unknown";
}

}  // namespace propcov::asymptotics
