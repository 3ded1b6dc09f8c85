#include "propcov/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "propcov/errors.hpp"
#include "propcov/inference.hpp"
#include "propcov/slices.hpp"

namespace propcov::oracle {

using asymptotics::ClosedForm;
using slices::col_head;
using slices::col_tail;
using slices::corner;
using slices::leading;
using slices::row_tail;
using slices::selector;
using slices::trailing;
using slices::unit;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

double scaled_diff(const Matrix& got, const Matrix& want) {
  return linalg::max_abs_diff(got, want) / std::max(1.0, linalg::max_abs(want));
}

double vec_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("identity check: length mismatch");
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

Matrix row_matrix(std::span<const double> v) { return Matrix::column(v).transpose(); }

Vector scaled_add(Vector acc, double s, std::span<const double> v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * v[i];
  return acc;
}

Matrix sigma_of(const LowerTriangular& a) { return a.matrix() * a.matrix().transpose(); }

}  // namespace

// --- finite differences ------------------------------------------------------

Vector loglik_gradient(const CholInvParam& params, const SampleSet& data) {
  const std::size_t k = data.groups();
  const std::size_t p = data.dim();
  const Vector& r = data.weights();
  const Eigen::MatrixXd b = to_eigen(params.B.matrix());

  Vector g(k - 1 + tri_size(p), 0.0);
  Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t q = 0; q < k; ++q) {
    const Eigen::MatrixXd s = to_eigen(data[q].S.matrix());
    const double cq = params.c[q];
    weighted += (r[q] / cq) * s;
    if (q == 0) continue;
    const double t = (b.transpose() * s * b).trace();
    g[q - 1] = 0.5 * r[q] * (static_cast<double>(p) / cq - t / (cq * cq));
  }
  // ∂(−l/n₊)/∂b_hi = −δ_hi / b_ii + Σₖ (rₖ/cₖ) (Sₖ bᵢ)_h, h ≤ i
  const Eigen::MatrixXd wb = weighted * b;
  std::size_t pos = k - 1;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t h = 0; h <= i; ++h) {
      double v = wb(h, i);
      if (h == i) v -= 1.0 / b(i, i);
      g[pos++] = v;
    }
  }
  return g;
}

Matrix fd_hessian_loglik(const CholInvParam& params, const SampleSet& data,
                         const FdSettings& fd) {
  const std::size_t k = data.groups();
  const std::size_t p = data.dim();
  const Vector x = pack(params);
  const std::size_t q = x.size();
  Matrix h(q, q);
  for (std::size_t j = 0; j < q; ++j) {
    const double step = fd.step * std::max(1.0, std::abs(x[j]));
    Vector xp = x;
    Vector xm = x;
    xp[j] += step;
    xm[j] -= step;
    const Vector gp = loglik_gradient(unpack_inv(k, p, xp), data);
    const Vector gm = loglik_gradient(unpack_inv(k, p, xm), data);
    for (std::size_t i = 0; i < q; ++i) h(i, j) = (gp[i] - gm[i]) / (2.0 * step);
  }
  const double asym = linalg::max_asymmetry(h);
  if (!(asym <= fd.symmetry_tol * std::max(1.0, linalg::max_abs(h)))) {
    throw StepTooLarge("fd_hessian_loglik: asymmetry " + std::to_string(asym));
  }
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double avg = 0.5 * (h(i, j) + h(j, i));
      h(i, j) = avg;
      h(j, i) = avg;
    }
  return h;
}

namespace {

Matrix central_jacobian(const VectorMap& map, std::span<const double> at, double rel_step) {
  const Vector x(at.begin(), at.end());
  const std::size_t m = map(x).size();
  Matrix jac(m, x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double step = rel_step * std::max(1.0, std::abs(x[j]));
    Vector xp = x;
    Vector xm = x;
    xp[j] += step;
    xm[j] -= step;
    const Vector fp = map(xp);
    const Vector fm = map(xm);
    for (std::size_t i = 0; i < m; ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * step);
  }
  return jac;
}

}  // namespace

Matrix fd_jacobian(const VectorMap& map, std::span<const double> at, const FdSettings& fd) {
  const Matrix jac = central_jacobian(map, at, fd.step);
  const Matrix coarse = central_jacobian(map, at, 2.0 * fd.step);
  const double drift = linalg::max_abs_diff(jac, coarse);
  if (!(drift <= fd.stability_tol * std::max(1.0, linalg::max_abs(jac)))) {
    throw StepTooLarge("fd_jacobian: step-halving drift " + std::to_string(drift));
  }
  return jac;
}

// --- dense helpers (Eigen) -----------------------------------------------------

Matrix numeric_inverse(const Matrix& m) {
  const Eigen::MatrixXd e = to_eigen(m);
  Eigen::LLT<Eigen::MatrixXd> llt(e);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("numeric_inverse: LLT failed");
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(e.rows(), e.cols()));
  return from_eigen(0.5 * (inv + inv.transpose()));
}

SymMatrix numeric_inverse(const SymMatrix& m) { return SymMatrix(numeric_inverse(m.matrix())); }

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Vector a_from_b_packed(std::size_t p, std::span<const double> b_packed) {
  const Eigen::MatrixXd b = to_eigen(unpack_b(p, b_packed).matrix());
  const Eigen::MatrixXd sigma = (b * b.transpose()).inverse();
  const Eigen::MatrixXd a = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
  return pack_a(LowerTriangular(from_eigen(a)));
}

Vector sigma_from_a_packed(std::size_t p, std::span<const double> a_packed) {
  const Eigen::MatrixXd a = to_eigen(unpack_a(p, a_packed).matrix());
  const Eigen::MatrixXd s = a * a.transpose();
  return pack_sigma(SymMatrix(from_eigen(0.5 * (s + s.transpose()))));
}

SampleSet data_at_expectation(const CholRootParam& params, std::span<const int> dof) {
  if (dof.size() != params.c.size()) throw DimensionMismatch("data_at_expectation: dof length");
  std::vector<GroupSample> groups;
  for (std::size_t k = 0; k < dof.size(); ++k)
    groups.emplace_back(group_covariance(params, k), dof[k]);
  return SampleSet(std::move(groups));
}

Matrix wishart_covariance(const SymMatrix& sigma) {
  const std::size_t p = sigma.dim();
  const ParamIndexMap index(1, p, Parametrization::Cov);
  const std::size_t q = index.size();
  Matrix v(q, q);
  for (std::size_t x = 0; x < q; ++x) {
    const auto e1 = index.at(x);
    for (std::size_t y = 0; y < q; ++y) {
      const auto e2 = index.at(y);
      const std::size_t i = e1.row, j = e1.col, k = e2.row, l = e2.col;
      v(x, y) = sigma(i, k) * sigma(j, l) + sigma(i, l) * sigma(j, k);
    }
  }
  return v;
}

Matrix schur_complement(const Matrix& info, std::size_t coef_count) {
  const std::size_t q = info.rows();
  const std::size_t m = q - coef_count;
  const Eigen::MatrixXd e = to_eigen(info);
  const Eigen::MatrixXd i11 = e.topLeftCorner(coef_count, coef_count);
  const Eigen::MatrixXd i12 = e.topRightCorner(coef_count, m);
  const Eigen::MatrixXd i22 = e.bottomRightCorner(m, m);
  const Eigen::MatrixXd solved = i22.llt().solve(i12.transpose());
  return from_eigen(i11 - i12 * solved);
}

Matrix with_identity_block(const Matrix& j, std::size_t coef_count) {
  Matrix full(coef_count + j.rows(), coef_count + j.cols());
  for (std::size_t i = 0; i < coef_count; ++i) full(i, i) = 1.0;
  full.set_block(coef_count, coef_count, j);
  return full;
}

Instance random_instance(std::uint64_t seed, std::size_t p, std::size_t k) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> diag(0.5, 2.0);
  std::normal_distribution<double> off(0.0, 0.5);
  std::uniform_real_distribution<double> coef(0.3, 3.0);
  std::uniform_int_distribution<int> dof(20, 200);

  Matrix a(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    a(i, i) = diag(rng);
    for (std::size_t j = 0; j < i; ++j) a(i, j) = off(rng);
  }
  Vector c(k, 1.0);
  for (std::size_t g = 1; g < k; ++g) c[g] = coef(rng);
  std::vector<int> n(k);
  for (auto& v : n) v = dof(rng);
  Vector r = weights_from_dof(n);
  return {{Coefficients(std::move(c)), LowerTriangular(a)}, std::move(n), std::move(r)};
}

// --- helper identities ---------------------------------------------------------

namespace identities {

double selector_picks_tail(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const Vector lhs = selector(p - j, i - j) * col_tail(a.matrix(), j, j);
      worst = std::max(worst, vec_diff(lhs, col_tail(a.matrix(), j, i)));
    }
  return worst;
}

double tail_dot_unit_is_entry(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double lhs = linalg::dot(col_tail(a.matrix(), j, j), unit(p - j, i - j));
      worst = std::max(worst, std::abs(lhs - a(i, j)));
    }
  return worst;
}

double sigma_column_from_a_columns(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  const Matrix sigma = sigma_of(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    Vector rhs(p - i, 0.0);
    for (std::size_t j = 0; j <= i; ++j) rhs = scaled_add(rhs, a(i, j), col_tail(a.matrix(), j, i));
    worst = std::max(worst, vec_diff(col_tail(sigma, i, i), rhs));
  }
  return worst;
}

double unit_row_of_trailing(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t m = 0; m <= i; ++m) {
      const Matrix lhs = row_matrix(unit(p - m, i - m)) * trailing(a.matrix(), m);
      worst = std::max(worst, vec_diff(lhs.data(), row_tail(a.matrix(), i, m)));
    }
  return worst;
}

double selector_rows_of_trailing(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t m = 0; m <= i; ++m) {
      const Matrix lhs = selector(p - m, i - m) * trailing(a.matrix(), m);
      worst = std::max(worst, linalg::max_abs_diff(lhs, corner(a.matrix(), i, m)));
    }
  return worst;
}

double row_tail_times_corner(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j)
      for (std::size_t m = 0; m <= i; ++m) {
        const Matrix lhs =
            row_matrix(row_tail(a.matrix(), i, m)) * corner(a.matrix(), j, m).transpose();
        Vector rhs(p - j, 0.0);
        for (std::size_t u = m; u <= i; ++u) rhs = scaled_add(rhs, a(i, u), col_tail(a.matrix(), u, j));
        worst = std::max(worst, vec_diff(lhs.data(), rhs));
      }
  return worst;
}

double row_tail_inner_product(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j)
      for (std::size_t m = 0; m <= i; ++m) {
        const double lhs = linalg::dot(row_tail(a.matrix(), i, m), row_tail(a.matrix(), j, m));
        double rhs = 0.0;
        for (std::size_t u = m; u <= i; ++u) rhs += a(i, u) * a(j, u);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
  return worst;
}

double sigma_outer_expansion(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  const Matrix sigma = sigma_of(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      const Matrix lhs = linalg::outer(col_tail(sigma, i, i), col_tail(sigma, j, j));
      Matrix rhs(p - i, p - j);
      for (std::size_t l = 0; l <= j; ++l)
        for (std::size_t m = 0; m <= i; ++m)
          rhs += (a(i, m) * a(j, l)) *
                 linalg::outer(col_tail(a.matrix(), m, i), col_tail(a.matrix(), l, j));
      worst = std::max(worst, linalg::max_abs_diff(lhs, rhs));
    }
  return worst;
}

double sigma_cross_expansion(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  const Matrix& am = a.matrix();
  const Matrix sigma = sigma_of(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      const Matrix lhs = linalg::outer(col_tail(sigma, j, i), col_tail(sigma, i, j));
      Matrix full(p - i, p - j);
      for (std::size_t l = 0; l <= j; ++l)
        for (std::size_t m = 0; m <= i; ++m)
          full += (a(i, m) * a(j, l)) * linalg::outer(col_tail(am, l, i), col_tail(am, m, j));

      Matrix split(p - i, p - j);
      for (std::size_t m = 0; m <= i; ++m) {
        split += (a(i, m) * a(j, m)) * linalg::outer(col_tail(am, m, i), col_tail(am, m, j));
        Vector inner(p - j, 0.0);
        for (std::size_t l = m + 1; l <= i; ++l) inner = scaled_add(inner, a(i, l), col_tail(am, l, j));
        split += a(j, m) * linalg::outer(col_tail(am, m, i), inner);
        for (std::size_t l = m + 1; l <= j; ++l)
          split += (a(i, m) * a(j, l)) * linalg::outer(col_tail(am, l, i), col_tail(am, m, j));
      }
      worst = std::max({worst, linalg::max_abs_diff(lhs, full), linalg::max_abs_diff(lhs, split)});
    }
  return worst;
}

double sigma_corner_split(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  const Matrix& am = a.matrix();
  const Matrix sigma = sigma_of(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j)
      for (std::size_t m = 0; m <= i; ++m) {
        Matrix rhs = corner(am, i, m) * corner(am, j, m).transpose();
        for (std::size_t u = 0; u < m; ++u) rhs += linalg::outer(col_tail(am, u, i), col_tail(am, u, j));
        worst = std::max(worst, linalg::max_abs_diff(corner(sigma, i, j), rhs));
      }
  return worst;
}

double scaled_sigma_corner_split(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  const Matrix& am = a.matrix();
  const Matrix sigma = sigma_of(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      const Matrix lhs = sigma(i, j) * corner(sigma, i, j);

      double sij = 0.0;
      for (std::size_t m = 0; m <= i; ++m) sij += a(i, m) * a(j, m);
      Matrix all_columns(p - i, p - j);
      for (std::size_t l = 0; l < p; ++l) all_columns += linalg::outer(col_tail(am, l, i), col_tail(am, l, j));
      const Matrix product = sij * all_columns;

      Matrix split(p - i, p - j);
      for (std::size_t m = 0; m <= i; ++m)
        split += (a(i, m) * a(j, m)) * (corner(am, i, m) * corner(am, j, m).transpose());
      for (std::size_t l = 0; l < i; ++l) {
        double w = 0.0;
        for (std::size_t m = l + 1; m <= i; ++m) w += a(i, m) * a(j, m);
        split += w * linalg::outer(col_tail(am, l, i), col_tail(am, l, j));
      }
      worst = std::max({worst, linalg::max_abs_diff(lhs, product), linalg::max_abs_diff(lhs, split)});
    }
  return worst;
}

double a_column_dot_b_column(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  const UpperTriangular b = b_from_a(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t l = i; l < p; ++l) {
      const double v = linalg::dot(col_head(a.matrix(), i, l + 1), col_head(b.matrix(), l, l + 1));
      worst = std::max(worst, std::abs(v - (i == l ? 1.0 : 0.0)));
    }
  return worst;
}

double a_column_times_b_leading(const LowerTriangular& a) {
  const std::size_t p = a.dim();
  const UpperTriangular b = b_from_a(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t l = i; l < p; ++l) {
      const Matrix lhs = row_matrix(col_head(a.matrix(), i, l + 1)) * leading(b.matrix(), l + 1);
      worst = std::max(worst, vec_diff(lhs.data(), unit(l + 1, i)));
    }
  return worst;
}

}  // namespace identities

// --- registry ------------------------------------------------------------------

namespace {

struct Prepared {
  Matrix info;        // closed-form information
  Matrix info_inv;    // numeric inverse of the closed-form information
  Matrix v_cb;        // closed-form V(c, B)
  Matrix j_ab;
  Matrix j_sa;
};

Prepared prepare(const Instance& in) {
  const std::size_t k = in.params.c.size();
  Prepared out;
  out.info = asymptotics::information_cb(in.params, in.weights).matrix;
  out.info_inv = numeric_inverse(out.info);
  out.v_cb = asymptotics::assemble_v(in.params, in.weights, Parametrization::CholInv).matrix;
  out.j_ab = with_identity_block(asymptotics::jacobian_a_wrt_b(in.params.A), k - 1);
  out.j_sa = with_identity_block(asymptotics::jacobian_sigma_wrt_a(in.params.A), k - 1);
  return out;
}

std::size_t coefs(const Instance& in) { return in.params.c.size() - 1; }
std::size_t tri(const Instance& in) { return tri_size(in.params.A.dim()); }

Matrix c_block(const Matrix& m, const Instance& in) { return m.block(0, 0, coefs(in), coefs(in)); }
Matrix cross_block(const Matrix& m, const Instance& in) { return m.block(0, coefs(in), coefs(in), tri(in)); }
Matrix tri_block(const Matrix& m, const Instance& in) {
  return m.block(coefs(in), coefs(in), tri(in), tri(in));
}

Matrix chain(const Matrix& j, const Matrix& v) { return j * v * j.transpose(); }

std::vector<Check> build_registry() {
  using asymptotics::ClosedForm;
  namespace az = asymptotics;
  std::vector<Check> checks;

  checks.push_back({"information_cb vs finite-difference Hessian", ClosedForm::InformationCB, 1e-6, 1,
                    [](const Instance& in) {
                      const SampleSet data = data_at_expectation(in.params, in.dof);
                      const Matrix h = fd_hessian_loglik(to_inv(in.params), data);
                      const Matrix info = az::information_cb(in.params, in.weights).matrix;
                      return linalg::max_abs_diff(h, info) / linalg::max_abs(info);
                    }});
  checks.push_back({"i22_block_inverse multiplies back to identity", ClosedForm::I22BlockInverse, 1e-10, 1,
                    [](const Instance& in) {
                      double worst = 0.0;
                      for (std::size_t i = 0; i < in.params.A.dim(); ++i) {
                        const Matrix prod = az::i22_block(in.params.A, i) * az::i22_block_inverse(in.params.A, i);
                        worst = std::max(worst, linalg::max_abs_diff(prod, Matrix::identity(i + 1)));
                      }
                      return worst;
                    }});
  checks.push_back({"u11 vs numeric Schur complement", ClosedForm::U11Schur, 1e-10, 2,
                    [](const Instance& in) {
                      const Matrix info = az::information_cb(in.params, in.weights).matrix;
                      return scaled_diff(az::u11(in.params.c, in.weights, in.params.A.dim()),
                                         schur_complement(info, coefs(in)));
                    }});
  checks.push_back({"v11 vs numeric inverse of the information", ClosedForm::V11, 1e-9, 2,
                    [](const Instance& in) {
                      const Prepared pr = prepare(in);
                      return scaled_diff(az::v11(in.params.c, in.weights, in.params.A.dim()),
                                         c_block(pr.info_inv, in));
                    }});
  checks.push_back({"v12_cb vs numeric inverse of the information", ClosedForm::V12CB, 1e-9, 2,
                    [](const Instance& in) {
                      const Prepared pr = prepare(in);
                      return scaled_diff(az::v12_cb(in.params.c, b_from_a(in.params.A), in.weights),
                                         cross_block(pr.info_inv, in));
                    }});
  checks.push_back({"v22_cb vs numeric inverse of the information", ClosedForm::V22CB, 1e-9, 1,
                    [](const Instance& in) {
                      const Prepared pr = prepare(in);
                      return scaled_diff(az::v22_cb(b_from_a(in.params.A), in.weights),
                                         tri_block(pr.info_inv, in));
                    }});
  checks.push_back({"jacobian_a_wrt_b vs finite differences", ClosedForm::JacobianAB, 1e-7, 1,
                    [](const Instance& in) {
                      const std::size_t p = in.params.A.dim();
                      const Matrix fd = fd_jacobian(
                          [p](std::span<const double> x) { return a_from_b_packed(p, x); },
                          pack_b(b_from_a(in.params.A)));
                      return linalg::max_abs_diff(az::jacobian_a_wrt_b(in.params.A), fd);
                    }});
  checks.push_back({"v12_ca vs delta-method chain from V(c,B)", ClosedForm::V12CA, 1e-10, 2,
                    [](const Instance& in) {
                      const Prepared pr = prepare(in);
                      return scaled_diff(az::v12_ca(in.params.c, in.params.A, in.weights),
                                         cross_block(chain(pr.j_ab, pr.v_cb), in));
                    }});
  checks.push_back({"v22_ca vs delta-method chain from V(c,B)", ClosedForm::V22CA, 1e-10, 1,
                    [](const Instance& in) {
                      const Prepared pr = prepare(in);
                      return scaled_diff(az::v22_ca(in.params.A, in.weights),
                                         tri_block(chain(pr.j_ab, pr.v_cb), in));
                    }});
  checks.push_back({"jacobian_sigma_wrt_a vs finite differences", ClosedForm::JacobianSigmaA, 1e-7, 1,
                    [](const Instance& in) {
                      const std::size_t p = in.params.A.dim();
                      const Matrix fd = fd_jacobian(
                          [p](std::span<const double> x) { return sigma_from_a_packed(p, x); },
                          pack_a(in.params.A));
                      return linalg::max_abs_diff(az::jacobian_sigma_wrt_a(in.params.A), fd);
                    }});
  checks.push_back({"v12_csigma vs two-stage delta-method chain", ClosedForm::V12CSigma, 1e-10, 2,
                    [](const Instance& in) {
                      const Prepared pr = prepare(in);
                      return scaled_diff(az::v12_csigma(in.params.c, in.params.A, in.weights),
                                         cross_block(chain(pr.j_sa * pr.j_ab, pr.v_cb), in));
                    }});
  checks.push_back({"v22_csigma vs two-stage delta-method chain", ClosedForm::V22CSigma, 1e-10, 1,
                    [](const Instance& in) {
                      const Prepared pr = prepare(in);
                      return scaled_diff(az::v22_csigma(in.params.A, in.weights),
                                         tri_block(chain(pr.j_sa * pr.j_ab, pr.v_cb), in));
                    }});
  checks.push_back({"homogeneity statistic: simplified vs quadratic form",
                    ClosedForm::HomogeneitySimplified, 1e-12, 2, [](const Instance& in) {
                      double n_plus = 0.0;
                      for (int n : in.dof) n_plus += n;
                      const auto report = inference::homogeneity_statistic(
                          in.params.c, in.weights, n_plus, in.params.A.dim());
                      return report.form_check / std::max(1.0, report.statistic);
                    }});

  checks.push_back({"single-population V(c,Sigma1) equals the Wishart covariance", std::nullopt, 1e-10, 1,
                    [](const Instance& in) {
                      const Vector one{1.0};
                      const Matrix v = az::v22_csigma(in.params.A, one);
                      return scaled_diff(v, wishart_covariance(sigma_from_a(in.params.A)));
                    }});

  const std::vector<std::pair<std::string, double (*)(const LowerTriangular&)>> helpers{
      {"selector picks a column tail", identities::selector_picks_tail},
      {"column tail dotted with a unit vector", identities::tail_dot_unit_is_entry},
      {"sigma column as a combination of A columns", identities::sigma_column_from_a_columns},
      {"unit row of a trailing submatrix", identities::unit_row_of_trailing},
      {"selector rows of a trailing submatrix", identities::selector_rows_of_trailing},
      {"row tail times corner transpose", identities::row_tail_times_corner},
      {"row tail inner product", identities::row_tail_inner_product},
      {"sigma outer-product expansion", identities::sigma_outer_expansion},
      {"sigma cross-product expansion", identities::sigma_cross_expansion},
      {"sigma corner split", identities::sigma_corner_split},
      {"scaled sigma corner split", identities::scaled_sigma_corner_split},
      {"A column head dotted with B column head", identities::a_column_dot_b_column},
      {"A column head times leading B", identities::a_column_times_b_leading},
  };
  for (const auto& [label, fn] : helpers) {
    checks.push_back({"identity: " + label, std::nullopt, 1e-10, 1,
                      [fn](const Instance& in) { return fn(in.params.A); }});
  }
  return checks;
}

}  // namespace

const std::vector<Check>& registry() {
  static const std::vector<Check> checks = build_registry();
  return checks;
}

std::vector<CheckOutcome> run_registry(std::uint64_t seed, int instances) {
  const auto& checks = registry();
  std::vector<CheckOutcome> out(checks.size());
  for (std::size_t c = 0; c < checks.size(); ++c) {
    out[c].name = checks[c].name;
    out[c].tolerance = checks[c].tolerance;
  }
  for (int n = 0; n < instances; ++n) {
    const std::size_t p = 1 + static_cast<std::size_t>(n) % 5;
    const std::size_t k = 1 + static_cast<std::size_t>(n + 1) % 4;
    const Instance in = random_instance(seed + static_cast<std::uint64_t>(n), p, k);
    for (std::size_t c = 0; c < checks.size(); ++c) {
      if (k < checks[c].min_groups) continue;
      double d = 0.0;
      try {
        d = checks[c].discrepancy(in);
      } catch (const Error&) {
        d = std::numeric_limits<double>::infinity();
      }
      if (!(d <= checks[c].tolerance)) out[c].passed = false;
      out[c].max_discrepancy = std::max(out[c].max_discrepancy, std::isnan(d) ? INFINITY : d);
      ++out[c].instances;
    }
  }
  for (auto& o : out)
    if (o.instances == 0) o.passed = false;
  return out;
}

}  // namespace propcov::oracle
