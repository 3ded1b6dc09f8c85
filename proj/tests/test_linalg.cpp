#include <cmath>

#include "doctest.h"
#include "propcov/errors.hpp"
#include "propcov/linalg.hpp"
#include "support.hpp"

using namespace propcov;
using namespace propcov::linalg;

TEST_CASE("cholesky_lower small cases") {
  const LowerTriangular a = cholesky_lower(SymMatrix{{4, 2}, {2, 5}});
  CHECK(a == LowerTriangular{{2, 0}, {1, 2}});
  CHECK(cholesky_lower(SymMatrix::identity(4)) == LowerTriangular::identity(4));
}

TEST_CASE("cholesky_lower reconstructs random SPD matrices") {
  std::mt19937_64 rng(11);
  for (std::size_t p = 1; p <= 8; ++p) {
    const SymMatrix m = testing::random_spd(rng, p);
    const LowerTriangular a = cholesky_lower(m);
    CHECK(a.has_positive_diagonal());
    const Matrix back = a.matrix() * a.matrix().transpose();
    CHECK(max_abs_diff(back, m.matrix()) <= 1e-12 * max_abs(m.matrix()));
  }
}

TEST_CASE("cholesky_lower rejects indefinite and singular input") {
  CHECK_THROWS_AS(cholesky_lower(SymMatrix{{1, 2}, {2, 1}}), NotPositiveDefinite);
  CHECK_THROWS_AS(cholesky_lower(SymMatrix{{1, 1}, {1, 1}}), NotPositiveDefinite);
  CHECK_THROWS_AS(cholesky_lower(SymMatrix{{-1}}), NotPositiveDefinite);
}

TEST_CASE("invert_lower_triangular") {
  const LowerTriangular inv = invert_lower_triangular(LowerTriangular{{2, 0}, {1, 2}});
  CHECK(max_abs_diff(inv.matrix(), Matrix{{0.5, 0}, {-0.25, 0.5}}) == 0.0);
  CHECK(invert_lower_triangular(LowerTriangular::identity(3)) == LowerTriangular::identity(3));

  std::mt19937_64 rng(12);
  for (std::size_t p = 1; p <= 7; ++p) {
    const LowerTriangular l = testing::random_lower(rng, p);
    const LowerTriangular li = invert_lower_triangular(l);
    CHECK(max_abs_diff(l.matrix() * li.matrix(), Matrix::identity(p)) <= 1e-12);
    CHECK(max_abs_diff(invert_lower_triangular(li).matrix(), l.matrix()) <= 1e-10);
  }
  CHECK_THROWS_AS(invert_lower_triangular(LowerTriangular{{1, 0}, {3, 0}}), SingularMatrix);
}

TEST_CASE("sym_inverse") {
  const SymMatrix inv = sym_inverse(SymMatrix{{4, 0}, {0, 5}});
  CHECK(inv(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(inv(1, 1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(inv(0, 1) == 0.0);
  CHECK(max_abs_diff(sym_inverse(SymMatrix::identity(3)).matrix(), Matrix::identity(3)) == 0.0);

  std::mt19937_64 rng(13);
  for (std::size_t p = 1; p <= 8; ++p) {
    const SymMatrix m = testing::random_spd(rng, p);
    const SymMatrix mi = sym_inverse(m);
    CHECK(max_abs_diff(m.matrix() * mi.matrix(), Matrix::identity(p)) <= 1e-10);
    CHECK(max_abs_diff(sym_inverse(mi).matrix(), m.matrix()) <= 1e-8);
  }
}

TEST_CASE("trace_of_product") {
  CHECK(trace_of_product(SymMatrix::identity(2), SymMatrix::identity(2)) == 2.0);
  CHECK(trace_of_product(SymMatrix{{2, 0}, {0, 3}}, SymMatrix{{4, 0}, {0, 5}}) == 23.0);

  std::mt19937_64 rng(14);
  const SymMatrix m = testing::random_spd(rng, 5);
  const SymMatrix n = testing::random_spd(rng, 5);
  const Matrix prod = m.matrix() * n.matrix();
  double tr = 0.0;
  for (std::size_t i = 0; i < 5; ++i) tr += prod(i, i);
  CHECK(trace_of_product(m, n) == doctest::Approx(tr).epsilon(1e-13));
}

TEST_CASE("SymMatrix symmetrizes round-off and rejects real asymmetry") {
  const SymMatrix s(Matrix{{1.0, 0.5 + 1e-12}, {0.5, 2.0}});
  CHECK(s(0, 1) == s(1, 0));
  CHECK_THROWS_AS(SymMatrix(Matrix{{1.0, 0.6}, {0.5, 2.0}}), InvalidArgument);
  CHECK_THROWS_AS(SymMatrix(Matrix(2, 3)), DimensionMismatch);
}

TEST_CASE("triangular types enforce their zero pattern") {
  CHECK_THROWS_AS(LowerTriangular(Matrix{{1, 1e-300}, {0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(UpperTriangular(Matrix{{1, 0}, {2, 1}}), InvalidArgument);
  CHECK(transpose(LowerTriangular{{2, 0}, {1, 3}}) == UpperTriangular{{2, 1}, {0, 3}});
  CHECK_FALSE(LowerTriangular{{1, 0}, {0, -1}}.has_positive_diagonal());
}

TEST_CASE("gram, log_det and quadratic_form") {
  const LowerTriangular a{{2, 0}, {1, 2}};
  CHECK(gram(a) == SymMatrix{{4, 2}, {2, 5}});
  CHECK(gram(transpose(a)) == SymMatrix{{5, 2}, {2, 4}});
  CHECK(log_det(SymMatrix{{4, 2}, {2, 5}}) == doctest::Approx(std::log(16.0)).epsilon(1e-14));
  const Vector x{1.0, -1.0};
  CHECK(quadratic_form(Matrix{{4, 2}, {2, 5}}, x) == doctest::Approx(5.0));
  CHECK(scaled(SymMatrix{{1, 2}, {2, 5}}, 2.0) == SymMatrix{{2, 4}, {4, 10}});
}

TEST_CASE("matrix arithmetic") {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  CHECK(a * b == Matrix{{2, 1}, {4, 3}});
  CHECK(a + b == Matrix{{1, 3}, {4, 4}});
  CHECK(a - b == Matrix{{1, 1}, {2, 4}});
  CHECK(2.0 * a == Matrix{{2, 4}, {6, 8}});
  const Vector x{1.0, 1.0};
  CHECK(a * std::span<const double>(x) == Vector{3.0, 7.0});
  CHECK(outer(Vector{1, 2}, Vector{3, 4, 5}) == Matrix{{3, 4, 5}, {6, 8, 10}});
  CHECK(a.block(1, 0, 1, 2) == Matrix{{3, 4}});
  CHECK(max_asymmetry(a) == 1.0);
  CHECK_THROWS_AS(a * Matrix(3, 3), DimensionMismatch);
}
