#include <set>

#include "doctest.h"
#include "propcov/errors.hpp"
#include "propcov/model.hpp"
#include "support.hpp"

using namespace propcov;
using linalg::max_abs_diff;

TEST_CASE("b_from_a") {
  CHECK(b_from_a(LowerTriangular::identity(3)) == UpperTriangular::identity(3));
  const UpperTriangular b = b_from_a(LowerTriangular{{2, 0}, {1, 2}});
  CHECK(max_abs_diff(b.matrix(), Matrix{{0.5, -0.25}, {0, 0.5}}) == 0.0);

  std::mt19937_64 rng(21);
  for (std::size_t p = 1; p <= 6; ++p) {
    const LowerTriangular a = testing::random_lower(rng, p);
    const UpperTriangular bb = b_from_a(a);
    CHECK(max_abs_diff(bb.matrix().transpose() * a.matrix(), Matrix::identity(p)) <= 1e-12);
    CHECK(max_abs_diff(a_from_b(bb).matrix(), a.matrix()) <= 1e-12);
  }
}

TEST_CASE("sigma_from_a and a_from_sigma") {
  CHECK(sigma_from_a(LowerTriangular::identity(2)) == SymMatrix::identity(2));
  CHECK(a_from_sigma(SymMatrix::identity(2)) == LowerTriangular::identity(2));
  CHECK(sigma_from_a(LowerTriangular{{2, 0}, {1, 2}}) == SymMatrix{{4, 2}, {2, 5}});
  CHECK(a_from_sigma(SymMatrix{{4, 2}, {2, 5}}) == LowerTriangular{{2, 0}, {1, 2}});

  std::mt19937_64 rng(22);
  for (std::size_t p = 1; p <= 6; ++p) {
    const LowerTriangular a = testing::random_lower(rng, p);
    CHECK(max_abs_diff(a_from_sigma(sigma_from_a(a)).matrix(), a.matrix()) <= 1e-10);
  }
}

TEST_CASE("group precision agrees with the inverse of the group covariance") {
  std::mt19937_64 rng(23);
  const LowerTriangular a = testing::random_lower(rng, 4);
  const CholRootParam root{Coefficients({1.0, 2.5, 0.4}), a};
  const CholInvParam inv = to_inv(root);
  for (std::size_t k = 0; k < 3; ++k) {
    const SymMatrix direct = linalg::sym_inverse(group_covariance(root, k));
    CHECK(max_abs_diff(group_precision(inv, k).matrix(), direct.matrix()) <= 1e-9);
  }
}

TEST_CASE("packing follows the column-block layout") {
  CHECK(pack_b(UpperTriangular{{1, 2}, {0, 3}}) == Vector{1, 2, 3});
  CHECK(pack_a(LowerTriangular{{1, 0}, {2, 3}}) == Vector{1, 2, 3});
  CHECK(pack_sigma(SymMatrix{{1, 2}, {2, 3}}) == Vector{1, 2, 3});
  CHECK(pack_b(UpperTriangular{{1, 2, 4}, {0, 3, 5}, {0, 0, 6}}) == Vector{1, 2, 3, 4, 5, 6});
  CHECK(pack_a(LowerTriangular{{1, 0, 0}, {2, 4, 0}, {3, 5, 6}}) == Vector{1, 2, 3, 4, 5, 6});

  std::mt19937_64 rng(24);
  const LowerTriangular a = testing::random_lower(rng, 3);
  CHECK(unpack_a(3, pack_a(a)) == a);
  const UpperTriangular b = b_from_a(a);
  CHECK(unpack_b(3, pack_b(b)) == b);
  const SymMatrix s = sigma_from_a(a);
  CHECK(unpack_sigma(3, pack_sigma(s)) == s);
  CHECK_THROWS_AS(unpack_a(3, Vector(5)), DimensionMismatch);

  const CholRootParam root{Coefficients({1.0, 2.0, 3.0}), a};
  const Vector v = pack(root);
  CHECK(v.size() == 2 + 6);
  CHECK(v[0] == 2.0);
  CHECK(v[1] == 3.0);
  const CholRootParam back = unpack_root(3, 3, v);
  CHECK(back.c == root.c);
  CHECK(back.A == root.A);
}

TEST_CASE("ParamIndexMap is a bijection") {
  for (auto tag : {Parametrization::CholInv, Parametrization::CholRoot, Parametrization::Cov}) {
    for (std::size_t k = 1; k <= 4; ++k)
      for (std::size_t p = 1; p <= 5; ++p) {
        const ParamIndexMap index(k, p, tag);
        CHECK(index.size() == k - 1 + p * (p + 1) / 2);
        std::set<std::size_t> seen;
        for (std::size_t g = 1; g < k; ++g) seen.insert(index.coefficient(g));
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t j = 0; j < p; ++j) {
            const bool stored = tag == Parametrization::CholInv ? i <= j : i >= j;
            if (!stored) {
              CHECK_THROWS_AS(index.entry(i, j), DimensionMismatch);
              continue;
            }
            const std::size_t pos = index.entry(i, j);
            seen.insert(pos);
            const auto e = index.at(pos);
            CHECK_FALSE(e.is_coefficient);
            CHECK(e.row == i);
            CHECK(e.col == j);
          }
        CHECK(seen.size() == index.size());
        CHECK(*seen.rbegin() == index.size() - 1);
        for (std::size_t i = 0; i < p; ++i) {
          const std::size_t off = index.block_offset(i);
          const std::size_t len = index.block_length(i);
          if (tag == Parametrization::CholInv) {
            CHECK(off == index.entry(0, i));
            CHECK(len == i + 1);
          } else {
            CHECK(off == index.entry(i, i));
            CHECK(len == p - i);
          }
        }
      }
  }
  const ParamIndexMap index(3, 2, Parametrization::CholInv);
  CHECK(index.label(0) == "c2");
  CHECK(index.label(1) == "c3");
  CHECK(index.label(2) == "b[1,1]");
  CHECK(index.label(3) == "b[1,2]");
  CHECK(index.label(4) == "b[2,2]");
  CHECK(ParamIndexMap(1, 2, Parametrization::Cov).label(1) == "sigma[2,1]");
}

TEST_CASE("Coefficients validation") {
  CHECK_THROWS_AS(Coefficients({1.1, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(Coefficients({1.0, -2.0}), InvalidArgument);
  CHECK_THROWS_AS(Coefficients(Vector{}), InvalidArgument);
  CHECK(Coefficients::from_free(Vector{2.0, 3.0}).full() == Vector{1.0, 2.0, 3.0});
  CHECK(Coefficients::ones(3).free() == Vector{1.0, 1.0});
}

TEST_CASE("SampleSet validation and weights") {
  const SymMatrix s{{2, 1}, {1, 2}};
  const SampleSet data({GroupSample(s, 30), GroupSample(s, 10)});
  CHECK(data.n_plus() == 40);
  CHECK(data.weights()[0] == doctest::Approx(0.75));
  CHECK(data.weights()[1] == doctest::Approx(0.25));

  CHECK_THROWS_AS(SampleSet({GroupSample(s, 1)}), NotPositiveDefinite);
  CHECK_THROWS_AS(SampleSet({GroupSample(SymMatrix{{1, 2}, {2, 1}}, 10)}), NotPositiveDefinite);
  CHECK_THROWS_AS(SampleSet({GroupSample(s, 10), GroupSample(SymMatrix{{1}}, 10)}),
                  DimensionMismatch);
  CHECK_THROWS_AS(GroupSample(s, 0), InvalidArgument);
  CHECK_THROWS_AS(SampleSet({}), InvalidArgument);
}

TEST_CASE("parametrization names") {
  CHECK(parse_parametrization("b") == Parametrization::CholInv);
  CHECK(parse_parametrization("a") == Parametrization::CholRoot);
  CHECK(parse_parametrization("sigma") == Parametrization::Cov);
  CHECK(to_string(Parametrization::Cov) == "sigma");
  CHECK_THROWS_AS(parse_parametrization("x"), InvalidArgument);
}
