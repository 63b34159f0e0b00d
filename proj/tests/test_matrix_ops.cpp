#include "edmc/error.hpp"
#include "edmc/harness.hpp"
#include "edmc/matrix_ops.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace edmc;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("oracle jacobi eigensolver reconstructs its input") {
  oracle::Gen gen(11);
  const Matrix a = gen.symmetric(9);
  const auto e = oracle::jacobi_eig(a);
  CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).norm() < 1e-12);
  CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(9, 9)).norm() < 1e-12);
  for (Index i = 1; i < 9; ++i) CHECK(e.values(i) <= e.values(i - 1));
}

TEST_CASE("sym") {
  CHECK(sym(mat2(0, 2, 0, 0)).mat() == mat2(0, 1, 1, 0));
  CHECK(sym(mat2(1, 3, 1, 5)).mat() == mat2(1, 2, 2, 5));
  const Matrix s = mat2(1.5, -2.25, -2.25, 7);
  CHECK(sym(s).mat() == s);
  CHECK_THROWS_AS(sym(Matrix::Zero(2, 3)), Error);
  CHECK((skew(mat2(1, 3, 1, 5)) - mat2(0, 1, -1, 0)).norm() == 0.0);
}

TEST_CASE("edm_from_gram") {
  SUBCASE("two nodes of the five-sensor map") {
    const Matrix x = figure1_coordinates().topRows(2);
    const SymmetricMatrix d = edm_from_gram(SymmetricMatrix(x * x.transpose()));
    CHECK(d(0, 1) == 29.0);
    CHECK(d(1, 0) == 29.0);
    CHECK(d(0, 0) == 0.0);
  }
  SUBCASE("zero and identity") {
    CHECK(edm_from_gram(SymmetricMatrix::zero(4)).mat().isZero(0.0));
    Matrix expected = Matrix::Constant(3, 3, 2.0);
    expected.diagonal().setZero();
    CHECK(edm_from_gram(SymmetricMatrix(Matrix::Identity(3, 3))).mat() == expected);
  }
  SUBCASE("matches the entrywise definition") {
    oracle::Gen gen(3);
    const Matrix y = gen.symmetric(7);
    CHECK((edm_from_gram(SymmetricMatrix(y)).mat() - oracle::edm_by_definition(y)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("edm_adjoint") {
  CHECK(edm_adjoint(Matrix::Zero(3, 3)).mat().isZero(0.0));
  Matrix expected(3, 3);
  expected << 4, -2, -2, -2, 4, -2, -2, -2, 4;
  CHECK(edm_adjoint(Matrix::Ones(3, 3)).mat() == expected);
  CHECK_THROWS_AS(edm_adjoint(Matrix::Zero(3, 2)), Error);

  oracle::Gen gen(5);
  const Matrix y = gen.symmetric(5);
  const Matrix r = gen.symmetric(5);
  const double lhs = (oracle::edm_by_definition(y).array() * r.array()).sum();
  const double rhs = (y.array() * edm_adjoint(r).mat().array()).sum();
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
}

TEST_CASE("apply_mask") {
  oracle::Gen gen(8);
  const SymmetricMatrix a(gen.symmetric(6));
  SUBCASE("full sampling zeroes only the diagonal") {
    Matrix expected = a.mat();
    expected.diagonal().setZero();
    CHECK(apply_mask(a, SampleSet::full(6)).mat() == expected);
  }
  SUBCASE("empty sampling") { CHECK(apply_mask(a, SampleSet::empty(6)).mat().isZero(0.0)); }
  SUBCASE("single pair on the five-sensor map") {
    const Matrix x = figure1_coordinates();
    const SymmetricMatrix d = edm_from_gram(SymmetricMatrix(x * x.transpose()));
    const SymmetricMatrix m = apply_mask(d, SampleSet(5, {{0, 1}}));
    Matrix expected = Matrix::Zero(5, 5);
    expected(0, 1) = expected(1, 0) = 29.0;
    CHECK(m.mat() == expected);
  }
  SUBCASE("dimension mismatch") { CHECK_THROWS_AS(apply_mask(a, SampleSet::full(5)), Error); }
}

TEST_CASE("SampleSet keeps a symmetric, diagonal-free index set") {
  const SampleSet e(4, {{2, 0}, {0, 2}, {1, 3}});
  CHECK(e.pairs().size() == 2);
  CHECK(e.directed_size() == 4);
  CHECK(e.contains(0, 2));
  CHECK(e.contains(2, 0));
  CHECK(e.contains(3, 1));
  CHECK_FALSE(e.contains(0, 1));
  CHECK(e.indicator().diagonal().isZero(0.0));
  CHECK_THROWS_AS(SampleSet(4, {{1, 1}}), Error);
  CHECK_THROWS_AS(SampleSet(4, {{0, 4}}), Error);
}

TEST_CASE("truncated_eig") {
  SUBCASE("diagonal case") {
    const Vector d = (Vector(3) << 3, 2, 1).finished();
    const EigenPair e = truncated_eig(Matrix(d.asDiagonal()), 2);
    CHECK(e.values(0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.values(1) == doctest::Approx(2.0).epsilon(1e-14));
    Matrix expected = Matrix::Zero(3, 3);
    expected(0, 0) = 3;
    expected(1, 1) = 2;
    CHECK((reconstruct(e).mat() - expected).norm() < 1e-14);
  }
  SUBCASE("exact rank-k input is a fixed point") {
    oracle::Gen gen(21);
    const Matrix q = gen.orthonormal(8, 3);
    const Matrix a = q * gen.spectrum(3).asDiagonal() * q.transpose();
    CHECK((reconstruct(truncated_eig(a, 3)).mat() - a).norm() < 1e-10);
  }
  SUBCASE("truncation error equals the discarded spectrum") {
    oracle::Gen gen(22);
    const Matrix a = gen.symmetric(8);
    const auto full = oracle::jacobi_eig(a);
    const EigenPair e = truncated_eig(a, 3);
    CHECK((e.values - full.values.head(3)).norm() < 1e-10);
    CHECK((reconstruct(e).mat() - oracle::truncate_full(a, 3)).norm() < 1e-10);
    const double err = (a - reconstruct(e).mat()).norm();
    CHECK(std::abs(err - full.values.tail(5).norm()) < 1e-10);
  }
  SUBCASE("keeps negative values and orthonormal vectors") {
    const Vector d = (Vector(4) << -1, -2, -3, -4).finished();
    const EigenPair e = truncated_eig(Matrix(d.asDiagonal()), 2);
    CHECK(e.values(0) == doctest::Approx(-1.0));
    CHECK(e.values(1) == doctest::Approx(-2.0));
    CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(2, 2)).norm() < 1e-12);
  }
  SUBCASE("k out of range") {
    CHECK_THROWS_AS(truncated_eig(Matrix::Identity(3, 3), 0), Error);
    CHECK_THROWS_AS(truncated_eig(Matrix::Identity(3, 3), 4), Error);
  }
}

TEST_CASE("property: adjoint identity and linearity of g") {
  oracle::Gen gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = gen.integer(1, 20);
    const Matrix y1 = gen.symmetric(n);
    const Matrix y2 = gen.symmetric(n);
    const Matrix r = gen.symmetric(n);
    const double lhs = frob_inner(edm_from_gram(SymmetricMatrix(y1)).mat(), r);
    const double rhs = frob_inner(y1, edm_adjoint(r).mat());
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(frob_inner(y1, r))));

    const double a = gen.normal(), b = gen.normal();
    const Matrix combined = edm_from_gram(SymmetricMatrix(a * y1 + b * y2)).mat();
    const Matrix separate =
        a * edm_from_gram(SymmetricMatrix(y1)).mat() + b * edm_from_gram(SymmetricMatrix(y2)).mat();
    CHECK((combined - separate).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + separate.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("property: apply_mask is idempotent") {
  oracle::Gen gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = gen.integer(2, 15);
    std::vector<SampleSet::Pair> pairs;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (gen.uniform(0, 1) < 0.4) pairs.emplace_back(i, j);
    const SampleSet e(n, pairs);
    const SymmetricMatrix once = apply_mask(SymmetricMatrix(gen.symmetric(n)), e);
    CHECK(apply_mask(once, e).mat() == once.mat());
  }
}

TEST_CASE("property: EDMs of real points") {
  oracle::Gen gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Index k = gen.integer(1, 3);
    const Index n = gen.integer(k + 3, 25);
    const Matrix x = gen.gaussian(n, k);
    const SymmetricMatrix d = edm_from_gram(SymmetricMatrix(x * x.transpose()));
    CHECK(d.mat().diagonal().isZero(0.0));
    double worst = 0.0;
    auto dist = [&](Index a, Index b) { return std::sqrt(std::max(0.0, d(a, b))); };
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index l = 0; l < n; ++l) worst = std::max(worst, dist(i, j) - dist(i, l) - dist(l, j));
    CHECK(worst <= 1e-9);

    const auto e = oracle::jacobi_eig(d.mat());
    const double top = e.values.cwiseAbs().maxCoeff();
    const auto rank = (e.values.array().abs() > 1e-9 * top).count();
    CHECK(rank <= k + 2);
  }
}
