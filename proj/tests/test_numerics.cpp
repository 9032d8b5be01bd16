#include <gtest/gtest.h>

#include <random>

#include "gamblet/matrix_io.hpp"
#include "gamblet/numerics.hpp"
#include "support/oracles.hpp"

using namespace gamblet;

namespace {

Matrix tridiag(Index n, double off, double diag) {
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    m(i, i) = diag;
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = off;
  }
  return m;
}

}  // namespace

TEST(SymMatrix, RejectsNonSquareAndAsymmetric) {
  EXPECT_THROW(SymMatrix::from(Matrix::Zero(2, 3)), Error);
  Matrix m(2, 2);
  m << 1, 2, 3, 1;
  try {
    SymMatrix::from(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(SymMatrix, StoresExactSymmetry) {
  std::mt19937_64 rng(3);
  Matrix a = oracle::random_spd(7, 0.1, 10.0, rng);
  a(0, 1) += 1e-12;
  const SymMatrix s = SymMatrix::from(a);
  for (Index i = 0; i < 7; ++i)
    for (Index j = 0; j < 7; ++j) EXPECT_EQ(s(i, j), s(j, i));
}

TEST(Cholesky, DiagonalMatrix) {
  const auto f = cholesky(SymMatrix::diagonal({4.0, 9.0}));
  const Matrix l = f.lower();
  EXPECT_DOUBLE_EQ(l(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(l(1, 1), 3.0);
  EXPECT_DOUBLE_EQ(l(1, 0), 0.0);
}

TEST(Cholesky, TwoByTwoClosedForm) {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  const Matrix l = cholesky(SymMatrix::from(a)).lower();
  EXPECT_NEAR(l(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(l(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(l(1, 1), std::sqrt(2.0), 1e-15);
}

TEST(Cholesky, NotSpdAndSingular) {
  Matrix a(2, 2);
  a << 1, 2, 2, 1;
  try {
    cholesky(SymMatrix::from(a));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSPD);
  }
  Matrix s(2, 2);
  s << 1, 1, 1, 1;
  EXPECT_THROW(cholesky(SymMatrix::from(s)), Error);
}

TEST(Cholesky, AgreesWithTextbookFactorisation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 5 + 7 * trial;
    const Matrix a = oracle::random_spd(n, 1e-3, 1e3, rng);
    Matrix l_ref;
    ASSERT_TRUE(oracle::naive_cholesky(a, l_ref));
    const CholFactor f = cholesky(SymMatrix::from(a));
    EXPECT_LT((f.lower() - l_ref).norm() / l_ref.norm(), 1e-12);
    EXPECT_LT((f.reconstruct() - a).norm() / a.norm(), 1e-13);
  }
}

TEST(SolveSpd, MatchesSubstitutionAndChecksLength) {
  std::mt19937_64 rng(5);
  const Matrix a = oracle::random_spd(20, 0.5, 50.0, rng);
  Vector b = Vector::Random(20);
  Matrix l;
  ASSERT_TRUE(oracle::naive_cholesky(a, l));
  const Vector x = solve_spd(cholesky(SymMatrix::from(a)), b);
  EXPECT_LT((x - oracle::chol_solve(l, b)).norm(), 1e-12 * x.norm());
  EXPECT_LT((a * x - b).norm() / b.norm(), 1e-12);
  try {
    solve_spd(cholesky(SymMatrix::from(a)), Vector(Vector::Ones(3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(SolveSpd, IdentityIsExact) {
  const Vector b = Vector::LinSpaced(6, -1.0, 2.0);
  EXPECT_EQ(solve_spd(cholesky(SymMatrix::identity(6)), b), b);
}

TEST(ExtremeEigs, DiagonalAndLaplacian) {
  const auto r = extreme_eigs(SymMatrix::diagonal({1.0, 5.0, 3.0}));
  EXPECT_NEAR(r.min, 1.0, 1e-12);
  EXPECT_NEAR(r.max, 5.0, 1e-12);
  for (Index n : {10, 40, 200}) {
    const auto e = extreme_eigs(SymMatrix::from(tridiag(n, -1.0, 2.0)));
    const double th = M_PI / static_cast<double>(n + 1);
    EXPECT_NEAR(e.min, 2.0 - 2.0 * std::cos(th), 1e-10 * e.max);
    EXPECT_NEAR(e.max, 2.0 + 2.0 * std::cos(th), 1e-10 * e.max);
  }
}

TEST(ExtremeEigs, LanczosFallbackForIndefiniteMatrix) {
  // n above the dense threshold; Cholesky fails so the bottom comes from Lanczos on M.
  std::mt19937_64 rng(7);
  const Index n = 1100;
  Vector d = Vector::LinSpaced(n, -3.0, 20.0);
  d(n - 1) = 30.0;
  std::normal_distribution<double> g;
  Matrix x(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) x(i, j) = g(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(x).householderQ();
  const auto e = extreme_eigs(SymMatrix::from(Matrix(q * d.asDiagonal() * q.transpose()), 1e-10));
  EXPECT_NEAR(e.max, 30.0, 1e-8);
  EXPECT_NEAR(e.min, -3.0, 1e-6);
}

TEST(ExtremeEigs, LanczosAgreesWithDenseOnRandomSpd) {
  std::mt19937_64 rng(99);
  const Matrix a = oracle::random_spd(1100, 0.01, 20.0, rng);
  const auto e = extreme_eigs(SymMatrix::from(a));
  EXPECT_NEAR(e.min, 0.01, 1e-8);
  EXPECT_NEAR(e.max, 20.0, 1e-8);
}

TEST(ChiSquare, ClosedFormTwoDof) {
  for (double p : {0.05, 0.3, 0.5, 0.95, 0.999}) EXPECT_NEAR(chi_square_quantile(2, p), -2.0 * std::log1p(-p), 1e-9);
}

TEST(ChiSquare, TabulatedValues) {
  EXPECT_NEAR(chi_square_quantile(1, 0.95), 3.841458820694124, 1e-9);
  EXPECT_NEAR(chi_square_quantile(10, 0.95), 18.307038053275146, 1e-8);
}

TEST(ChiSquare, WilsonHilfertyForLargeDof) {
  for (int dof : {256, 1024, 4096}) {
    const double x = chi_square_quantile(dof, 0.95);
    EXPECT_NEAR(x, oracle::wilson_hilferty(dof, 0.95), 1e-3 * x);
  }
}

TEST(ChiSquare, RejectsBadProbability) {
  for (double p : {0.0, 1.0, -0.1, 1.5}) {
    try {
      chi_square_quantile(3, p);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidProbability);
    }
  }
}

TEST(ChiSquare, MonotoneInProbability) {
  double prev = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double x = chi_square_quantile(17, i / 100.0);
    EXPECT_GT(x, prev);
    prev = x;
  }
}

TEST(MatrixIo, CsvRoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix m(4, 3);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) m(i, j) = g(rng) * std::pow(10.0, static_cast<double>(i * 3 - 5));
  std::stringstream ss;
  write_csv(ss, m);
  const Matrix back = read_csv(ss);
  EXPECT_EQ(back, m);
}
