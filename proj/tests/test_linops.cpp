#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pha/linops.hpp"

using namespace pha;

TEST(Dot, SmallCases) {
  EXPECT_EQ(dot(Vector{{1.0, 2.0}}, Vector{{3.0, 4.0}}), 11.0);
  EXPECT_EQ(dot(Vector::Zero(2), Vector::Zero(2)), 0.0);
}

TEST(Dot, LengthMismatchThrows) { EXPECT_THROW(dot(Vector::Zero(2), Vector::Zero(3)), DimensionError); }

TEST(Dot, MatchesCompensatedSum) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = oracle::random_vector(rng, 100);
    const Vector y = oracle::random_vector(rng, 100);
    const long double ref = oracle::dot(x, y);
    // Relative to the magnitude of the summands, since the sum itself may cancel.
    long double scale = 0.0L;
    for (Index i = 0; i < x.size(); ++i) scale += std::fabs(static_cast<long double>(x[i]) * y[i]);
    EXPECT_LE(std::fabs(dot(x, y) - ref), 1e-12 * static_cast<double>(scale));
  }
}

TEST(LinearOperator, AdjointIdentityDenseAndSparse) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Index p = 1 + static_cast<Index>(rng.below(50));
    const Index q = 1 + static_cast<Index>(rng.below(50));
    DenseMatrix m = oracle::random_matrix(rng, p, q);
    for (const auto& K : {LinearOperator(m), LinearOperator(SparseMatrix(m.sparseView()))}) {
      const Vector u = oracle::random_vector(rng, q);
      const Vector v = oracle::random_vector(rng, p);
      const double lhs = K.apply(u).dot(v);
      const double rhs = u.dot(K.adjoint_apply(v));
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST(LinearOperator, ApplyDimensionChecked) {
  LinearOperator K(DenseMatrix::Ones(2, 3));
  EXPECT_THROW(K.apply(Vector::Zero(2)), DimensionError);
  EXPECT_THROW(K.adjoint_apply(Vector::Zero(3)), DimensionError);
}

TEST(OperatorNorm, Diagonal) {
  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const auto est = operator_norm(LinearOperator(d));
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(est.value, 3.0, 3e-10);
}

TEST(OperatorNorm, ZeroOperator) {
  const auto est = operator_norm(LinearOperator(DenseMatrix::Zero(2, 2)));
  EXPECT_TRUE(est.converged);
  EXPECT_EQ(est.value, 0.0);
}

TEST(OperatorNorm, StartVectorInNullSpace) {
  // K * ones = 0, so the default start vector is useless here.
  DenseMatrix m(1, 2);
  m << 1.0, -1.0;
  EXPECT_NEAR(operator_norm(LinearOperator(m)).value, std::sqrt(2.0), 1e-9);
}

TEST(OperatorNorm, MatchesJacobiSvdSeed7) {
  Rng rng(7);
  const DenseMatrix K = oracle::random_matrix(rng, 5, 5);
  const double ref = oracle::largest_singular_value(K);
  const auto est = operator_norm(LinearOperator(K));
  EXPECT_TRUE(est.converged);
  EXPECT_LE(std::abs(est.value - ref), 1e-8 * ref);
}

TEST(OperatorNorm, BoundsEveryRayleighRatio) {
  Rng rng(21);
  const DenseMatrix m = oracle::random_matrix(rng, 30, 20);
  const LinearOperator K(m);
  const double tol = 1e-10;
  const double nk = operator_norm(K, tol).value;
  for (int i = 0; i < 100; ++i) {
    const Vector x = oracle::random_vector(rng, 20).normalized();
    EXPECT_GE(nk, K.apply(x).norm() - tol * nk);
  }
}

TEST(OperatorNorm, AbsoluteHomogeneity) {
  Rng rng(5);
  const DenseMatrix m = oracle::random_matrix(rng, 12, 9);
  const LinearOperator K(m);
  const double tol = 1e-10;
  const double base = operator_norm(K, tol).value;
  for (int i = 0; i < 10; ++i) {
    const double c = rng.uniform(-5.0, 5.0);
    const double scaled = operator_norm(K.scaled(c), tol).value;
    EXPECT_LE(std::abs(scaled - std::abs(c) * base), 2.0 * tol * std::abs(c) * base + 1e-300);
  }
}

TEST(OperatorNorm, SparseAgreesWithDense) {
  Rng rng(9);
  DenseMatrix m = oracle::random_matrix(rng, 40, 25);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (rng.uniform01() > 0.1) m(i, j) = 0.0;
  const double dense = operator_norm(LinearOperator(m)).value;
  const double sparse = operator_norm(LinearOperator(SparseMatrix(m.sparseView()))).value;
  EXPECT_NEAR(dense, sparse, 1e-9 * dense);
  EXPECT_NEAR(dense, oracle::largest_singular_value(m), 1e-8 * dense);
}

TEST(OperatorNorm, RejectsBadArguments) {
  const LinearOperator K(DenseMatrix::Identity(2, 2));
  EXPECT_THROW(operator_norm(K, 1e-10, 0), ContractError);
  EXPECT_THROW(operator_norm(K, 0.0, 10), ContractError);
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  Rng a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 5; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
}
