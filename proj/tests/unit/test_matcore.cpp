#include <gtest/gtest.h>

#include <random>

#include "nsynth/matcore.hpp"

using namespace nsynth;

namespace {

SymMatrix random_sym(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = nd(rng);
  return SymMatrix(m);
}

}  // namespace

TEST(SymEig, Identity) {
  const auto e = sym_eig(SymMatrix::Identity(2));
  EXPECT_DOUBLE_EQ(e.values(0), 1.0);
  EXPECT_DOUBLE_EQ(e.values(1), 1.0);
}

TEST(SymEig, DiagonalAscending) {
  Matrix d(2, 2);
  d << 3, 0, 0, -1;
  const auto e = sym_eig(SymMatrix(d));
  EXPECT_NEAR(e.values(0), -1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 3.0, 1e-14);
}

TEST(SymEig, Reconstruction) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const SymMatrix s = random_sym(rng, 5);
    const auto e = sym_eig(s);
    const Matrix r = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LE((r - s.matrix()).norm(), 1e-10 * s.matrix().norm());
    EXPECT_LE((e.vectors.transpose() * e.vectors -
               Matrix::Identity(5, 5)).norm(), 1e-12);
  }
}

TEST(SymMatrix, ExactSymmetry) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  const SymMatrix s(m);
  EXPECT_EQ(s(0, 1), s(1, 0));
  EXPECT_DOUBLE_EQ(s(0, 1), 2.5);
}

TEST(Definiteness, Basic) {
  EXPECT_TRUE(definiteness(SymMatrix::Identity(3), Definiteness::PD));
  EXPECT_FALSE(definiteness(SymMatrix::Zero(3), Definiteness::PD));
  EXPECT_TRUE(definiteness(SymMatrix::Zero(3), Definiteness::PSD));
  EXPECT_TRUE(definiteness(-SymMatrix::Identity(4), Definiteness::ND));
  EXPECT_FALSE(definiteness(-SymMatrix::Identity(4), Definiteness::PSD));
}

TEST(SchurComplement, TwoByTwo) {
  Matrix m(2, 2);
  m << 2, 1, 1, 1;
  const SymMatrix s = schur_complement(SymMatrix(m), 1);
  ASSERT_EQ(s.dim(), 1);
  EXPECT_NEAR(s(0, 0), 1.0, 1e-15);
}

TEST(SchurComplement, BlockDiagonal) {
  Matrix a(2, 2);
  a << 3, 1, 1, 2;
  const SymMatrix s =
      schur_complement(SymMatrix(block_diag(a, Matrix::Identity(2, 2))), 2);
  EXPECT_LE((s.matrix() - a).norm(), 1e-15);
}

TEST(SchurComplement, NoiseFormEquivalence) {
  // [Phi11, W; W^T, -Phi22^{-1}] >= 0  iff  -Phi22^{-1} - W^T Phi11^{-1} W >= 0
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  int agree = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2, t = 3;
    Matrix w(n, t);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < t; ++j) w(i, j) = 0.6 * nd(rng);
    const Matrix phi11 = Matrix::Identity(n, n) * 1.5;
    const Matrix phi22inv = -Matrix::Identity(t, t);
    Matrix big(n + t, n + t);
    big << phi11, w, w.transpose(), -phi22inv;
    const bool lhs = definiteness(SymMatrix(big), Definiteness::PSD);
    const SymMatrix rhs(-phi22inv - w.transpose() * phi11.inverse() * w);
    agree += lhs == definiteness(rhs, Definiteness::PSD);
  }
  EXPECT_EQ(agree, 200);
}

TEST(MatrixCsv, RoundTrip) {
  Matrix m(2, 3);
  m << 1.0 / 3.0, -2, 1e-17, 4.5, 0, -1e300;
  const Matrix r = parse_matrix_csv(format_matrix_csv(m));
  EXPECT_EQ(r, m);
  EXPECT_THROW(parse_matrix_csv("1,2\n3\n"), std::invalid_argument);
  EXPECT_THROW(parse_matrix_csv("1,x\n"), std::invalid_argument);
}

TEST(Kernel, RankDeficient) {
  Matrix m(3, 3);
  m << 1, 1, 0, 1, 1, 0, 0, 0, 2;
  const Matrix k = sym_kernel(SymMatrix(m));
  ASSERT_EQ(k.cols(), 1);
  EXPECT_LE((m * k).norm(), 1e-12);
  EXPECT_EQ(numerical_rank(m), 2);
}
