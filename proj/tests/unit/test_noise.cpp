#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "nsynth/data.hpp"
#include "nsynth/noise.hpp"

using namespace nsynth;

TEST(EnergyBound, ScalarFixture) {
  const NoiseModel m = from_energy_bound(SymMatrix::Scalar(1.0), 3);
  EXPECT_DOUBLE_EQ(m.phi11()(0, 0), 1.0);
  EXPECT_EQ(m.phi12(), Matrix::Zero(1, 3));
  EXPECT_EQ(m.phi22().matrix(), Matrix(-Matrix::Identity(3, 3)));
}

TEST(EnergyBound, AircraftScale) {
  const double bound = 1.35 * 750 * 0.005 * 0.005;
  const NoiseModel m = from_energy_bound(SymMatrix::Identity(6) * bound, 750);
  EXPECT_EQ(m.n(), 6);
  EXPECT_EQ(m.samples(), 750);
  EXPECT_NEAR(m.phi11()(3, 3), 0.0253125, 1e-15);
}

TEST(EnergyBound, ZeroBoundAdmitsOnlyZero) {
  const NoiseModel m = from_energy_bound(SymMatrix::Scalar(0.0), 3);
  EXPECT_TRUE(check_noise(m, Matrix::Zero(1, 3)).admissible);
  Matrix w = Matrix::Zero(1, 3);
  w(0, 1) = 1e-3;
  EXPECT_FALSE(check_noise(m, w).admissible);
}

TEST(SampleNormBound, Values) {
  const NoiseModel m = from_sample_norm_bound(0.5, 3, 20);
  EXPECT_LE((m.phi11().matrix() - 10.0 * Matrix::Identity(3, 3)).norm(), 1e-15);
  const NoiseModel s = from_sample_norm_bound(1.0, 1, 1);
  EXPECT_DOUBLE_EQ(s.phi11()(0, 0), 1.0);
}

TEST(SampleNormBound, BallColumnsAdmissible) {
  Rng rng(5);
  const NoiseModel m = from_sample_norm_bound(0.7, 3, 20);
  for (int rep = 0; rep < 200; ++rep) {
    const Matrix w = uniform_ball_columns(rng, 3, 20, 0.7);
    for (int j = 0; j < w.cols(); ++j) ASSERT_LE(w.col(j).squaredNorm(), 0.7);
    EXPECT_TRUE(check_noise(m, w).admissible);
  }
}

TEST(SampleCovariance, CenteringNeedsShift) {
  EXPECT_THROW(from_sample_covariance(SymMatrix::Scalar(1.0), 2, 0.0),
               std::invalid_argument);
  const NoiseModel m = from_sample_covariance(SymMatrix::Scalar(1.0), 2, 1e-6);
  EXPECT_LT(m.phi22()(0, 0) + m.phi22()(1, 1), 0.0);
  EXPECT_LT(sym_eig(m.phi22()).values.maxCoeff(), 0.0);
}

TEST(SampleCovariance, ZeroBound) {
  const NoiseModel m = from_sample_covariance(SymMatrix::Scalar(0.0), 4, 1e-3);
  EXPECT_TRUE(check_noise(m, Matrix::Zero(1, 4)).admissible);
  EXPECT_FALSE(check_noise(m, Matrix::Constant(1, 4, 0.1)).admissible);
}

TEST(EmbedSubspace, Identity) {
  const NoiseModel hat = from_energy_bound(SymMatrix::Identity(2) * 2.0, 3);
  const NoiseModel m = embed_subspace(Matrix::Identity(2, 2), hat);
  EXPECT_EQ(m.phi11().matrix(), hat.phi11().matrix());
  EXPECT_EQ(m.phi22().matrix(), hat.phi22().matrix());
}

TEST(EmbedSubspace, RestrictsDirection) {
  const NoiseModel hat = from_energy_bound(SymMatrix::Scalar(1.0), 3);
  Matrix e(2, 1);
  e << 1, 0;
  const NoiseModel m = embed_subspace(e, hat);
  Matrix w = Matrix::Zero(2, 3);
  w.row(0).setConstant(0.5);
  EXPECT_TRUE(check_noise(m, w).admissible);
  w(1, 2) = 0.1;
  EXPECT_FALSE(check_noise(m, w).admissible);
}

TEST(EmbedSubspace, ZeroMap) {
  const NoiseModel hat = from_energy_bound(SymMatrix::Scalar(1.0), 2);
  const NoiseModel m = embed_subspace(Matrix::Zero(2, 1), hat);
  EXPECT_TRUE(check_noise(m, Matrix::Zero(2, 2)).admissible);
  EXPECT_FALSE(check_noise(m, Matrix::Constant(2, 2, 0.01)).admissible);
}

TEST(CheckNoise, ComparisonFixture) {
  const NoiseModel m = from_energy_bound(SymMatrix::Scalar(1.0), 3);
  const NoiseCheck c = check_noise(m, Matrix::Constant(1, 3, 0.5));
  EXPECT_TRUE(c.admissible);
  EXPECT_NEAR(c.margin, 0.25, 1e-15);
  EXPECT_FALSE(check_noise(m, Matrix::Constant(1, 3, 2.0)).admissible);
}

TEST(Transposed, SelfDual) {
  const NoiseModel m = from_energy_bound(SymMatrix::Identity(2), 2);
  const TransposedModel t = to_transposed_model(m);
  EXPECT_LE((t.q11.matrix() - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LE((t.q22.matrix() + Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Transposed, SameAdmissibleSet) {
  const NoiseModel m = from_energy_bound(SymMatrix::Identity(2) * 2.0, 3);
  const TransposedModel t = to_transposed_model(m);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 100; ++rep) {
    Matrix w(2, 3);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) w(i, j) = 0.9 * nd(rng);
    const bool a = check_noise(m, w).admissible;
    const SymMatrix q(t.q11.matrix() + t.q12 * w + w.transpose() * t.q12.transpose() +
                      w.transpose() * t.q22.matrix() * w);
    EXPECT_EQ(a, definiteness(q, Definiteness::PSD));
  }
}

TEST(Transposed, SingularPhi11) {
  const NoiseModel m = from_energy_bound(SymMatrix::Zero(2), 2);
  EXPECT_THROW(to_transposed_model(m), std::invalid_argument);
}

TEST(NoiseFiles, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "nsynth_noise_rt";
  const NoiseModel m = from_sample_covariance(SymMatrix::Identity(2), 4, 1e-3);
  write_noise_model(m, dir);
  const NoiseModel r = read_noise_model(dir);
  EXPECT_EQ(r.phi11().matrix(), m.phi11().matrix());
  EXPECT_EQ(r.phi12(), m.phi12());
  EXPECT_EQ(r.phi22().matrix(), m.phi22().matrix());
  std::filesystem::remove_all(dir);
}

TEST(ComposeStacked, BlockDiagonal) {
  const NoiseModel a = from_energy_bound(SymMatrix::Scalar(1.0), 2);
  const NoiseModel b = from_energy_bound(SymMatrix::Scalar(2.0), 3);
  const NoiseModel c = compose_stacked({a, b});
  EXPECT_EQ(c.samples(), 5);
  EXPECT_DOUBLE_EQ(c.phi11()(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(c.phi22()(1, 2), 0.0);
}
