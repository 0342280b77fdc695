#include <gtest/gtest.h>

#include "nsynth/experiments.hpp"
#include "nsynth/sigma.hpp"

using namespace nsynth;

namespace {

QmiForm comparison_n() {
  const auto fx = fixtures::comparison();
  return build_n(partition(fx.data), fx.model);
}

}  // namespace

TEST(BuildN, ComparisonFixture) {
  Matrix expected(3, 3);
  expected << 0, 0, 0.5,  //
      0, -1, 1.5,         //
      0.5, 1.5, -2.75;
  const QmiForm n = comparison_n();
  EXPECT_EQ(n.k(), 1);
  EXPECT_LE((n.mat().matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildN, ZeroData) {
  DataMatrices d{Matrix::Zero(2, 4), Matrix::Zero(2, 4), Matrix::Zero(1, 4)};
  const QmiForm n = build_n(d, from_energy_bound(SymMatrix::Identity(2), 4));
  Matrix expected = Matrix::Zero(5, 5);
  expected.topLeftCorner(2, 2).setIdentity();
  EXPECT_EQ(n.mat().matrix(), expected);
}

TEST(BuildN, N22Nsd) {
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    DataMatrices d{gaussian_matrix(rng, 3, 8), gaussian_matrix(rng, 3, 8),
                   gaussian_matrix(rng, 2, 8)};
    const QmiForm n = build_n(d, from_sample_norm_bound(0.5, 3, 8));
    EXPECT_TRUE(definiteness(SymMatrix(n.m22()), Definiteness::NSD));
  }
}

TEST(Membership, ComparisonFixture) {
  const QmiForm n = comparison_n();
  const Membership t = membership({Matrix::Ones(1, 1), Matrix::Ones(1, 1)}, n);
  EXPECT_TRUE(t.member);
  EXPECT_NEAR(t.margin, 0.25, 1e-12);
  EXPECT_FALSE(membership({Matrix::Constant(1, 1, 10.0),
                           Matrix::Constant(1, 1, 10.0)}, n).member);
}

TEST(Membership, AgreesWithReconstructedNoise) {
  Rng rng(21);
  const SystemPair truth = fixtures::sweep_system();
  const Matrix w = uniform_ball_columns(rng, 3, 12, 1.0);
  const DataSet ds = simulate(truth, gaussian_matrix(rng, 3, 1).col(0),
                              gaussian_matrix(rng, 2, 12), w);
  const DataMatrices d = partition(ds);
  const NoiseModel model = from_sample_norm_bound(1.0, 3, 12);
  const QmiForm n = build_n(d, model);
  for (int rep = 0; rep < 300; ++rep) {
    const SystemPair s{truth.a + 0.3 * gaussian_matrix(rng, 3, 3),
                       truth.b + 0.3 * gaussian_matrix(rng, 3, 2)};
    const Matrix wr = d.x_plus - s.a * d.x_minus - s.b * d.u_minus;
    EXPECT_EQ(membership(s, n).member, check_noise(model, wr).admissible);
  }
}

TEST(Slater, ComparisonFixture) {
  const SlaterResult s = slater_check(comparison_n(), 1);
  EXPECT_TRUE(s.satisfied);
  EXPECT_EQ(s.positive_eigenvalues, 1);
  ASSERT_TRUE(s.z_bar.has_value());
  EXPECT_GT(qmi_eval(comparison_n(), *s.z_bar)(0, 0), 0.0);
}

TEST(Slater, UnitBall) {
  Matrix m = Matrix::Identity(4, 4);
  m.bottomRightCorner(2, 2) *= -1.0;
  const SlaterResult s = slater_check(QmiForm(SymMatrix(m), 2), 2);
  EXPECT_TRUE(s.satisfied);
}

TEST(Slater, NegativeDefinite) {
  const SlaterResult s = slater_check(QmiForm(-SymMatrix::Identity(3), 1), 1);
  EXPECT_FALSE(s.satisfied);
}

TEST(Bounded, Cases) {
  const DataMatrices d = partition(fixtures::comparison().data);
  EXPECT_TRUE(is_bounded(d.x_minus, d.u_minus));
  EXPECT_FALSE(is_bounded(Matrix::Zero(1, 3), Matrix::Zero(1, 3)));
  Rng rng(3);
  EXPECT_TRUE(is_bounded(gaussian_matrix(rng, 3, 10), gaussian_matrix(rng, 2, 10)));
}

TEST(SampleSigma, CenterAndMembers) {
  const QmiForm n = comparison_n();
  const Ellipsoid e = ellipsoid_of(n);
  EXPECT_TRUE(membership(unstack_z(e.center, 1), n).member);
  for (const auto& s : sample_sigma(n, 1000, 5, SampleMode::Interior)) {
    ASSERT_TRUE(membership(s, n).member);
  }
}

TEST(SampleSigma, BoundaryIsTight) {
  const QmiForm n = comparison_n();
  const double scale = spectral_scale(n.mat());
  for (const auto& s : sample_sigma(n, 200, 6, SampleMode::Boundary)) {
    const Membership m = membership(s, n);
    EXPECT_TRUE(m.member);
    EXPECT_LE(std::abs(m.margin), 1e-6 * scale);
  }
}

TEST(DataQmi, EllipsoidMatchesExplicit) {
  const auto fx = fixtures::comparison();
  const DataQmi q = build_data_qmi(partition(fx.data), fx.model);
  ASSERT_TRUE(q.ellipsoid.has_value());
  const Ellipsoid e = ellipsoid_of(q.n);
  EXPECT_LE((q.ellipsoid->center - e.center).norm(), 1e-12);
  EXPECT_NEAR(q.ellipsoid->delta(0, 0), e.delta(0, 0), 1e-12);
}
