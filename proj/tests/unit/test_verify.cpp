#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nsynth/experiments.hpp"
#include "nsynth/verify.hpp"

using namespace nsynth;

namespace {

ClosedLoop scalar(double a, double c) {
  return {Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, c)};
}

Controller reference_controller() {
  Controller c;
  c.k = Matrix::Constant(1, 1, -1.5);
  c.p = SymMatrix::Scalar(0.9);
  return c;
}

}  // namespace

TEST(SpectralRadius, Cases) {
  EXPECT_DOUBLE_EQ(spectral_radius(Matrix::Constant(1, 1, -0.5)), 0.5);
  EXPECT_DOUBLE_EQ(spectral_radius(Matrix::Zero(3, 3)), 0.0);
  const double r = 0.8, th = 0.7;
  Matrix rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  EXPECT_NEAR(spectral_radius(r * rot), r, 1e-14);
}

TEST(Dlyap, Cases) {
  const SymMatrix q(Matrix::Identity(2, 2) * 3.0);
  EXPECT_LE((dlyap(Matrix::Zero(2, 2), q).matrix() - q.matrix()).norm(), 1e-14);
  EXPECT_NEAR(dlyap(Matrix::Constant(1, 1, 0.6), SymMatrix::Scalar(1.0))(0, 0),
              1.0 / (1.0 - 0.36), 1e-13);
  Rng rng(2);
  Matrix a = gaussian_matrix(rng, 4, 4);
  a *= 0.9 / spectral_radius(a);
  const SymMatrix p = dlyap(a, SymMatrix::Identity(4));
  EXPECT_LE((a * p.matrix() * a.transpose() - p.matrix() +
             Matrix::Identity(4, 4)).norm(), 1e-10 * p.matrix().norm());
  EXPECT_THROW(dlyap(Matrix::Constant(1, 1, 1.5), SymMatrix::Scalar(1.0)),
               std::domain_error);
}

TEST(H2Norm, Analytic) {
  EXPECT_NEAR(h2_norm(scalar(0.5, 2.0)), std::sqrt(4.0 / 0.75), 1e-12);
  Matrix c(2, 2);
  c << 1, 2, 3, 4;
  EXPECT_NEAR(h2_norm({Matrix::Zero(2, 2), c}), c.norm(), 1e-12);
}

TEST(H2Norm, SdpAgrees) {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix a = gaussian_matrix(rng, 3, 3);
    a *= 0.8 / spectral_radius(a);
    const ClosedLoop cl{a, gaussian_matrix(rng, 2, 3)};
    const double g = h2_norm(cl);
    EXPECT_NEAR(h2_norm_sdp(cl), g, 1e-6 * g);
  }
}

TEST(HinfNorm, Analytic) {
  EXPECT_NEAR(hinf_norm(scalar(0.5, 2.0)), 4.0, 1e-6 * 4.0);
  EXPECT_NEAR(hinf_norm_grid(scalar(0.5, 2.0)), 4.0, 1e-9);
  EXPECT_NEAR(hinf_norm_grid(scalar(-0.5, 1.0)), 2.0, 1e-9);
  EXPECT_DOUBLE_EQ(hinf_norm_grid({Matrix::Constant(1, 1, 0.3), Matrix::Zero(1, 1)}),
                   0.0);
  Matrix c(2, 2);
  c << 1, 2, 3, 4;
  const double smax = Eigen::JacobiSVD<Matrix>(c).singularValues()(0);
  EXPECT_NEAR(hinf_norm_grid({Matrix::Zero(2, 2), c}), smax, 1e-9 * smax);
}

TEST(ModelBasedH2, Aircraft) {
  const double g = model_based_optimal_h2(fixtures::aircraft_system(),
                                          fixtures::aircraft_spec());
  EXPECT_NEAR(g, 1.000, 0.005);
}

TEST(ModelBasedH2, ZeroOutput) {
  const SystemPair sys{Matrix::Zero(2, 2), Matrix::Identity(2, 2)};
  PerformanceSpec spec{Matrix::Zero(1, 2), Matrix::Zero(1, 2), std::nullopt};
  EXPECT_LT(model_based_optimal_h2(sys, spec), 1e-2);
}

TEST(ModelBasedH2, ScalarGridSearch) {
  const SystemPair sys{Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1)};
  const PerformanceSpec spec{Matrix::Ones(1, 1), Matrix::Zero(1, 1), std::nullopt};
  double best = 1e9;
  for (int i = 0; i <= 50000; ++i) {
    const double k = -3.0 + 1e-4 * i;
    const double a = 0.5 + k;
    if (std::abs(a) >= 1.0) continue;
    best = std::min(best, h2_norm(scalar(a, 1.0)));
  }
  EXPECT_NEAR(model_based_optimal_h2(sys, spec), best, 1e-4);
}

TEST(RobustVerify, ComparisonController) {
  const auto fx = fixtures::comparison();
  const QmiForm n = build_n(partition(fx.data), fx.model);
  const RobustReport r =
      robust_verify(reference_controller(), n, nullptr, PerformanceKind::None, 1000, 3);
  EXPECT_EQ(r.samples, 1000);
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.pass_spectral, 1000);
}

TEST(RobustVerify, CorruptedController) {
  const auto fx = fixtures::comparison();
  const QmiForm n = build_n(partition(fx.data), fx.model);
  Controller c = reference_controller();
  c.k *= -1.0;
  const RobustReport r = robust_verify(c, n, nullptr, PerformanceKind::None, 500, 3);
  EXPECT_FALSE(r.all_pass());
  EXPECT_LT(r.pass_spectral, 500);
}

TEST(RobustVerify, Empty) {
  const auto fx = fixtures::comparison();
  const QmiForm n = build_n(partition(fx.data), fx.model);
  const RobustReport r =
      robust_verify(reference_controller(), n, nullptr, PerformanceKind::None, 0, 3);
  EXPECT_EQ(r.samples, 0);
  EXPECT_TRUE(r.all_pass());
}
