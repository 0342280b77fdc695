#include <gtest/gtest.h>

#include "nsynth/experiments.hpp"
#include "nsynth/verify.hpp"

using namespace nsynth;

TEST(SynthStab, ComparisonFixture) {
  const auto fx = fixtures::comparison();
  const SynthResult r = synth_stab(partition(fx.data), fx.model);
  ASSERT_EQ(r.verdict, Verdict::Success);
  const double k = r.controller->k(0, 0);
  EXPECT_LT(std::abs(1.0 + k), 1.0);
  EXPECT_TRUE(r.slater.satisfied);
  EXPECT_DOUBLE_EQ(spectral_radius(Matrix::Constant(1, 1, 1.0 - 1.5)), 0.5);
}

TEST(SynthStab, NearlyNoiseless) {
  Rng rng(3);
  const SystemPair sys{Matrix::Constant(1, 1, 1.3), Matrix::Constant(1, 1, 0.7)};
  const DataSet ds = simulate(sys, Vector::Ones(1), gaussian_matrix(rng, 1, 6),
                              Matrix::Zero(1, 6));
  const NoiseModel m = from_energy_bound(SymMatrix::Scalar(1e-9), 6);
  const SynthResult r = synth_stab(partition(ds), m);
  ASSERT_EQ(r.verdict, Verdict::Success);
  EXPECT_LT(spectral_radius(sys.a + sys.b * r.controller->k), 1.0);
}

TEST(SynthStab, SweepSystemSmallNoise) {
  Rng rng(17);
  const SystemPair sys = fixtures::sweep_system();
  const Matrix w = uniform_ball_columns(rng, 3, 20, 0.05);
  const DataSet ds = simulate(sys, gaussian_matrix(rng, 3, 1).col(0),
                              gaussian_matrix(rng, 2, 20), w);
  const DataMatrices d = partition(ds);
  const SynthResult r = synth_stab(d, from_sample_norm_bound(0.05, 3, 20));
  ASSERT_EQ(r.verdict, Verdict::Success);
  EXPECT_LT(spectral_radius(sys.a + sys.b * r.controller->k), 1.0);
  EXPECT_TRUE(check_image_inclusion(r.controller->k, d.x_minus, d.u_minus));
}

TEST(SynthStab, HugeNoiseNotInformative) {
  const auto fx = fixtures::comparison();
  const SynthResult r = synth_stab(partition(fx.data),
                                   from_energy_bound(SymMatrix::Scalar(100.0), 3));
  EXPECT_TRUE(r.slater.satisfied);
  EXPECT_EQ(r.verdict, Verdict::NotInformative);
}

TEST(SynthMulti, SingleSampleMatchesAggregate) {
  Rng rng(2);
  const SystemPair sys{Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0)};
  DataSet ds = simulate(sys, Vector::Ones(1), Matrix::Constant(1, 1, 1.0),
                        Matrix::Constant(1, 1, 0.01));
  const DataMatrices d = partition(ds);
  const SynthResult a = synth_stab_multi(d, 0.01);
  const SynthResult b = synth_stab(d, from_sample_norm_bound(0.01, 1, 1));
  EXPECT_EQ(a.verdict == Verdict::Success, b.verdict == Verdict::Success);
}

TEST(SynthMulti, FeasibleImpliesAggregateFeasible) {
  Rng rng(33);
  const SystemPair sys = fixtures::sweep_system();
  for (int rep = 0; rep < 5; ++rep) {
    const DataSet ds = simulate(sys, gaussian_matrix(rng, 3, 1).col(0),
                                gaussian_matrix(rng, 2, 20),
                                uniform_ball_columns(rng, 3, 20, 0.1));
    const DataMatrices d = partition(ds);
    const SynthResult multi = synth_stab_multi(d, 0.1);
    ASSERT_EQ(multi.verdict, Verdict::Success);
    EXPECT_LT(spectral_radius(sys.a + sys.b * multi.controller->k), 1.0);
    EXPECT_TRUE(multi.controller->has_flag("conservative"));
  }
}

TEST(SynthH2, ZeroOutput) {
  Rng rng(4);
  const SystemPair sys = fixtures::sweep_system();
  const DataSet ds = simulate(sys, gaussian_matrix(rng, 3, 1).col(0),
                              gaussian_matrix(rng, 2, 20),
                              uniform_ball_columns(rng, 3, 20, 0.01));
  PerformanceSpec spec{Matrix::Zero(1, 3), Matrix::Zero(1, 2), std::nullopt};
  const SynthResult r =
      synth_h2(partition(ds), from_sample_norm_bound(0.01, 3, 20), spec);
  ASSERT_EQ(r.verdict, Verdict::Success);
  EXPECT_LT(*r.controller->gamma_achieved, 1e-2);
}

TEST(SynthH2, IdentitySubspace) {
  Rng rng(5);
  const SystemPair sys = fixtures::sweep_system();
  const DataSet ds = simulate(sys, gaussian_matrix(rng, 3, 1).col(0),
                              gaussian_matrix(rng, 2, 20),
                              uniform_ball_columns(rng, 3, 20, 0.01));
  const DataMatrices d = partition(ds);
  const NoiseModel m = from_sample_norm_bound(0.01, 3, 20);
  PerformanceSpec spec{Matrix::Identity(3, 3), Matrix::Zero(3, 2), std::nullopt};
  const SynthResult a = synth_h2(d, m, spec);
  const SynthResult b = synth_h2(d, m, spec, Matrix(Matrix::Identity(3, 3)));
  ASSERT_EQ(a.verdict, Verdict::Success);
  ASSERT_EQ(b.verdict, Verdict::Success);
  EXPECT_NEAR(*a.controller->gamma_achieved, *b.controller->gamma_achieved,
              1e-4 * *a.controller->gamma_achieved);
  const ClosedLoop cl = closed_loop(sys, a.controller->k, spec);
  EXPECT_LE(h2_norm(cl), *a.controller->gamma_achieved * (1 + 1e-6));
}

TEST(SynthHinf, SingletonMatchesNorm) {
  // two informative samples and no noise pin down (a, b)
  const SystemPair sys{Matrix::Constant(1, 1, 1.2), Matrix::Constant(1, 1, 1.0)};
  Matrix u(1, 2);
  u << 1.0, -0.5;
  const DataSet ds = simulate(sys, Vector::Ones(1), u, Matrix::Zero(1, 2));
  const NoiseModel m = from_energy_bound(SymMatrix::Scalar(1e-10), 2);
  PerformanceSpec spec{Matrix::Ones(1, 1), Matrix::Constant(1, 1, 0.1),
                       std::nullopt};
  SynthSettings s;
  s.hinf_form = HinfForm::Corrected;
  const SynthResult r = synth_hinf(partition(ds), m, spec, s);
  ASSERT_EQ(r.verdict, Verdict::Success);
  const ClosedLoop cl = closed_loop(sys, r.controller->k, spec);
  EXPECT_NEAR(hinf_norm_grid(cl), *r.controller->gamma_achieved,
              0.01 * *r.controller->gamma_achieved);
}

TEST(SynthHinf, LargeGammaWhenStabilizable) {
  const auto fx = fixtures::comparison();
  PerformanceSpec spec{Matrix::Ones(1, 1), Matrix::Zero(1, 1), 1e6};
  const DataMatrices d = partition(fx.data);
  ASSERT_EQ(synth_stab(d, fx.model).verdict, Verdict::Success);
  SynthSettings s;
  s.hinf_form = HinfForm::Corrected;
  EXPECT_EQ(synth_hinf(d, fx.model, spec, s).verdict, Verdict::Success);
}

TEST(SynthHinf, ZeroOutput) {
  const auto fx = fixtures::comparison();
  PerformanceSpec spec{Matrix::Zero(1, 1), Matrix::Zero(1, 1), 0.1};
  SynthSettings s;
  s.hinf_form = HinfForm::Corrected;
  EXPECT_EQ(synth_hinf(partition(fx.data), fx.model, spec, s).verdict,
            Verdict::Success);
}

TEST(ImageInclusion, Cases) {
  Rng rng(6);
  const Matrix xm = gaussian_matrix(rng, 2, 5), um = gaussian_matrix(rng, 1, 5);
  EXPECT_TRUE(check_image_inclusion(gaussian_matrix(rng, 1, 2), xm, um));
  EXPECT_FALSE(check_image_inclusion(Matrix::Ones(1, 2), Matrix::Zero(2, 5),
                                     Matrix::Zero(1, 5)));
}
