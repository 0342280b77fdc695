#include <gtest/gtest.h>

#include "nsynth/baselines.hpp"
#include "nsynth/experiments.hpp"
#include "nsynth/verify.hpp"

using namespace nsynth;

TEST(DePersis, ComparisonInfeasible) {
  const DataMatrices d = partition(fixtures::comparison().data);
  const BaselineResult r = depersis_lmi(d.x_plus, d.x_minus, d.u_minus, 1.0);
  EXPECT_EQ(r.verdict, Feasibility::Infeasible);
  EXPECT_LE(r.certificate_residual, 1e-8);
}

TEST(DePersis, NoiselessFeasible) {
  Rng rng(8);
  const SystemPair sys = fixtures::sweep_system();
  const DataSet ds = simulate(sys, gaussian_matrix(rng, 3, 1).col(0),
                              gaussian_matrix(rng, 2, 6), Matrix::Zero(3, 6));
  const DataMatrices d = partition(ds);
  const BaselineResult r = depersis_lmi(d.x_plus, d.x_minus, d.u_minus, 1e-6);
  ASSERT_EQ(r.verdict, Feasibility::Feasible);
  ASSERT_TRUE(r.k.has_value());
  EXPECT_LT(spectral_radius(sys.a + sys.b * *r.k), 1.0);
}

TEST(DePersis, LongUnstableRunInfeasible) {
  // the open loop grows over 12 steps and X+ dominates the first block
  Rng rng(8);
  const SystemPair sys = fixtures::sweep_system();
  const DataSet ds = simulate(sys, gaussian_matrix(rng, 3, 1).col(0),
                              gaussian_matrix(rng, 2, 12), Matrix::Zero(3, 12));
  const DataMatrices d = partition(ds);
  const BaselineResult r = depersis_lmi(d.x_plus, d.x_minus, d.u_minus, 1e-6);
  EXPECT_EQ(r.verdict, Feasibility::Infeasible);
  EXPECT_LE(r.certificate_residual, 1e-8);
}

TEST(DePersis, ZeroData) {
  const BaselineResult r = depersis_lmi(Matrix::Zero(1, 3), Matrix::Zero(1, 3),
                                        Matrix::Zero(1, 3), 1.0);
  EXPECT_EQ(r.verdict, Feasibility::Infeasible);
}

TEST(Berberich, ComparisonInfeasible) {
  const DataMatrices d = partition(fixtures::comparison().data);
  const BaselineResult r =
      berberich_lmi(d.x_plus, d.x_minus, d.u_minus, -Matrix::Ones(1, 1),
                    Matrix::Identity(3, 3));
  EXPECT_EQ(r.verdict, Feasibility::Infeasible);
  EXPECT_LE(r.certificate_residual, 1e-8);
}

TEST(Berberich, ZeroData) {
  const BaselineResult r =
      berberich_lmi(Matrix::Zero(1, 3), Matrix::Zero(1, 3), Matrix::Zero(1, 3),
                    -Matrix::Ones(1, 1), Matrix::Identity(3, 3));
  EXPECT_EQ(r.verdict, Feasibility::Infeasible);
}

TEST(Comparison, Verdicts) {
  const ComparisonReport r = exp_comparison();
  EXPECT_TRUE(r.expected_verdicts());
  EXPECT_TRUE(r.reference_point_feasible);
  ASSERT_TRUE(r.closed_loop.has_value());
  EXPECT_LT(std::abs(*r.closed_loop), 1.0);
}

TEST(Comparison, StableUnderSolverTolerances) {
  const double factors[] = {0.1, 10.0};
  int runs = 0;
  for (double f : factors) {
    for (int which = 0; which < 5; ++which) {
      SynthSettings s;
      switch (which) {
        case 0: s.solver.feas_tol *= f; break;
        case 1: s.solver.gap_tol *= f; break;
        case 2: s.solver.feas_tol *= f; s.solver.gap_tol *= f; break;
        case 3: s.solver.feas_tol *= f; s.solver.gap_tol /= f; break;
        case 4: s.eps_strict *= f; s.beta_min *= f; break;
      }
      const ComparisonReport r = exp_comparison(s);
      EXPECT_TRUE(r.expected_verdicts()) << "factor " << f << " case " << which;
      ++runs;
    }
  }
  EXPECT_EQ(runs, 10);
}
