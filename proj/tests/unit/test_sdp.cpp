#include <gtest/gtest.h>

#include <chrono>

#include "nsynth/experiments.hpp"
#include "nsynth/sdp.hpp"
#include "nsynth/sigma.hpp"
#include "nsynth/synth.hpp"

using namespace nsynth;

namespace {

SynthProblem comparison_fs() {
  const auto fx = fixtures::comparison();
  return build_fs_problem(build_n(partition(fx.data), fx.model), 1, 1,
                          std::nullopt);
}

Vector reference_point(const SynthProblem& fs) {
  Vector x = Vector::Zero(fs.sdp.num_scalars());
  fs.sdp.assign(fs.p, Matrix::Constant(1, 1, 0.9), &x);
  fs.sdp.assign(fs.l, Matrix::Constant(1, 1, -1.35), &x);
  fs.sdp.assign(fs.alpha, Matrix::Constant(1, 1, 1.1), &x);
  fs.sdp.assign(fs.beta, Matrix::Constant(1, 1, 0.18), &x);
  return x;
}

}  // namespace

TEST(Solve, ScalarLowerBound) {
  SdpProblem p;
  const int x = p.add_scalar("x");
  p.add_psd(p.var(x) - Matrix::Ones(1, 1));
  p.maximize(-p.scalar(x));
  const SolveResult r = solve(p);
  ASSERT_EQ(r.report.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-7);
  EXPECT_TRUE(verify_assignment(p, r.x).feasible);
}

TEST(Solve, InfeasibleWithCertificate) {
  SdpProblem p;
  const int x = p.add_scalar("x");
  p.add_psd(p.var(x) - Matrix::Ones(1, 1));
  p.add_psd(-p.var(x));
  const SolveResult r = solve(p);
  ASSERT_EQ(r.report.status, SolveStatus::Infeasible);
  EXPECT_LE(certificate_residual(p, r.report.certificate), 1e-8);
}

TEST(Solve, MatrixVariable) {
  // min tr X s.t. X >= [2 1; 1 2]
  SdpProblem p;
  const int x = p.add_symmetric("X", 2);
  Matrix c(2, 2);
  c << 2, 1, 1, 2;
  p.add_psd(p.var(x) - c);
  p.minimize(p.var(x).trace().entry(0, 0));
  const SolveResult r = solve(p);
  ASSERT_EQ(r.report.status, SolveStatus::Optimal);
  EXPECT_NEAR(p.value(x, r.x).trace(), 4.0, 1e-6);
}

TEST(Solve, Equalities) {
  SdpProblem p;
  const int a = p.add_scalar("a");
  const int b = p.add_scalar("b");
  p.add_equality(p.scalar(a) + p.scalar(b) - LinExpr(1.0));
  p.add_psd(p.var(a));
  p.add_psd(p.var(b));
  p.maximize(p.scalar(a) * 2.0 + p.scalar(b));
  const SolveResult r = solve(p);
  ASSERT_EQ(r.report.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.x(a), 1.0, 1e-6);
  EXPECT_NEAR(r.x(b), 0.0, 1e-6);
}

TEST(VerifyAssignment, ReferencePoint) {
  const SynthProblem fs = comparison_fs();
  const AssignmentCheck c = verify_assignment(fs.sdp, reference_point(fs));
  EXPECT_TRUE(c.feasible);
  EXPECT_GE(c.worst_eig, -1e-8);
}

TEST(VerifyAssignment, ZeroFails) {
  const SynthProblem fs = comparison_fs();
  EXPECT_FALSE(
      verify_assignment(fs.sdp, Vector::Zero(fs.sdp.num_scalars())).feasible);
}

TEST(Solve, FsRoundTripAndTiming) {
  const SynthProblem fs = comparison_fs();
  const auto start = std::chrono::steady_clock::now();
  const SolveResult r = solve(fs.sdp);
  const double sec = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(r.report.status, SolveStatus::Optimal);
  EXPECT_TRUE(verify_assignment(fs.sdp, r.x).feasible);
  EXPECT_LT(sec, 1.0);
}

TEST(StrictFeasibility, Verdicts) {
  SdpProblem p;
  const int x = p.add_scalar("x");
  p.add_psd(p.var(x) - Matrix::Ones(1, 1));
  p.add_psd(AffineMatrix(Matrix::Constant(1, 1, 3.0)) - p.var(x));
  const StrictFeasibility f = strict_feasibility(p);
  EXPECT_EQ(f.verdict, Feasibility::Feasible);
  EXPECT_NEAR(f.margin, 1.0, 1e-6);

  SdpProblem q;
  const int y = q.add_scalar("y");
  q.add_psd(q.var(y));
  q.add_psd(-q.var(y));
  const StrictFeasibility g = strict_feasibility(q);
  EXPECT_EQ(g.verdict, Feasibility::Infeasible);
  EXPECT_LE(g.certificate_residual, 1e-8);
}

TEST(AffineMatrix, Blocks) {
  SdpProblem p;
  const int x = p.add_full("X", 2, 1);
  const AffineMatrix b = AffineMatrix::Blocks(
      {{AffineMatrix::Identity(2), p.var(x)},
       {p.var(x).transpose(), AffineMatrix(Matrix::Ones(1, 1))}});
  Vector v(2);
  v << 3, 4;
  Matrix expected(3, 3);
  expected << 1, 0, 3, 0, 1, 4, 3, 4, 1;
  EXPECT_EQ(b.evaluate(v), expected);
}
