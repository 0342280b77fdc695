#include "nsynth/baselines.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace nsynth {

namespace {

AffineMatrix eye(int n, double s = 1.0) {
  return AffineMatrix(Matrix(s * Matrix::Identity(n, n)));
}

// Adds the problem's variables and equalities to `sdp` and returns the
// blocks that must be positive definite.
using Builder = std::function<std::vector<AffineMatrix>(SdpProblem&)>;

BaselineResult decide(const Builder& build, double margin,
                      const SolverSettings& s, Vector* x_out,
                      SdpProblem* p_out) {
  SdpProblem p;
  for (const auto& blk : build(p)) p.add_psd(blk);
  const StrictFeasibility f = strict_feasibility(p, margin, s);
  BaselineResult out;
  out.verdict = f.verdict;
  out.margin = f.margin;
  out.report = f.report;
  out.certificate_residual = f.certificate_residual;
  if (f.verdict == Feasibility::Feasible) {
    if (x_out) *x_out = f.x;
    if (p_out) *p_out = p;
  }
  return out;
}

void check_data(const Matrix& x_plus, const Matrix& x_minus,
                const Matrix& u_minus) {
  if (x_plus.rows() != x_minus.rows() || x_plus.cols() != x_minus.cols() ||
      u_minus.cols() != x_minus.cols() || x_minus.cols() < 1) {
    throw std::invalid_argument("baseline: inconsistent data matrices");
  }
}

}  // namespace

BaselineResult depersis_lmi(const Matrix& x_plus, const Matrix& x_minus,
                            const Matrix& u_minus, double gamma, double margin,
                            const SolverSettings& s) {
  check_data(x_plus, x_minus, u_minus);
  if (!(gamma > 0.0)) throw std::invalid_argument("depersis_lmi: gamma <= 0");
  const int n = static_cast<int>(x_minus.rows());
  const int t = static_cast<int>(x_minus.cols());
  const auto builder = [&](double alpha) {
    return [&, alpha](SdpProblem& p) {
      const int qid = p.add_full("Q", t, n);
      const AffineMatrix q = p.var(qid);
      const AffineMatrix xq = x_minus * q;
      p.add_equality(xq - xq.transpose());
      const AffineMatrix pq = x_plus * q;
      const Matrix xx = alpha * x_plus * x_plus.transpose();
      return std::vector<AffineMatrix>{
          AffineMatrix::Blocks({{xq - xx, pq}, {pq.transpose(), xq}}),
          AffineMatrix::Blocks({{eye(t), q}, {q.transpose(), xq}})};
    };
  };
  // alpha^2 / (4 + 2 alpha) = gamma at alpha = gamma + sqrt(gamma^2 + 4 gamma)
  const double alpha_min =
      (gamma + std::sqrt(gamma * gamma + 4.0 * gamma)) * (1.0 + 1e-9);
  Vector x;
  SdpProblem sol;
  BaselineResult out = decide(builder(alpha_min), margin, s, &x, &sol);
  if (out.verdict != Feasibility::Feasible) return out;
  const Matrix q = sol.value(0, x);
  const Matrix xq = x_minus * q;
  out.k = (u_minus * q) * xq.inverse();
  // the largest admissible alpha, for reporting
  double lo = alpha_min, hi = 1e6;
  if (decide(builder(hi), margin, s, nullptr, nullptr).verdict ==
      Feasibility::Feasible) {
    lo = hi;
  }
  for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (decide(builder(mid), margin, s, nullptr, nullptr).verdict ==
             Feasibility::Feasible
         ? lo
         : hi) = mid;
  }
  out.alpha = lo;
  return out;
}

BaselineResult berberich_lmi(const Matrix& x_plus, const Matrix& x_minus,
                             const Matrix& u_minus, const Matrix& q_w,
                             const Matrix& r_w, double margin,
                             const SolverSettings& s) {
  check_data(x_plus, x_minus, u_minus);
  const int n = static_cast<int>(x_minus.rows());
  const int t = static_cast<int>(x_minus.cols());
  if (q_w.rows() != n || q_w.cols() != n || r_w.rows() != t ||
      r_w.cols() != t) {
    throw std::invalid_argument("berberich_lmi: Q_w must be n x n, R_w T x T");
  }
  const Matrix r_inv = SymMatrix(r_w).matrix().ldlt().solve(
      Matrix::Identity(t, t));
  const auto build = [&](SdpProblem& p) {
    const int yid = p.add_symmetric("Y", n);
    const int mid = p.add_full("M", t, n);
    const AffineMatrix y = p.var(yid);
    const AffineMatrix m = p.var(mid);
    p.add_equality(x_minus * m - y);
    const AffineMatrix xm = x_plus * m;
    const AffineMatrix z_nn = AffineMatrix::Zero(n, n);
    const AffineMatrix lmi = AffineMatrix::Blocks(
        {{-y, z_nn, xm.transpose(), m.transpose()},
         {z_nn, AffineMatrix(q_w), eye(n), AffineMatrix::Zero(n, t)},
         {xm, eye(n), -y, AffineMatrix::Zero(n, t)},
         {m, AffineMatrix::Zero(t, n), AffineMatrix::Zero(t, n),
          AffineMatrix(Matrix(-r_inv))}});
    return std::vector<AffineMatrix>{-lmi};
  };
  Vector x;
  SdpProblem sol;
  BaselineResult out = decide(build, margin, s, &x, &sol);
  if (out.verdict == Feasibility::Feasible) {
    const Matrix y = sol.value(0, x);
    const Matrix m = sol.value(1, x);
    out.k = (u_minus * m) * y.inverse();
  }
  return out;
}

}  // namespace nsynth
