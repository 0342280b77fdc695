#include "nsynth/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nsynth {

ClosedLoop closed_loop(const SystemPair& sys, const Matrix& k,
                       const PerformanceSpec& spec) {
  if (k.rows() != sys.m() || k.cols() != sys.n()) {
    throw std::invalid_argument("closed_loop: K must be m x n");
  }
  spec.validate(sys.n(), sys.m());
  return {sys.a + sys.b * k, spec.c + spec.d * k};
}

double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("spectral_radius: matrix must be square");
  }
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SymMatrix dlyap(const Matrix& a, const SymMatrix& q) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || q.dim() != n) {
    throw std::invalid_argument("dlyap: dimension mismatch");
  }
  if (!(spectral_radius(a) < 1.0)) {
    throw std::domain_error("dlyap: matrix is not Schur stable");
  }
  if (n <= 60) {
    // vec(A P A^T) = (A kron A) vec(P)
    const int nn = n * n;
    Matrix sys = Matrix::Identity(nn, nn);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        sys.block(i * n, j * n, n, n) -= a(i, j) * a;
      }
    }
    const Vector vq = q.matrix().reshaped();
    const Vector vp = sys.partialPivLu().solve(vq);
    return SymMatrix(vp.reshaped(n, n));
  }
  // Smith doubling: P = sum_k A^k Q (A^k)^T
  Matrix p = q.matrix();
  Matrix ak = a;
  for (int it = 0; it < 200; ++it) {
    const Matrix inc = ak * p * ak.transpose();
    p += inc;
    ak = ak * ak;
    if (inc.norm() <= 1e-16 * p.norm()) break;
  }
  return SymMatrix(p);
}

double h2_norm(const ClosedLoop& cl) {
  const int n = static_cast<int>(cl.a_cl.rows());
  const SymMatrix w = dlyap(cl.a_cl, SymMatrix::Identity(n));
  return std::sqrt(
      std::max(0.0, (cl.c_cl * w.matrix() * cl.c_cl.transpose()).trace()));
}

double h2_norm_sdp(const ClosedLoop& cl, const SolverSettings& s) {
  const int n = static_cast<int>(cl.a_cl.rows());
  if (!(spectral_radius(cl.a_cl) < 1.0)) {
    throw std::domain_error("h2_norm_sdp: unstable closed loop");
  }
  SdpProblem sdp;
  const int pid = sdp.add_symmetric("P", n);
  const AffineMatrix p = sdp.var(pid);
  const Matrix ctc = cl.c_cl.transpose() * cl.c_cl;
  sdp.add_psd(p - cl.a_cl.transpose() * p * cl.a_cl - ctc, "lyapunov");
  sdp.minimize(p.trace().entry(0, 0));
  const SolveResult r = solve(sdp, s);
  if (r.report.status != SolveStatus::Optimal &&
      r.report.status != SolveStatus::Inaccurate) {
    throw std::runtime_error("h2_norm_sdp: solver returned " +
                             to_string(r.report.status));
  }
  return std::sqrt(std::max(0.0, sdp.value(pid, r.x).trace()));
}

namespace {

double gain_at(const ClosedLoop& cl, double w) {
  using C = std::complex<double>;
  const int n = static_cast<int>(cl.a_cl.rows());
  Eigen::MatrixXcd m = -cl.a_cl.cast<C>();
  m.diagonal().array() += std::polar(1.0, w);
  const Eigen::MatrixXcd g =
      cl.c_cl.cast<C>() * m.partialPivLu().solve(
                              Eigen::MatrixXcd::Identity(n, n));
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(g).singularValues()(0);
}

double golden_max(const ClosedLoop& cl, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = gain_at(cl, x1), f2 = gain_at(cl, x2);
  for (int it = 0; it < 100 && b - a > 1e-13; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = gain_at(cl, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = gain_at(cl, x1);
    }
  }
  return std::max(f1, f2);
}

// max t s.t. LMI(gamma) >= t I, t <= 1
bool hinf_feasible(const ClosedLoop& cl, double gamma) {
  const int n = static_cast<int>(cl.a_cl.rows());
  const int p = static_cast<int>(cl.c_cl.rows());
  SdpProblem sdp;
  const int yid = sdp.add_symmetric("Y", n);
  const int tid = sdp.add_scalar("t");
  const AffineMatrix y = sdp.var(yid);
  const AffineMatrix ay = cl.a_cl * y;
  const AffineMatrix cy = cl.c_cl * y;
  const double mu = 1.0 / (gamma * gamma);
  const AffineMatrix lmi = AffineMatrix::Blocks(
      {{y, ay.transpose(), cy.transpose()},
       {ay, y - AffineMatrix(Matrix(mu * Matrix::Identity(n, n))),
        AffineMatrix::Zero(n, p)},
       {cy, AffineMatrix::Zero(p, n),
        AffineMatrix(Matrix(Matrix::Identity(p, p)))}});
  const int dim = 2 * n + p;
  sdp.add_psd(lmi - AffineMatrix::Scaled(sdp.scalar(tid),
                                         Matrix::Identity(dim, dim)),
              "bounded-real");
  sdp.add_psd(AffineMatrix(Matrix::Ones(1, 1)) - sdp.var(tid), "t<=1");
  sdp.maximize(sdp.scalar(tid));
  const SolveResult r = solve(sdp);
  if (r.report.status == SolveStatus::Infeasible) return false;
  if (r.report.status != SolveStatus::Optimal &&
      r.report.status != SolveStatus::Inaccurate) {
    return false;
  }
  return r.x(sdp.variables()[tid].offset) > 1e-10;
}

}  // namespace

double hinf_norm_grid(const ClosedLoop& cl) {
  if (!(spectral_radius(cl.a_cl) < 1.0)) {
    throw std::domain_error("hinf_norm: unstable closed loop");
  }
  constexpr int kGrid = 4096;
  const double pi = std::numbers::pi;
  std::vector<double> g(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    g[i] = gain_at(cl, pi * i / (kGrid - 1));
  }
  double best = *std::max_element(g.begin(), g.end());
  // refine the five largest local peaks
  std::vector<int> peaks;
  for (int i = 0; i < kGrid; ++i) {
    const double left = i > 0 ? g[i - 1] : -1.0;
    const double right = i + 1 < kGrid ? g[i + 1] : -1.0;
    if (g[i] >= left && g[i] >= right) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(),
            [&](int a, int b) { return g[a] > g[b]; });
  if (peaks.size() > 5) peaks.resize(5);
  const double h = pi / (kGrid - 1);
  for (int i : peaks) {
    const double lo = std::max(0.0, (i - 1) * h);
    const double hi = std::min(pi, (i + 1) * h);
    best = std::max(best, golden_max(cl, lo, hi));
  }
  return best;
}

double hinf_norm(const ClosedLoop& cl, double tol) {
  const double grid = hinf_norm_grid(cl);
  if (grid <= 1e-14) return 0.0;
  double lo = 0.5 * grid;
  double hi = grid * (1.0 + tol);
  for (int it = 0; !hinf_feasible(cl, hi); ++it) {
    lo = hi;
    hi *= 2.0;
    if (it > 60) throw std::runtime_error("hinf_norm: no feasible level");
  }
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (hinf_feasible(cl, mid) ? hi : lo) = mid;
  }
  // the grid is a lower bound up to solver accuracy
  if (hi < grid * (1.0 - 1e-7) || hi > grid * (1.0 + 10.0 * tol)) {
    throw std::runtime_error("hinf_norm: bisection " + std::to_string(hi) +
                             " disagrees with frequency grid " +
                             std::to_string(grid));
  }
  return hi;
}

double model_based_optimal_h2(const SystemPair& sys,
                              const PerformanceSpec& spec,
                              const SolverSettings& s) {
  sys.validate();
  const int n = sys.n(), m = sys.m();
  spec.validate(n, m);
  const int p = spec.p();
  SdpProblem sdp;
  const int yid = sdp.add_symmetric("Y", n);
  const int lid = sdp.add_full("L", m, n);
  const int zid = sdp.add_symmetric("Z", n);
  const AffineMatrix y = sdp.var(yid);
  const AffineMatrix l = sdp.var(lid);
  const AffineMatrix z = sdp.var(zid);
  const AffineMatrix ayl = sys.a * y + sys.b * l;
  const AffineMatrix cyl = spec.c * y + spec.d * l;
  const double eps = 1e-6;
  const int dim = 2 * n + p;
  const AffineMatrix lmi = AffineMatrix::Blocks(
      {{y, ayl.transpose(), cyl.transpose()},
       {ayl, y, AffineMatrix::Zero(n, p)},
       {cyl, AffineMatrix::Zero(p, n),
        AffineMatrix(Matrix(Matrix::Identity(p, p)))}});
  sdp.add_psd(lmi - AffineMatrix(Matrix(eps * Matrix::Identity(dim, dim))),
              "H2");
  const AffineMatrix eye(Matrix(Matrix::Identity(n, n)));
  sdp.add_psd(AffineMatrix::Blocks({{z, eye}, {eye, y}}), "coupling");
  sdp.add_psd(AffineMatrix(Matrix(1e6 * Matrix::Identity(n, n))) - y,
              "Y<=cap");
  sdp.minimize(z.trace().entry(0, 0));
  const SolveResult r = solve(sdp, s);
  if (r.report.status != SolveStatus::Optimal &&
      r.report.status != SolveStatus::Inaccurate) {
    throw std::runtime_error("model_based_optimal_h2: solver returned " +
                             to_string(r.report.status));
  }
  if (r.report.status == SolveStatus::Inaccurate &&
      !verify_assignment(sdp, r.x, 1e-6).feasible) {
    throw std::runtime_error("model_based_optimal_h2: inaccurate solution");
  }
  return std::sqrt(std::max(0.0, sdp.value(zid, r.x).trace()));
}

bool RobustReport::all_pass() const {
  return pass_lyapunov == samples && pass_spectral == samples &&
         (!pass_performance || *pass_performance == samples);
}

std::string RobustReport::to_json() const {
  nlohmann::json j;
  j["samples"] = samples;
  j["pass_lyapunov"] = pass_lyapunov;
  j["pass_spectral"] = pass_spectral;
  if (pass_performance) j["pass_performance"] = *pass_performance;
  j["worst_margins"]["lyapunov"] = worst_lyapunov_margin;
  j["worst_margins"]["spectral_radius"] = worst_spectral_radius;
  if (worst_performance_ratio) {
    j["worst_margins"]["performance_ratio"] = *worst_performance_ratio;
  }
  j["seed"] = seed;
  return j.dump(2);
}

RobustReport robust_verify(const Controller& ctrl, const Ellipsoid& e, int n,
                           const PerformanceSpec* spec, PerformanceKind kind,
                           int count, std::uint64_t seed) {
  RobustReport rep;
  rep.seed = seed;
  if (count <= 0) return rep;
  const bool perf = spec != nullptr && kind != PerformanceKind::None;
  if (perf && !ctrl.gamma_achieved) {
    throw std::invalid_argument("robust_verify: controller has no gamma");
  }
  const int interior = count / 2;
  std::vector<SystemPair> sys =
      sample_sigma(e, n, interior, seed, SampleMode::Interior);
  const std::vector<SystemPair> bnd =
      sample_sigma(e, n, count - interior, seed + 1, SampleMode::Boundary);
  sys.insert(sys.end(), bnd.begin(), bnd.end());

  const Matrix& x = ctrl.lyapunov().matrix();
  const double xs = std::max(1e-300, max_eig(ctrl.lyapunov()));
  rep.samples = count;
  rep.worst_lyapunov_margin = std::numeric_limits<double>::infinity();
  if (perf) {
    rep.pass_performance = 0;
    rep.worst_performance_ratio = 0.0;
  }
  for (const SystemPair& s : sys) {
    const Matrix acl = s.a + s.b * ctrl.k;
    const double margin =
        min_eig(SymMatrix(x - acl * x * acl.transpose())) / xs;
    rep.worst_lyapunov_margin = std::min(rep.worst_lyapunov_margin, margin);
    if (margin > 0.0) ++rep.pass_lyapunov;
    const double rho = spectral_radius(acl);
    rep.worst_spectral_radius = std::max(rep.worst_spectral_radius, rho);
    if (rho < 1.0) ++rep.pass_spectral;
    if (perf) {
      double ratio = std::numeric_limits<double>::infinity();
      if (rho < 1.0) {
        const ClosedLoop cl{acl, spec->c + spec->d * ctrl.k};
        const double norm = kind == PerformanceKind::H2 ? h2_norm(cl)
                                                        : hinf_norm_grid(cl);
        ratio = norm / *ctrl.gamma_achieved;
      }
      rep.worst_performance_ratio =
          std::max(*rep.worst_performance_ratio, ratio);
      if (ratio < 1.0) ++*rep.pass_performance;
    }
  }
  return rep;
}

RobustReport robust_verify(const Controller& ctrl, const QmiForm& n_form,
                           const PerformanceSpec* spec, PerformanceKind kind,
                           int count, std::uint64_t seed) {
  if (count <= 0) {
    RobustReport rep;
    rep.seed = seed;
    return rep;
  }
  return robust_verify(ctrl, ellipsoid_of(n_form), n_form.k(), spec, kind,
                       count, seed);
}

}  // namespace nsynth
