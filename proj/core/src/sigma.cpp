#include "nsynth/sigma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsynth {

QmiForm build_n(const DataMatrices& d, const NoiseModel& model) {
  const int n = d.n(), m = d.m(), t = d.samples();
  if (d.x_minus.rows() != n || d.x_minus.cols() != t ||
      d.u_minus.cols() != t) {
    throw std::invalid_argument("build_n: inconsistent data matrices");
  }
  if (model.n() != n || model.samples() != t) {
    throw std::invalid_argument("build_n: noise model dimensions differ");
  }
  Matrix r = Matrix::Zero(2 * n + m, n + t);
  r.topLeftCorner(n, n).setIdentity();
  r.topRightCorner(n, t) = d.x_plus;
  r.block(n, n, n, t) = -d.x_minus;
  r.block(2 * n, n, m, t) = -d.u_minus;
  return {SymMatrix(r * model.stacked() * r.transpose()), n};
}

DataQmi build_data_qmi(const DataMatrices& d, const NoiseModel& model,
                       const Tolerance& tol) {
  DataQmi out{build_n(d, model), std::nullopt};
  if (!is_bounded(d.x_minus, d.u_minus, tol)) return out;
  const int n = d.n(), m = d.m(), t = d.samples();
  // whitening: Phi22 = -L L^T
  Eigen::LLT<Matrix> llt(-model.phi22().matrix());
  if (llt.info() != Eigen::Success) return out;
  const Matrix l = llt.matrixL();
  const Matrix phi22_inv = model.phi22().matrix().ldlt().solve(
      Matrix::Identity(t, t));
  const Matrix xt = (d.x_plus + model.phi12() * phi22_inv) * l;
  Matrix dm(n + m, t);
  dm << d.x_minus, d.u_minus;
  const Matrix dt = (dm * l).transpose();  // T x (n+m)
  Eigen::HouseholderQR<Matrix> qr(dt);
  const Matrix q = qr.householderQ() * Matrix::Identity(t, n + m);
  const Matrix rr = qr.matrixQR().topRows(n + m).triangularView<Eigen::Upper>();
  const Matrix rinv = rr.triangularView<Eigen::Upper>().solve(
      Matrix::Identity(n + m, n + m));
  Ellipsoid e;
  e.center = rinv * (q.transpose() * xt.transpose());
  const Matrix res = xt.transpose() - dt * e.center;
  const Matrix psi = model.phi11().matrix() -
                     model.phi12() * phi22_inv * model.phi12().transpose();
  const SymMatrix delta(psi - res.transpose() * res);
  const auto [dl, dv] = sym_eig(delta);
  const double sc = std::max(1.0, dl.cwiseAbs().maxCoeff());
  if (dl(0) < -tol.eig_zero * sc) return out;  // empty set
  const Vector clipped = dl.cwiseMax(0.0);
  e.left = rinv;
  e.delta = SymMatrix(dv * clipped.asDiagonal() * dv.transpose());
  e.delta_sqrt = dv * clipped.cwiseSqrt().asDiagonal() * dv.transpose();
  e.scale = std::sqrt(std::max(clipped.maxCoeff(), 1e-300));
  out.ellipsoid = std::move(e);
  return out;
}

Matrix stack_z(const SystemPair& sys) {
  Matrix z(sys.n() + sys.m(), sys.n());
  z << sys.a.transpose(), sys.b.transpose();
  return z;
}

SystemPair unstack_z(const Matrix& z, int n) {
  const int m = static_cast<int>(z.rows()) - n;
  return {z.topRows(n).transpose(), z.bottomRows(m).transpose()};
}

Membership membership(const SystemPair& sys, const QmiForm& n_form,
                      const Tolerance& tol) {
  const SymMatrix v = qmi_eval(n_form, stack_z(sys));
  return {definiteness(v, Definiteness::PSD, tol), min_eig(v)};
}

namespace {

bool strictly_feasible(const QmiForm& f, const Matrix& z,
                       const Tolerance& tol) {
  return definiteness(qmi_eval(f, z), Definiteness::PD, tol);
}

int count_positive(const QmiForm& f, const Tolerance& tol) {
  const auto [lam, v] = sym_eig(f.mat());
  const double sc = std::max(1.0, lam.cwiseAbs().maxCoeff());
  return static_cast<int>((lam.array() > tol.strict_margin * sc).count());
}

SlaterResult random_search(const QmiForm& n_form, SlaterResult r,
                           const Tolerance& tol) {
  Rng rng(0x5eed5eedULL);
  const int q = n_form.q(), k = n_form.k();
  const int budget = 1000;
  for (int i = 0; i < budget; ++i) {
    // scales 1e-3 .. 1e3 on a logarithmic grid
    const double s = std::pow(10.0, -3.0 + 6.0 * (i % 25) / 24.0);
    const Matrix z = s * gaussian_matrix(rng, q, k);
    if (strictly_feasible(n_form, z, tol)) {
      r.satisfied = true;
      r.z_bar = z;
      return r;
    }
  }
  return r;
}

}  // namespace

SlaterResult slater_check(const QmiForm& n_form, int n, const Tolerance& tol) {
  SlaterResult r;
  r.positive_eigenvalues = count_positive(n_form, tol);
  if (r.positive_eigenvalues < n) return r;
  const SymMatrix n22(n_form.m22());
  const auto [lam, v] = sym_eig(n22);
  const double sc = std::max(1.0, lam.cwiseAbs().maxCoeff());
  if (lam.cwiseAbs().minCoeff() > tol.eig_zero * sc) {
    const Matrix zc = -(v * lam.cwiseInverse().asDiagonal() * v.transpose()) *
                      n_form.m12().transpose();
    if (strictly_feasible(n_form, zc, tol)) {
      r.satisfied = true;
      r.z_bar = zc;
      return r;
    }
  }
  return random_search(n_form, r, tol);
}

SlaterResult slater_check(const DataQmi& q, int n, const Tolerance& tol) {
  if (q.ellipsoid) {
    SlaterResult r;
    r.positive_eigenvalues = count_positive(q.n, tol);
    // the center attains delta, the largest value on the set
    if (definiteness(q.ellipsoid->delta, Definiteness::PD, tol)) {
      r.satisfied = true;
      r.z_bar = q.ellipsoid->center;
      return r;
    }
    return r;
  }
  return slater_check(q.n, n, tol);
}

bool is_bounded(const Matrix& x_minus, const Matrix& u_minus,
                const Tolerance& tol) {
  if (x_minus.cols() != u_minus.cols()) return false;
  Matrix d(x_minus.rows() + u_minus.rows(), x_minus.cols());
  d << x_minus, u_minus;
  return numerical_rank(d, tol) == d.rows();
}

Matrix random_contraction(Rng& rng, int q, int k, SampleMode mode) {
  Matrix g;
  double top = 0.0;
  do {
    g = gaussian_matrix(rng, q, k);
    top = Eigen::JacobiSVD<Matrix>(g).singularValues()(0);
  } while (top == 0.0);
  g /= top;
  if (mode == SampleMode::Interior) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    g *= std::pow(ud(rng), 1.0 / (q * k));
  }
  return g;
}

std::vector<SystemPair> sample_sigma(const Ellipsoid& e, int n, int count,
                                     std::uint64_t seed, SampleMode mode) {
  std::vector<SystemPair> out;
  out.reserve(std::max(count, 0));
  Rng rng(seed);
  const int q = static_cast<int>(e.center.rows());
  const int k = static_cast<int>(e.center.cols());
  for (int i = 0; i < count; ++i) {
    out.push_back(unstack_z(e.point(random_contraction(rng, q, k, mode)), n));
  }
  return out;
}

std::vector<SystemPair> sample_sigma(const QmiForm& n_form, int count,
                                     std::uint64_t seed, SampleMode mode,
                                     const Tolerance& tol) {
  const Ellipsoid e = ellipsoid_of(n_form, tol);
  return sample_sigma(e, n_form.k(), count, seed, mode);
}

}  // namespace nsynth
