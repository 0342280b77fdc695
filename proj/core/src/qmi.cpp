#include "nsynth/qmi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsynth {

QmiForm::QmiForm(SymMatrix mat, int k) : mat_(std::move(mat)), k_(k) {
  if (k_ < 1 || k_ >= mat_.dim()) {
    throw std::invalid_argument("QmiForm: need 1 <= k < dim");
  }
}

SymMatrix qmi_eval(const QmiForm& f, const Matrix& z) {
  if (z.rows() != f.q() || z.cols() != f.k()) {
    throw std::invalid_argument("qmi_eval: Z must be q x k");
  }
  const Matrix m12z = f.m12() * z;
  return SymMatrix(f.m11() + m12z + m12z.transpose() +
                   z.transpose() * f.m22() * z);
}

Matrix Ellipsoid::congruence() const {
  const int k = static_cast<int>(center.cols());
  const int q = static_cast<int>(center.rows());
  Matrix t = Matrix::Zero(k + q, k + q);
  t.topLeftCorner(k, k).setIdentity();
  t.bottomLeftCorner(q, k) = center;
  t.bottomRightCorner(q, q) = scale * left;
  return t;
}

SymMatrix Ellipsoid::reduced_form() const {
  const int q = static_cast<int>(center.rows());
  return SymMatrix(block_diag(delta.matrix(),
                              -scale * scale * Matrix::Identity(q, q)));
}

Ellipsoid ellipsoid_of(const QmiForm& n, const Tolerance& tol) {
  const SymMatrix n22(n.m22());
  if (!definiteness(n22, Definiteness::ND, tol)) {
    throw std::domain_error("ellipsoid_of: N22 is not negative definite");
  }
  const auto [lam, v] = sym_eig(SymMatrix(-n22.matrix()));
  Ellipsoid e;
  e.left = v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  // center = -N22^{-1} N12^T
  e.center = v * lam.cwiseInverse().asDiagonal() * v.transpose() *
             n.m12().transpose();
  const Matrix d = n.m11() + n.m12() * e.center;
  const SymMatrix ds(d);
  const auto [dl, dv] = sym_eig(ds);
  const double sc = std::max(1.0, dl.cwiseAbs().maxCoeff());
  if (dl(0) < -tol.eig_zero * sc) {
    throw std::domain_error("ellipsoid_of: empty solution set");
  }
  const Vector clipped = dl.cwiseMax(0.0);
  e.delta = SymMatrix(dv * clipped.asDiagonal() * dv.transpose());
  e.delta_sqrt = dv * clipped.cwiseSqrt().asDiagonal() * dv.transpose();
  e.scale = std::sqrt(std::max(clipped.maxCoeff(), 1e-300));
  return e;
}

bool kernel_inclusion(const QmiForm& n, const Tolerance& tol) {
  const Matrix v0 = sym_kernel(SymMatrix(n.m22()), tol);
  if (v0.cols() == 0) return true;
  const double sc = std::max(1.0, n.mat().matrix().cwiseAbs().maxCoeff());
  return (n.m12() * v0).norm() <= 1e3 * tol.eig_zero * sc;
}

}  // namespace nsynth
