#pragma once

#include <optional>

#include "nsynth/matcore.hpp"

namespace nsynth {

/// Symmetric matrix M partitioned after its first k rows, standing for the
/// map Z -> [I; Z]^T M [I; Z] with Z of size q x k.
class QmiForm {
 public:
  QmiForm() = default;
  QmiForm(SymMatrix mat, int k);

  const SymMatrix& mat() const { return mat_; }
  int k() const { return k_; }
  int q() const { return mat_.dim() - k_; }

  Matrix m11() const { return mat_.matrix().topLeftCorner(k_, k_); }
  Matrix m12() const { return mat_.matrix().topRightCorner(k_, q()); }
  Matrix m22() const { return mat_.matrix().bottomRightCorner(q(), q()); }

 private:
  SymMatrix mat_;
  int k_ = 0;
};

/// M11 + M12 Z + Z^T M12^T + Z^T M22 Z.
SymMatrix qmi_eval(const QmiForm& f, const Matrix& z);

/// Parameterization of {Z : [I; Z]^T N [I; Z] >= 0} for N22 < 0:
/// Z = center + left * V * delta_sqrt with ||V|| <= 1. The congruence
/// T = [I 0; center, scale * left] maps N to diag(delta, -scale^2 I).
struct Ellipsoid {
  Matrix center;      // q x k
  Matrix left;        // q x q, left^T (-N22) left = I
  SymMatrix delta;    // k x k, PSD-clipped
  Matrix delta_sqrt;  // k x k
  double scale = 1.0;

  /// T as described above, (k+q) x (k+q).
  Matrix congruence() const;
  /// diag(delta, -scale^2 I).
  SymMatrix reduced_form() const;
  Matrix point(const Matrix& v) const { return center + left * v * delta_sqrt; }
};

/// Ellipsoid of a QMI with N22 < 0. Throws if N22 is not negative definite
/// or delta has eigenvalues below -eig_zero * scale.
Ellipsoid ellipsoid_of(const QmiForm& n, const Tolerance& tol = {});

/// Subspace inclusion ker N22 within ker N12.
bool kernel_inclusion(const QmiForm& n, const Tolerance& tol = {});

}  // namespace nsynth
