#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nsynth/data.hpp"
#include "nsynth/noise.hpp"
#include "nsynth/qmi.hpp"

namespace nsynth {

/// N = R Phi R^T with R = [I X+; 0 -X-; 0 -U-]; k = n, q = n + m.
QmiForm build_n(const DataMatrices& d, const NoiseModel& model);

/// The data QMI together with its ellipsoid computed directly from the
/// data (QR of the whitened regressor) instead of from the explicit N.
/// The ellipsoid is absent when [X-; U-] lacks full row rank.
struct DataQmi {
  QmiForm n;
  std::optional<Ellipsoid> ellipsoid;
};

DataQmi build_data_qmi(const DataMatrices& d, const NoiseModel& model,
                       const Tolerance& tol = {});

/// Z = [A^T; B^T].
Matrix stack_z(const SystemPair& sys);
SystemPair unstack_z(const Matrix& z, int n);

struct Membership {
  bool member = false;
  double margin = 0.0;
};

Membership membership(const SystemPair& sys, const QmiForm& n_form,
                      const Tolerance& tol = {});

struct SlaterResult {
  bool satisfied = false;
  int positive_eigenvalues = 0;
  std::optional<Matrix> z_bar;
};

/// Looks for Z with [I; Z]^T N [I; Z] > 0: analytic center first, then
/// 1000 seeded Gaussian candidates over a logarithmic scale grid.
SlaterResult slater_check(const QmiForm& n_form, int n,
                          const Tolerance& tol = {});
/// Same, trying the data ellipsoid center first.
SlaterResult slater_check(const DataQmi& q, int n, const Tolerance& tol = {});

/// Full row rank of [X-; U-].
bool is_bounded(const Matrix& x_minus, const Matrix& u_minus,
                const Tolerance& tol = {});

enum class SampleMode { Interior, Boundary };

/// Members of the QMI solution set drawn through the ellipsoid
/// parameterization Z = center + left V delta^{1/2}, ||V|| <= 1
/// (= 1 in boundary mode).
std::vector<SystemPair> sample_sigma(const QmiForm& n_form, int count,
                                     std::uint64_t seed, SampleMode mode,
                                     const Tolerance& tol = {});
std::vector<SystemPair> sample_sigma(const Ellipsoid& e, int n, int count,
                                     std::uint64_t seed, SampleMode mode);

/// Random q x k matrix with largest singular value 1 (boundary) or a
/// radius drawn so that samples spread through the unit ball (interior).
Matrix random_contraction(Rng& rng, int q, int k, SampleMode mode);

}  // namespace nsynth
