#pragma once

#include <filesystem>

#include "nsynth/matcore.hpp"

namespace nsynth {

/// Quadratic noise bound
///   Phi11 + Phi12 W^T + W Phi12^T + W Phi22 W^T >= 0
/// on the n x T matrix of stacked noise samples W.
class NoiseModel {
 public:
  /// Validates dimensions and requires phi22 negative definite.
  NoiseModel(SymMatrix phi11, Matrix phi12, SymMatrix phi22,
             const Tolerance& tol = {});

  const SymMatrix& phi11() const { return phi11_; }
  const Matrix& phi12() const { return phi12_; }
  const SymMatrix& phi22() const { return phi22_; }
  int n() const { return phi11_.dim(); }
  int samples() const { return phi22_.dim(); }

  /// Full (n+T) x (n+T) matrix [Phi11 Phi12; Phi12^T Phi22].
  Matrix stacked() const;

 private:
  SymMatrix phi11_;
  Matrix phi12_;
  SymMatrix phi22_;
};

/// W W^T <= bound.
NoiseModel from_energy_bound(const SymMatrix& bound, int samples);

/// ||w(t)||^2 <= eps for every sample, relaxed to W W^T <= T eps I.
NoiseModel from_sample_norm_bound(double eps, int n, int samples);

/// Sample-covariance bound. The centering matrix is only negative
/// semidefinite, so a shift delta > 0 is needed to obtain a valid model;
/// delta = 0 always throws.
NoiseModel from_sample_covariance(const SymMatrix& bound, int samples,
                                  double delta = 0.0);

/// Noise restricted to im E: (E Phi11 E^T, E Phi12, Phi22).
NoiseModel embed_subspace(const Matrix& e, const NoiseModel& hat);

/// Block-diagonal composition for data stacked from several experiments.
/// Phi11 blocks are summed, Phi12 concatenated, Phi22 block-diagonal.
NoiseModel compose_stacked(const std::vector<NoiseModel>& parts);

struct NoiseCheck {
  bool admissible = false;
  double margin = 0.0;  // lambda_min of the quadratic form
};

NoiseCheck check_noise(const NoiseModel& model, const Matrix& w,
                       const Tolerance& tol = {});

struct TransposedModel {
  SymMatrix q11;
  Matrix q12;
  SymMatrix q22;
};

/// For Phi11 > 0 and Phi12 = 0: (-Phi22^{-1}, 0, -Phi11^{-1}), the bound
/// on W^T instead of W.
TransposedModel to_transposed_model(const NoiseModel& model,
                                    const Tolerance& tol = {});

/// Reads phi11.csv, phi12.csv, phi22.csv from a directory.
NoiseModel read_noise_model(const std::filesystem::path& dir);
void write_noise_model(const NoiseModel& model,
                       const std::filesystem::path& dir);

}  // namespace nsynth
