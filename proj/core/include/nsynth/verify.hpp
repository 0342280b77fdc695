#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "nsynth/qmi.hpp"
#include "nsynth/synth.hpp"

namespace nsynth {

/// x(t+1) = a_cl x(t) + w(t), z(t) = c_cl x(t).
struct ClosedLoop {
  Matrix a_cl;
  Matrix c_cl;
};

ClosedLoop closed_loop(const SystemPair& sys, const Matrix& k,
                       const PerformanceSpec& spec);

double spectral_radius(const Matrix& a);

/// Solves a P a^T - P + q = 0. Throws std::domain_error if a is not Schur.
SymMatrix dlyap(const Matrix& a, const SymMatrix& q);

/// sqrt(trace(C W C^T)) with W = dlyap(A, I).
double h2_norm(const ClosedLoop& cl);

/// Same norm as the minimal trace P subject to
/// P - A^T P A - C^T C >= 0, solved as an SDP.
double h2_norm_sdp(const ClosedLoop& cl, const SolverSettings& s = {});

/// Peak of sigma_max(C (e^{jw} I - A)^{-1}) over a 4096-point grid on
/// [0, pi], refined by golden-section search around the best local peaks.
double hinf_norm_grid(const ClosedLoop& cl);

/// Bisection on gamma over the LMI
/// [Y, Y A^T, Y C^T; A Y, Y - I/gamma^2, 0; C Y, 0, I] > 0,
/// cross-checked against hinf_norm_grid. Throws std::runtime_error when
/// the two disagree by more than 10 tol relative.
double hinf_norm(const ClosedLoop& cl, double tol = 1e-6);

/// Minimal H2 level over all state feedbacks for a known system.
/// Throws std::runtime_error if the SDP is infeasible or unsolved.
double model_based_optimal_h2(const SystemPair& sys,
                              const PerformanceSpec& spec,
                              const SolverSettings& s = {});

enum class PerformanceKind { None, H2, Hinf };

struct RobustReport {
  int samples = 0;
  int pass_lyapunov = 0;
  int pass_spectral = 0;
  std::optional<int> pass_performance;
  double worst_lyapunov_margin = 0.0;  // lambda_min(X - A X A^T) / |X|
  double worst_spectral_radius = 0.0;
  std::optional<double> worst_performance_ratio;  // norm / gamma
  std::uint64_t seed = 0;

  bool all_pass() const;
  std::string to_json() const;
};

/// Samples count systems from the ellipsoid, half interior and half on the
/// boundary, and checks the controller's Lyapunov inequality with its
/// certificate (P or Y), the spectral radius and optionally the
/// performance level gamma_achieved.
RobustReport robust_verify(const Controller& ctrl, const Ellipsoid& e, int n,
                           const PerformanceSpec* spec, PerformanceKind kind,
                           int count, std::uint64_t seed);
RobustReport robust_verify(const Controller& ctrl, const QmiForm& n_form,
                           const PerformanceSpec* spec, PerformanceKind kind,
                           int count, std::uint64_t seed);

}  // namespace nsynth
