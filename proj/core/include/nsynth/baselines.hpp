#pragma once

#include <optional>

#include "nsynth/sdp.hpp"

namespace nsynth {

struct BaselineResult {
  Feasibility verdict = Feasibility::Indeterminate;
  double margin = 0.0;  // largest t with all strict blocks >= t I
  std::optional<double> alpha;
  std::optional<Matrix> k;
  SolveReport report;  // of the deciding solve
  double certificate_residual = 0.0;
};

/// Data-based stabilization with a noise-level parameter gamma: find Q
/// and alpha > 0 with X-Q symmetric,
///   [X-Q - alpha X+X+^T, X+Q; Q^T X+^T, X-Q] > 0,  [I, Q; Q^T, X-Q] > 0,
///   alpha^2 / (4 + 2 alpha) > gamma.
/// The last condition is a lower bound on alpha and the first LMI only gets
/// harder as alpha grows, so the LMI is decided at the smallest admissible
/// alpha; a bisection on [alpha_min, 1e6] then reports the largest one.
BaselineResult depersis_lmi(const Matrix& x_plus, const Matrix& x_minus,
                            const Matrix& u_minus, double gamma,
                            double margin = 1e-8,
                            const SolverSettings& s = {});

/// Find Y and M with X- M = Y and
///   [-Y, 0, M^T X+^T, M^T; 0, Q_w, I, 0; X+ M, I, -Y, 0;
///    M, 0, 0, -R_w^{-1}] < 0.
BaselineResult berberich_lmi(const Matrix& x_plus, const Matrix& x_minus,
                             const Matrix& u_minus, const Matrix& q_w,
                             const Matrix& r_w, double margin = 1e-8,
                             const SolverSettings& s = {});

}  // namespace nsynth
