#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsynth/data.hpp"
#include "nsynth/noise.hpp"
#include "nsynth/sdp.hpp"
#include "nsynth/sigma.hpp"

namespace nsynth {

/// Performance output z = C x + D u and an optional target level.
struct PerformanceSpec {
  Matrix c;  // p x n
  Matrix d;  // p x m
  std::optional<double> gamma;

  int p() const { return static_cast<int>(c.rows()); }
  void validate(int n, int m) const;
};

struct Controller {
  Matrix k;  // m x n
  std::optional<SymMatrix> p;  // stabilization certificate
  std::optional<SymMatrix> y;  // H2 / Hinf certificate
  std::optional<SymMatrix> z;  // H2 only
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> alphas;  // per-sample multipliers
  std::optional<double> mu;
  std::optional<double> gamma_achieved;
  bool slater = false;
  std::vector<std::string> flags;

  /// P or Y, whichever is present.
  const SymMatrix& lyapunov() const;
  /// K P or K Y.
  Matrix l() const;
  bool has_flag(const std::string& f) const;
};

enum class Verdict { Success, NotInformative, Indeterminate };
std::string to_string(Verdict v);

struct SynthResult {
  Verdict verdict = Verdict::Indeterminate;
  std::optional<Controller> controller;
  SolveReport report;
  SlaterResult slater;
  std::vector<std::string> flags;
  // Largest t with every block >= t I, when the main solve failed and a
  // feasibility solve was run instead.
  std::optional<double> strict_margin;
};

enum class HinfForm { Printed, Corrected };

struct SynthSettings {
  double eps_strict = 1e-6;
  double beta_min = 1e-6;
  double p_cap = 1.0;  // P <= p_cap I fixes the scale of the stabilization LMI
  double y_cap = 1e6;
  bool precondition = true;
  HinfForm hinf_form = HinfForm::Printed;
  SolverSettings solver;
};

/// An assembled synthesis SDP with the ids of its variables. Unused ids
/// are -1.
struct SynthProblem {
  SdpProblem sdp;
  int p = -1;  // P or Y
  int l = -1;
  int alpha = -1;
  int beta = -1;
  int z = -1;
  int mu = -1;
  std::vector<int> alphas;
  int n = 0;
  int m = 0;
};

/// Stabilization LMI for the data QMI. With `ellipsoid` given, the first 2n+m rows are
/// transformed by its congruence, which leaves the feasible set unchanged.
SynthProblem build_fs_problem(const QmiForm& n_form, int n, int m,
                              const std::optional<Ellipsoid>& ellipsoid,
                              const SynthSettings& settings = {});
SynthProblem build_h2_problem(const QmiForm& n_form, int n, int m,
                              const PerformanceSpec& spec,
                              const std::optional<Matrix>& e_subspace,
                              const std::optional<Ellipsoid>& ellipsoid,
                              const SynthSettings& settings = {});
SynthProblem build_hinf_problem(const QmiForm& n_form, int n, int m,
                                const PerformanceSpec& spec,
                                const std::optional<Ellipsoid>& ellipsoid,
                                const SynthSettings& settings = {});

/// Per-sample forms N_t for ||w(t)||^2 <= eps.
std::vector<QmiForm> sample_forms(const DataMatrices& d, double eps);

SynthProblem build_multi_problem(const std::vector<QmiForm>& forms, int n,
                                 int m,
                                 const std::optional<Ellipsoid>& ellipsoid,
                                 const SynthSettings& settings = {});

SynthResult synth_stab(const DataMatrices& d, const NoiseModel& model,
                       const SynthSettings& settings = {});
SynthResult synth_h2(const DataMatrices& d, const NoiseModel& model,
                     const PerformanceSpec& spec,
                     const std::optional<Matrix>& e_subspace = std::nullopt,
                     const SynthSettings& settings = {});
SynthResult synth_hinf(const DataMatrices& d, const NoiseModel& model,
                       const PerformanceSpec& spec,
                       const SynthSettings& settings = {});
/// Multiplier per sample. Never returns NotInformative.
SynthResult synth_stab_multi(const DataMatrices& d, double eps,
                             const SynthSettings& settings = {});

/// Flattened assignment of a controller into `problem` (L = K P or K Y).
Vector controller_assignment(const SynthProblem& problem, const Controller& c);

/// im [I; K] within im [X-; U-].
bool check_image_inclusion(const Matrix& k, const Matrix& x_minus,
                           const Matrix& u_minus, double tol = 1e-8);

}  // namespace nsynth
