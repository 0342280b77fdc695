#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsynth/baselines.hpp"
#include "nsynth/synth.hpp"

namespace nsynth {

namespace fixtures {

/// Three-state, two-input system of the stabilization sweep.
SystemPair sweep_system();
/// Discretized fighter-aircraft model (six states, two inputs).
SystemPair aircraft_system();
/// z = x6, no feedthrough.
PerformanceSpec aircraft_spec();

/// Scalar system a = b = 1 observed over three steps with W = [1/2 1/2 1/2].
struct ComparisonData {
  SystemPair truth;
  DataSet data;
  NoiseModel model;  // W W^T <= 1
};
ComparisonData comparison();

}  // namespace fixtures

/// Calls fn(i) for i in [0, count) on up to `workers` threads (0: hardware
/// concurrency).
void parallel_for(int count, const std::function<void(int)>& fn,
                  unsigned workers = 0);

/// Seed for the trial-th run of configuration `slot`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t slot,
                          std::uint64_t trial);

struct ComparisonReport {
  SynthResult stab;
  std::optional<double> closed_loop;  // a + b K of the true system
  bool reference_point_feasible = false;
  double reference_point_worst_eig = 0.0;
  BaselineResult depersis;
  BaselineResult berberich;
  double seconds = 0.0;

  bool expected_verdicts() const;
  std::string to_json() const;
};

ComparisonReport exp_comparison(const SynthSettings& settings = {});

struct SweepTrial {
  double eps = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  DataMatrices data;
  Verdict verdict = Verdict::Indeterminate;
  std::optional<Controller> controller;
  bool stabilizes = false;
  bool slater = false;
  int positive_eigenvalues = 0;
};

struct SweepRow {
  double eps = 0.0;
  int trials = 0;
  int success = 0;
  int slater = 0;
  int not_informative = 0;
  int indeterminate = 0;

  double success_rate() const { return trials ? 1.0 * success / trials : 0.0; }
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<SweepTrial> trials;
  std::uint64_t seed = 0;
  double seconds = 0.0;

  std::string to_json() const;
  /// eps,trials,success,success_rate,slater
  std::string to_csv() const;
};

/// Draws `trials` datasets per noise level: T samples, Gaussian x(0) and
/// inputs, noise columns uniform in {||w||^2 <= eps}. Each is fed to
/// synth_stab with Phi = (T eps I, 0, -I).
SweepReport exp_stabilization_sweep(const SystemPair& sys,
                                    const std::vector<double>& levels,
                                    int trials, std::uint64_t seed,
                                    int samples = 20,
                                    const SynthSettings& settings = {});

struct AircraftRun {
  double sigma = 0.0;
  double bound_factor = 0.0;  // W W^T <= factor T sigma^2 I
  int samples = 0;
  Verdict verdict = Verdict::Indeterminate;
  std::optional<Controller> controller;
  std::optional<double> gamma_sq;  // certified level
  std::optional<double> true_h2_sq;  // closed loop with the true system
  bool stabilizing = false;
  bool slater = false;
  std::optional<double> strict_margin;
  std::vector<std::string> flags;
};

struct AircraftDataset {
  double sigma = 0.0;
  double bound_factor = 0.0;
  std::uint64_t seed = 0;
  int regenerations = 0;
  DataSet data;
};

struct AircraftReport {
  double benchmark = 0.0;
  std::vector<AircraftRun> curve;     // sigma = 0.005, prefixes
  std::vector<AircraftRun> variants;  // larger noise and tighter bound
  std::vector<AircraftDataset> datasets;
  std::uint64_t seed = 0;
  double seconds = 0.0;

  const AircraftRun& full_run() const { return curve.back(); }
  std::string to_json() const;
  /// samples,achieved_sq,benchmark_sq
  std::string plot_csv() const;
};

struct AircraftOptions {
  int samples = 750;
  int prefix_step = 50;
  double sigma = 0.005;
  double bound_factor = 1.35;
  bool variants = true;
  int max_regenerations = 100;
};

/// Generates a dataset whose noise satisfies W W^T <= factor T sigma^2 I,
/// redrawing with the next sub-seed when it does not.
AircraftDataset aircraft_dataset(double sigma, double bound_factor,
                                 int samples, std::uint64_t seed,
                                 int max_regenerations = 100);

AircraftRun aircraft_run(const AircraftDataset& ds, double bound_factor,
                         int prefix, const SynthSettings& settings = {});

AircraftReport exp_aircraft_h2(std::uint64_t seed,
                               const AircraftOptions& options = {},
                               const SynthSettings& settings = {});

}  // namespace nsynth
