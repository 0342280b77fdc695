#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsynth/experiments.hpp"
#include "nsynth/slemma.hpp"
#include "nsynth/verify.hpp"

namespace nsynth {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNotInformative = 2,
  kExitIndeterminate = 3,
};

/// Thrown for missing files, malformed JSON or inconsistent settings.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoiseSpec {
  std::string kind;  // energy | sample-norm | covariance | files
  double scalar_bound = 0.0;  // energy, covariance: bound * I
  std::optional<std::filesystem::path> bound_file;
  double eps = 0.0;    // sample-norm
  double delta = 0.0;  // covariance
  std::optional<std::filesystem::path> dir;  // files
};

struct SimulateSpec {
  int samples = 0;
  std::string noise = "gaussian";  // gaussian | ball
  double level = 0.0;              // sigma, or eps for the ball
};

struct SlemmaSpec {
  std::filesystem::path m, n;
  int k = 0;
  std::string form = "nonstrict";  // nonstrict | strict | structured
  int budget = 10000;
};

/// Parsed configuration. Relative paths are resolved against the directory
/// of the config file.
struct RunConfig {
  std::filesystem::path a, b, c, d;  // system CSVs, empty when absent
  std::filesystem::path trajectory;
  std::filesystem::path controller;  // for verify; defaults to out/
  std::optional<NoiseSpec> noise;
  std::string synth_kind = "stab";  // stab | h2 | hinf | stab-multi
  std::optional<double> gamma;
  double eps = 0.0;  // stab-multi sample bound
  HinfForm hinf_form = HinfForm::Printed;
  std::string experiment;
  int trials = 100;
  int verify_samples = 500;
  std::optional<SimulateSpec> simulate;
  std::optional<SlemmaSpec> slemma;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  std::vector<std::filesystem::path> inputs;  // hashed into provenance

  static RunConfig parse(const std::string& json_text,
                         const std::filesystem::path& base);
  static RunConfig load(const std::filesystem::path& path);
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hash_file(const std::filesystem::path& path);

std::string controller_json(const SynthResult& r);
Controller parse_controller_json(const std::string& text);

int cmd_simulate(const RunConfig& cfg);
int cmd_synth(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);
int cmd_slemma(const RunConfig& cfg);
/// name: comparison | sweep | aircraft.
int cmd_exp(const std::string& name, const RunConfig& cfg);

}  // namespace nsynth
