#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "nsynth/qmi.hpp"
#include "nsynth/sdp.hpp"

namespace nsynth {

enum class CertificateForm { Nonstrict, Strict, Structured };

struct MultiplierCertificate {
  double alpha = 0.0;
  std::optional<double> beta;
  double margin = 0.0;  // lambda_min of the certified matrix
  CertificateForm form = CertificateForm::Nonstrict;
};

/// g(alpha) = lambda_min(M - alpha N). Concave in alpha.
double multiplier_gap(const QmiForm& m, const QmiForm& n, double alpha);

struct LineSearchResult {
  double alpha = 0.0;
  double value = 0.0;  // g(alpha)
  double scale = 1.0;  // spectral scale of M - alpha N
};

/// Maximizes g over alpha >= 0: doubling bracket from [0, 1], then
/// golden-section search down to a relative width of 1e-12.
LineSearchResult maximize_multiplier_gap(const QmiForm& m, const QmiForm& n);

/// Searches alpha >= 0 with M - alpha N >= 0 (Nonstrict) or > 0 (Strict).
std::optional<MultiplierCertificate> find_multiplier(
    const QmiForm& m, const QmiForm& n, CertificateForm form,
    const Tolerance& tol = {});

struct StructuredSettings {
  double alpha_cap = 1e6;
  double beta_cap = 1e6;
  SolverSettings solver;
};

/// max beta s.t. M - alpha N - diag(beta I_k, 0) >= 0, alpha >= 0.
/// Throws std::runtime_error if the solver does not reach a verdict.
std::optional<MultiplierCertificate> find_multiplier_structured(
    const QmiForm& m, const QmiForm& n, int k,
    const StructuredSettings& settings = {}, const Tolerance& tol = {});

enum class Tri { True, False, Unknown };
std::string to_string(Tri t);

enum class Theorem { Nonstrict, Strict, Structured };

struct PreconditionReport {
  std::map<std::string, Tri> conditions;
  bool all_hold() const;
};

PreconditionReport check_theorem_preconditions(const QmiForm& m,
                                               const QmiForm& n, Theorem th,
                                               const Tolerance& tol = {});

enum class Strictness { Nonstrict, Strict };

enum class FalsifyStatus { Counterexample, NoneFound, Inconclusive };

struct FalsifyResult {
  FalsifyStatus status = FalsifyStatus::NoneFound;
  std::optional<Matrix> counterexample;
  double worst_target = 0.0;  // smallest target lambda_min / scale seen
  int accepted = 0;
  int drawn = 0;
};

/// Randomized search for Z with [I;Z]^T N [I;Z] >= 0 but [I;Z]^T M [I;Z]
/// not >= 0 (Nonstrict) or not > 0 (Strict).
FalsifyResult falsify_implication(const QmiForm& m, const QmiForm& n,
                                  int budget, std::uint64_t seed,
                                  Strictness strictness,
                                  const Tolerance& tol = {});

}  // namespace nsynth
