#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nsynth/matcore.hpp"

namespace nsynth {

/// Scalar affine function of the flattened decision vector.
class LinExpr {
 public:
  LinExpr() = default;
  explicit LinExpr(double constant) : constant_(constant) {}
  static LinExpr Term(int index, double coeff);

  LinExpr operator+(const LinExpr& other) const;
  LinExpr operator-(const LinExpr& other) const;
  LinExpr operator*(double s) const;
  LinExpr operator-() const { return *this * -1.0; }

  double constant() const { return constant_; }
  const std::map<int, double>& terms() const { return terms_; }
  double evaluate(const Vector& x) const;

 private:
  double constant_ = 0.0;
  std::map<int, double> terms_;
};

/// Matrix-valued affine function: constant + sum_i x_i * coeff_i.
class AffineMatrix {
 public:
  AffineMatrix() = default;
  AffineMatrix(int rows, int cols);
  explicit AffineMatrix(const Matrix& constant);

  static AffineMatrix Zero(int rows, int cols) { return {rows, cols}; }
  static AffineMatrix Identity(int dim);
  /// Scalar expression times a constant matrix.
  static AffineMatrix Scaled(const LinExpr& e, const Matrix& m);
  /// Assemble from a grid of blocks. Row heights and column widths must
  /// agree across the grid.
  static AffineMatrix Blocks(
      const std::vector<std::vector<AffineMatrix>>& grid);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Matrix& constant() const { return constant_; }
  const std::map<int, Matrix>& terms() const { return terms_; }

  AffineMatrix operator+(const AffineMatrix& other) const;
  AffineMatrix operator-(const AffineMatrix& other) const;
  AffineMatrix operator+(const Matrix& other) const;
  AffineMatrix operator-(const Matrix& other) const;
  AffineMatrix operator*(double s) const;
  AffineMatrix operator-() const { return *this * -1.0; }
  AffineMatrix transpose() const;
  AffineMatrix trace() const;
  /// Entry (i, j) as a scalar expression.
  LinExpr entry(int i, int j) const;

  Matrix evaluate(const Vector& x) const;

  friend AffineMatrix operator*(const Matrix& left, const AffineMatrix& a);
  friend AffineMatrix operator*(const AffineMatrix& a, const Matrix& right);

 private:
  int rows_ = 0;
  int cols_ = 0;
  Matrix constant_;
  std::map<int, Matrix> terms_;
};

AffineMatrix operator*(const Matrix& left, const AffineMatrix& a);
AffineMatrix operator*(const AffineMatrix& a, const Matrix& right);

enum class VarKind { Scalar, Symmetric, Full };

struct VarInfo {
  std::string name;
  VarKind kind;
  int rows;
  int cols;
  int offset;  // first index in the flattened decision vector
  int size;
};

/// Linear objective (maximized) over scalar, symmetric and full matrix
/// variables, subject to affine PSD blocks and scalar linear equalities.
class SdpProblem {
 public:
  int add_scalar(const std::string& name);
  int add_symmetric(const std::string& name, int dim);
  int add_full(const std::string& name, int rows, int cols);

  /// Matrix view of variable `id` (1x1 for scalars).
  AffineMatrix var(int id) const;
  LinExpr scalar(int id) const;

  void maximize(const LinExpr& objective) { objective_ = objective; }
  void minimize(const LinExpr& objective) { objective_ = -objective; }

  /// Requires `block` to be PSD. Coefficients are symmetrized.
  void add_psd(const AffineMatrix& block, const std::string& label = "");
  /// Requires lhs == 0.
  void add_equality(const LinExpr& lhs);
  /// Requires every entry of lhs to vanish.
  void add_equality(const AffineMatrix& lhs);

  int num_scalars() const { return num_scalars_; }
  const std::vector<VarInfo>& variables() const { return vars_; }
  const VarInfo& variable(const std::string& name) const;
  const LinExpr& objective() const { return objective_; }
  const std::vector<AffineMatrix>& psd_blocks() const { return blocks_; }
  const std::vector<std::string>& psd_labels() const { return labels_; }
  const std::vector<LinExpr>& equalities() const { return equalities_; }

  /// Value of variable `id` under flattened assignment x.
  Matrix value(int id, const Vector& x) const;
  /// Writes `value` into the slots of variable `id` (symmetric variables
  /// take the lower triangle of the symmetrized value).
  void assign(int id, const Matrix& value, Vector* x) const;

 private:
  int add_var(const std::string& name, VarKind kind, int rows, int cols,
              int size);

  int num_scalars_ = 0;
  std::vector<VarInfo> vars_;
  LinExpr objective_;
  std::vector<AffineMatrix> blocks_;
  std::vector<std::string> labels_;
  std::vector<LinExpr> equalities_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Inaccurate,
                         IterationLimit };

std::string to_string(SolveStatus s);

struct SolverSettings {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  double step_fraction = 0.98;
};

struct SolveReport {
  SolveStatus status = SolveStatus::Inaccurate;
  double objective_value = 0.0;
  double min_constraint_eig = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  // Infeasibility certificate: per-block PSD matrices X_j with
  // sum_j <F0_j, X_j> = -1 and |sum_j <F_ij, X_j>| <= certificate_residual.
  std::vector<Matrix> certificate;
  double certificate_residual = 0.0;
  // Dual blocks X_j >= 0 with sum_j <F_ij, X_j> = -c_i for each objective
  // coefficient c_i (modulo equality multipliers); set when x is returned.
  std::vector<Matrix> dual;
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

SolveResult solve(const SdpProblem& p, const SolverSettings& settings = {});

struct AssignmentCheck {
  bool feasible = false;
  double worst_eig = 0.0;  // min over blocks of lambda_min / scale
  double worst_equality = 0.0;
};

AssignmentCheck verify_assignment(const SdpProblem& p, const Vector& x,
                                  double feas_tol = 1e-8);

/// Checks an infeasibility certificate against the problem's PSD blocks.
/// Returns the normalized residual max_i |<F_i, X>| after scaling so that
/// <F_0, X> = -1, or +inf if the certificate is not of that sign.
double certificate_residual(const SdpProblem& p,
                            const std::vector<Matrix>& blocks);

/// Checks a certificate that the blocks of p have no common point where
/// all are positive definite: X_j >= 0, not all zero, with <F_i, X> = 0
/// and <F_0, X> <= 0. Returns max(|<F_i, X>| / |F_i|, <F_0, X>_+ / |F_0|)
/// / sum_j tr X_j, with |F_i| the Frobenius norm of the i-th coefficient
/// stacked over all blocks, floored at 1.
double strict_certificate_residual(const SdpProblem& p,
                                   const std::vector<Matrix>& blocks);

enum class Feasibility { Feasible, Infeasible, Indeterminate };
std::string to_string(Feasibility f);

struct StrictFeasibility {
  Feasibility verdict = Feasibility::Indeterminate;
  double margin = 0.0;  // largest t <= 1 with every block >= t I
  Vector x;             // attaining assignment of p's variables
  SolveReport report;   // of the max-t solve
  double certificate_residual = 0.0;
};

/// Decides whether some x satisfying the equalities of p makes every PSD
/// block positive definite; the objective is ignored. Solves max t s.t.
/// blocks >= t I, t <= 1. Feasible when t* > margin; Infeasible when the
/// dual blocks pass strict_certificate_residual within 1e-8.
StrictFeasibility strict_feasibility(const SdpProblem& p, double margin = 1e-8,
                                     const SolverSettings& s = {});

/// Writes manifest.json plus one CSV per coefficient matrix.
void dump_problem(const SdpProblem& p, const std::filesystem::path& dir);

}  // namespace nsynth
