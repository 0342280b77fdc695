#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>

namespace nsynth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric dense matrix. Construction averages the input with its
/// transpose, so entries are bit-exactly symmetric afterwards.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::Ref<const Matrix>& m);

  static SymMatrix Identity(int dim);
  static SymMatrix Zero(int dim);
  static SymMatrix Scalar(double value);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  operator const Matrix&() const { return m_; }  // NOLINT

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator-(const SymMatrix& other) const;
  SymMatrix operator*(double s) const;
  SymMatrix operator-() const;

 private:
  Matrix m_;
};

/// Numeric thresholds for (semi)definiteness decisions. All values are
/// relative to the spectral scale max(1, |lambda|_max) of the tested matrix.
struct Tolerance {
  double eig_zero = 1e-9;
  double psd_margin = 1e-8;
  double strict_margin = 1e-8;
};

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

EigenDecomposition sym_eig(const SymMatrix& s);

double min_eig(const SymMatrix& s);
double max_eig(const SymMatrix& s);

/// max(1, max |lambda|).
double spectral_scale(const SymMatrix& s);

enum class Definiteness { PSD, PD, NSD, ND };

bool definiteness(const SymMatrix& s, Definiteness mode,
                  const Tolerance& tol = {});

/// For m = [A B; B^T D] with the split after `split` rows, returns
/// A - B D^{-1} B^T. Throws if D is numerically singular.
SymMatrix schur_complement(const SymMatrix& m, int split,
                           const Tolerance& tol = {});

/// Symmetric square root and inverse square root of a PSD matrix. Negative
/// eigenvalues are clipped to zero (sqrt) or rejected (inverse sqrt).
Matrix psd_sqrt(const SymMatrix& s);
Matrix pd_inv_sqrt(const SymMatrix& s, const Tolerance& tol = {});

/// Orthonormal basis of the numerical kernel (eigenvalues with
/// |lambda| <= eig_zero * scale).
Matrix sym_kernel(const SymMatrix& s, const Tolerance& tol = {});

/// Numerical rank via singular values > eig_zero * max(1, sigma_max).
int numerical_rank(const Eigen::Ref<const Matrix>& m,
                   const Tolerance& tol = {});

Matrix block_diag(const Eigen::Ref<const Matrix>& a,
                  const Eigen::Ref<const Matrix>& b);

bool all_finite(const Eigen::Ref<const Matrix>& m);

// Matrix CSV: rows of comma-separated decimals, no header.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::Ref<const Matrix>& m);
Matrix parse_matrix_csv(const std::string& text);
std::string format_matrix_csv(const Eigen::Ref<const Matrix>& m);

}  // namespace nsynth
