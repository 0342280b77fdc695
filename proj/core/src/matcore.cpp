#include "nsynth/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace nsynth {

SymMatrix::SymMatrix(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("SymMatrix: matrix must be square");
  }
  if (m.rows() < 1) {
    throw std::invalid_argument("SymMatrix: dimension must be at least 1");
  }
  if (!all_finite(m)) {
    throw std::invalid_argument("SymMatrix: non-finite entries");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::Identity(int dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::Zero(int dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::Scalar(double value) {
  return SymMatrix(Matrix::Constant(1, 1, value));
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  return SymMatrix(m_ + other.m_);
}
SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
  return SymMatrix(m_ - other.m_);
}
SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(m_ * s); }
SymMatrix SymMatrix::operator-() const { return SymMatrix(-m_); }

bool all_finite(const Eigen::Ref<const Matrix>& m) {
  return m.size() == 0 || m.allFinite();
}

EigenDecomposition sym_eig(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("sym_eig: eigensolver did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eig(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eig(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(s.dim() - 1);
}

namespace {

double scale_of(const Vector& eigenvalues) {
  return std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
}

}  // namespace

double spectral_scale(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix(), Eigen::EigenvaluesOnly);
  return scale_of(es.eigenvalues());
}

bool definiteness(const SymMatrix& s, Definiteness mode, const Tolerance& tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix(), Eigen::EigenvaluesOnly);
  const Vector& lambda = es.eigenvalues();
  const double scale = scale_of(lambda);
  const double lo = lambda(0);
  const double hi = lambda(lambda.size() - 1);
  switch (mode) {
    case Definiteness::PD:
      return lo > tol.strict_margin * scale;
    case Definiteness::PSD:
      return lo >= -tol.eig_zero * scale;
    case Definiteness::ND:
      return -hi > tol.strict_margin * scale;
    case Definiteness::NSD:
      return -hi >= -tol.eig_zero * scale;
  }
  return false;
}

SymMatrix schur_complement(const SymMatrix& m, int split,
                           const Tolerance& tol) {
  const int n = m.dim();
  if (split < 1 || split >= n) {
    throw std::invalid_argument("schur_complement: split out of range");
  }
  const Matrix& full = m.matrix();
  const int rest = n - split;
  SymMatrix d(full.bottomRightCorner(rest, rest));
  Eigen::SelfAdjointEigenSolver<Matrix> es(d.matrix());
  const Vector& lambda = es.eigenvalues();
  if (lambda.cwiseAbs().minCoeff() <= tol.eig_zero * scale_of(lambda)) {
    throw std::domain_error("schur_complement: trailing block is singular");
  }
  const Matrix b = full.topRightCorner(split, rest);
  const Matrix vtb = es.eigenvectors().transpose() * b.transpose();
  const Matrix correction =
      vtb.transpose() * lambda.cwiseInverse().asDiagonal() * vtb;
  return SymMatrix(full.topLeftCorner(split, split) - correction);
}

Matrix psd_sqrt(const SymMatrix& s) {
  const auto [lambda, v] = sym_eig(s);
  return v * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal() * v.transpose();
}

Matrix pd_inv_sqrt(const SymMatrix& s, const Tolerance& tol) {
  const auto [lambda, v] = sym_eig(s);
  if (lambda(0) <= tol.strict_margin * scale_of(lambda)) {
    throw std::domain_error("pd_inv_sqrt: matrix is not positive definite");
  }
  return v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
}

Matrix sym_kernel(const SymMatrix& s, const Tolerance& tol) {
  const auto [lambda, v] = sym_eig(s);
  const double cut = tol.eig_zero * scale_of(lambda);
  std::vector<int> idx;
  for (int i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) <= cut) idx.push_back(i);
  }
  Matrix basis(s.dim(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) basis.col(j) = v.col(idx[j]);
  return basis;
}

int numerical_rank(const Eigen::Ref<const Matrix>& m, const Tolerance& tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  const double cut = tol.eig_zero * std::max(1.0, sv(0));
  return static_cast<int>((sv.array() > cut).count());
}

Matrix block_diag(const Eigen::Ref<const Matrix>& a,
                  const Eigen::Ref<const Matrix>& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Matrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw std::invalid_argument("matrix CSV: bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("matrix CSV: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::string format_matrix_csv(const Eigen::Ref<const Matrix>& m) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  return out.str();
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_matrix_csv(buffer.str());
}

void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::Ref<const Matrix>& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_matrix_csv(m);
}

}  // namespace nsynth
