#include "nsynth/noise.hpp"

#include <stdexcept>
#include <string>

namespace nsynth {

NoiseModel::NoiseModel(SymMatrix phi11, Matrix phi12, SymMatrix phi22,
                       const Tolerance& tol)
    : phi11_(std::move(phi11)),
      phi12_(std::move(phi12)),
      phi22_(std::move(phi22)) {
  if (phi12_.rows() != phi11_.dim() || phi12_.cols() != phi22_.dim()) {
    throw std::invalid_argument("NoiseModel: Phi12 must be " +
                                std::to_string(phi11_.dim()) + "x" +
                                std::to_string(phi22_.dim()));
  }
  if (!all_finite(phi12_)) {
    throw std::invalid_argument("NoiseModel: non-finite Phi12");
  }
  if (!definiteness(phi22_, Definiteness::ND, tol)) {
    throw std::invalid_argument("NoiseModel: Phi22 must be negative definite");
  }
}

Matrix NoiseModel::stacked() const {
  const int n = this->n(), t = samples();
  Matrix phi(n + t, n + t);
  phi << phi11_.matrix(), phi12_, phi12_.transpose(), phi22_.matrix();
  return phi;
}

NoiseModel from_energy_bound(const SymMatrix& bound, int samples) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  if (!definiteness(bound, Definiteness::PSD)) {
    throw std::invalid_argument("energy bound must be PSD");
  }
  return {bound, Matrix::Zero(bound.dim(), samples),
          SymMatrix(-Matrix::Identity(samples, samples))};
}

NoiseModel from_sample_norm_bound(double eps, int n, int samples) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (n < 1 || samples < 1) {
    throw std::invalid_argument("dimensions must be positive");
  }
  return from_energy_bound(SymMatrix(samples * eps * Matrix::Identity(n, n)),
                           samples);
}

NoiseModel from_sample_covariance(const SymMatrix& bound, int samples,
                                  double delta) {
  if (samples < 2) throw std::invalid_argument("samples must be >= 2");
  if (!definiteness(bound, Definiteness::PSD)) {
    throw std::invalid_argument("covariance bound must be PSD");
  }
  if (delta < 0.0) throw std::invalid_argument("delta must be >= 0");
  const double t = samples;
  const Matrix centering = Matrix::Identity(samples, samples) -
                           Matrix::Ones(samples, samples) / t;
  const Matrix phi22 = -centering / (t - 1.0) -
                       delta * Matrix::Identity(samples, samples);
  // throws through the NoiseModel invariant when delta == 0
  return {bound, Matrix::Zero(bound.dim(), samples), SymMatrix(phi22)};
}

NoiseModel embed_subspace(const Matrix& e, const NoiseModel& hat) {
  if (e.cols() != hat.n()) {
    throw std::invalid_argument("embed_subspace: E must have " +
                                std::to_string(hat.n()) + " columns");
  }
  return {SymMatrix(e * hat.phi11().matrix() * e.transpose()),
          e * hat.phi12(), hat.phi22()};
}

NoiseModel compose_stacked(const std::vector<NoiseModel>& parts) {
  if (parts.empty()) throw std::invalid_argument("no noise models to stack");
  const int n = parts.front().n();
  int total = 0;
  for (const auto& p : parts) {
    if (p.n() != n) throw std::invalid_argument("inconsistent state dimension");
    total += p.samples();
  }
  Matrix phi11 = Matrix::Zero(n, n);
  Matrix phi12 = Matrix::Zero(n, total);
  Matrix phi22 = Matrix::Zero(total, total);
  int off = 0;
  for (const auto& p : parts) {
    const int t = p.samples();
    phi11 += p.phi11().matrix();
    phi12.middleCols(off, t) = p.phi12();
    phi22.block(off, off, t, t) = p.phi22().matrix();
    off += t;
  }
  return {SymMatrix(phi11), phi12, SymMatrix(phi22)};
}

NoiseCheck check_noise(const NoiseModel& model, const Matrix& w,
                       const Tolerance& tol) {
  if (w.rows() != model.n() || w.cols() != model.samples()) {
    throw std::invalid_argument("check_noise: W has wrong dimensions");
  }
  const Matrix q = model.phi11().matrix() + model.phi12() * w.transpose() +
                   w * model.phi12().transpose() +
                   w * model.phi22().matrix() * w.transpose();
  const SymMatrix s(q);
  return {definiteness(s, Definiteness::PSD, tol), min_eig(s)};
}

TransposedModel to_transposed_model(const NoiseModel& model,
                                    const Tolerance& tol) {
  if (!definiteness(model.phi11(), Definiteness::PD, tol)) {
    throw std::invalid_argument("transposed model needs Phi11 > 0");
  }
  if (model.phi12().cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("transposed model needs Phi12 = 0");
  }
  const int n = model.n(), t = model.samples();
  const Matrix inv11 = model.phi11().matrix().ldlt().solve(
      Matrix::Identity(n, n));
  const Matrix inv22 = model.phi22().matrix().ldlt().solve(
      Matrix::Identity(t, t));
  return {SymMatrix(-inv22), Matrix::Zero(t, n), SymMatrix(-inv11)};
}

NoiseModel read_noise_model(const std::filesystem::path& dir) {
  return {SymMatrix(read_matrix_csv(dir / "phi11.csv")),
          read_matrix_csv(dir / "phi12.csv"),
          SymMatrix(read_matrix_csv(dir / "phi22.csv"))};
}

void write_noise_model(const NoiseModel& model,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "phi11.csv", model.phi11().matrix());
  write_matrix_csv(dir / "phi12.csv", model.phi12());
  write_matrix_csv(dir / "phi22.csv", model.phi22().matrix());
}

}  // namespace nsynth
