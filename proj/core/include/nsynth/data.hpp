#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "nsynth/matcore.hpp"

namespace nsynth {

struct SystemPair {
  Matrix a;  // n x n
  Matrix b;  // n x m

  int n() const { return static_cast<int>(a.rows()); }
  int m() const { return static_cast<int>(b.cols()); }
  /// Throws if shapes are inconsistent or entries are not finite.
  void validate() const;
};

/// Measured trajectory x(0..T), u(0..T-1), optionally with the noise that
/// generated it.
struct DataSet {
  Matrix x;  // n x (T+1)
  Matrix u;  // m x T
  std::optional<Matrix> w_true;

  int n() const { return static_cast<int>(x.rows()); }
  int m() const { return static_cast<int>(u.rows()); }
  int samples() const { return static_cast<int>(u.cols()); }
  void validate() const;
};

struct DataMatrices {
  Matrix x_plus;   // n x T
  Matrix x_minus;  // n x T
  Matrix u_minus;  // m x T

  int n() const { return static_cast<int>(x_plus.rows()); }
  int m() const { return static_cast<int>(u_minus.rows()); }
  int samples() const { return static_cast<int>(x_plus.cols()); }
  /// Columns [0, count) only.
  DataMatrices prefix(int count) const;
};

/// x(t+1) = A x(t) + B u(t) + w(t).
DataSet simulate(const SystemPair& sys, const Vector& x0, const Matrix& u,
                 const Matrix& w);

DataMatrices partition(const DataSet& d);

/// Horizontal concatenation of the per-experiment partitions.
DataMatrices stack(const std::vector<DataSet>& ds);

/// Reads a trajectory with header "t,x1..xn,u1..um". The final row may
/// leave the input cells empty.
DataSet read_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const std::filesystem::path& path, const DataSet& d);

using Rng = std::mt19937_64;

/// n x cols matrix of standard normal entries.
Matrix gaussian_matrix(Rng& rng, int rows, int cols);

/// Columns drawn independently and uniformly from the Euclidean ball
/// {w : ||w||^2 <= eps}.
Matrix uniform_ball_columns(Rng& rng, int n, int cols, double eps);

}  // namespace nsynth
