#include <gtest/gtest.h>

#include <filesystem>

#include "nsynth/experiments.hpp"

using namespace nsynth;

#ifndef NSYNTH_DATA_DIR
#error "NSYNTH_DATA_DIR must point at the data fixtures"
#endif

namespace {

const std::filesystem::path kData = NSYNTH_DATA_DIR;

}  // namespace

TEST(Fixtures, SweepCsvMatchesCode) {
  const SystemPair s = fixtures::sweep_system();
  EXPECT_EQ(read_matrix_csv(kData / "sweep/a.csv"), s.a);
  EXPECT_EQ(read_matrix_csv(kData / "sweep/b.csv"), s.b);
}

TEST(Fixtures, AircraftCsvMatchesCode) {
  const SystemPair s = fixtures::aircraft_system();
  const PerformanceSpec p = fixtures::aircraft_spec();
  EXPECT_EQ(read_matrix_csv(kData / "aircraft/a.csv"), s.a);
  EXPECT_EQ(read_matrix_csv(kData / "aircraft/b.csv"), s.b);
  EXPECT_EQ(read_matrix_csv(kData / "aircraft/c.csv"), p.c);
  EXPECT_EQ(read_matrix_csv(kData / "aircraft/d.csv"), p.d);
}

TEST(Fixtures, ComparisonCsvMatchesCode) {
  const auto fx = fixtures::comparison();
  const DataSet d = read_trajectory_csv(kData / "comparison/trajectory.csv");
  EXPECT_EQ(d.x, fx.data.x);
  EXPECT_EQ(d.u, fx.data.u);
  EXPECT_EQ(read_matrix_csv(kData / "comparison/a.csv"), fx.truth.a);
  EXPECT_EQ(read_matrix_csv(kData / "comparison/b.csv"), fx.truth.b);
}

TEST(Seeds, DerivedSeedsDistinct) {
  EXPECT_NE(derive_seed(7, 0, 0), derive_seed(7, 0, 1));
  EXPECT_NE(derive_seed(7, 0, 0), derive_seed(7, 1, 0));
  EXPECT_EQ(derive_seed(7, 2, 3), derive_seed(7, 2, 3));
}

TEST(ParallelFor, CoversRange) {
  std::vector<int> hit(100, 0);
  parallel_for(100, [&](int i) { hit[i] += 1; }, 4);
  for (int h : hit) EXPECT_EQ(h, 1);
}

TEST(Sweep, Deterministic) {
  const std::vector<double> levels{0.5, 2.4};
  const SweepReport a = exp_stabilization_sweep(fixtures::sweep_system(), levels, 8, 99);
  const SweepReport b = exp_stabilization_sweep(fixtures::sweep_system(), levels, 8, 99);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(a.to_csv(), b.to_csv());
  ASSERT_EQ(a.rows.size(), 2u);
  EXPECT_EQ(a.rows[0].trials, 8);
}

TEST(Sweep, NearNoiselessAlwaysSucceeds) {
  const SweepReport r =
      exp_stabilization_sweep(fixtures::sweep_system(), {1e-6}, 20, 5);
  EXPECT_EQ(r.rows[0].success, 20);
  EXPECT_EQ(r.rows[0].slater, 20);
}

TEST(Aircraft, DatasetRespectsBound) {
  const AircraftDataset ds = aircraft_dataset(0.005, 1.35, 750, 5);
  const DataMatrices d = partition(ds.data);
  EXPECT_EQ(d.samples(), 750);
  const SystemPair s = fixtures::aircraft_system();
  const Matrix w = d.x_plus - s.a * d.x_minus - s.b * d.u_minus;
  const NoiseModel m =
      from_energy_bound(SymMatrix::Identity(6) * (1.35 * 750 * 0.005 * 0.005), 750);
  EXPECT_TRUE(check_noise(m, w).admissible);
}
