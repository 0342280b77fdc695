#include <benchmark/benchmark.h>

#include "nsynth/experiments.hpp"
#include "nsynth/slemma.hpp"
#include "nsynth/verify.hpp"

using namespace nsynth;

namespace {

DataMatrices sweep_data(int samples, double eps, std::uint64_t seed) {
  Rng rng(seed);
  const SystemPair sys = fixtures::sweep_system();
  const DataSet ds = simulate(sys, gaussian_matrix(rng, 3, 1).col(0),
                              gaussian_matrix(rng, 2, samples),
                              uniform_ball_columns(rng, 3, samples, eps));
  return partition(ds);
}

void BM_SolveFs(benchmark::State& state) {
  const int samples = static_cast<int>(state.range(0));
  const DataMatrices d = sweep_data(samples, 0.5, 7);
  const DataQmi q = build_data_qmi(d, from_sample_norm_bound(0.5, 3, samples));
  const SynthProblem p = build_fs_problem(q.n, 3, 2, q.ellipsoid);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(p.sdp));
  }
}
BENCHMARK(BM_SolveFs)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SynthStab(benchmark::State& state) {
  const DataMatrices d = sweep_data(20, 0.5, 11);
  const NoiseModel m = from_sample_norm_bound(0.5, 3, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth_stab(d, m));
  }
}
BENCHMARK(BM_SynthStab)->Unit(benchmark::kMillisecond);

void BM_SynthH2Aircraft(benchmark::State& state) {
  const int samples = static_cast<int>(state.range(0));
  const AircraftDataset ds = aircraft_dataset(0.005, 1.35, samples, 5);
  const NoiseModel m = from_energy_bound(
      SymMatrix::Identity(6) * (1.35 * samples * 0.005 * 0.005), samples);
  const DataMatrices d = partition(ds.data);
  const PerformanceSpec spec = fixtures::aircraft_spec();
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth_h2(d, m, spec));
  }
}
BENCHMARK(BM_SynthH2Aircraft)->Arg(100)->Arg(750)->Unit(benchmark::kMillisecond);

void BM_Falsifier(benchmark::State& state) {
  const int budget = static_cast<int>(state.range(0));
  Matrix n(4, 4);
  n << 1.0, 0.2, 0.0, 0.1,
       0.2, 1.0, 0.3, 0.0,
       0.0, 0.3, -1.0, 0.1,
       0.1, 0.0, 0.1, -2.0;
  Matrix m = n;
  m(0, 0) += 0.5;
  const QmiForm nf(SymMatrix(n), 2), mf(SymMatrix(m), 2);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        falsify_implication(mf, nf, budget, ++seed, Strictness::Nonstrict));
  }
}
BENCHMARK(BM_Falsifier)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_HinfNorm(benchmark::State& state) {
  Rng rng(3);
  Matrix a = gaussian_matrix(rng, 6, 6);
  a *= 0.9 / spectral_radius(a);
  const ClosedLoop cl{a, gaussian_matrix(rng, 2, 6)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hinf_norm_grid(cl));
  }
}
BENCHMARK(BM_HinfNorm)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
