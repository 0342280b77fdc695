#include "nsynth/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "nsynth/verify.hpp"

namespace nsynth {

namespace fixtures {

SystemPair sweep_system() {
  Matrix a(3, 3), b(3, 2);
  a << 0.850, -0.038, -0.380,  //
      0.735, 0.815, 1.594,     //
      -0.664, 0.697, -0.064;
  b << 1.431, 0.705,  //
      1.620, -1.129,  //
      0.913, 0.369;
  return {a, b};
}

SystemPair aircraft_system() {
  Matrix a(6, 6), bt(2, 6);
  a << 1.000, -0.374, -0.190, -0.321, 0.056, -0.026,  //
      0.000, 0.982, 0.010, -0.000, -0.003, 0.001,     //
      0.000, 0.115, 0.975, -0.000, -0.269, 0.191,     //
      0.000, 0.001, 0.010, 1.000, -0.001, 0.001,      //
      0.000, 0.000, 0.000, 0.000, 0.741, 0.000,       //
      0.000, 0.000, 0.000, 0.000, 0.000, 0.741;
  bt << 0.007, 0.000, -0.043, 0.000, 0.259, 0.000,  //
      -0.003, 0.000, 0.030, 0.000, 0.000, 0.259;
  return {a, bt.transpose()};
}

PerformanceSpec aircraft_spec() {
  PerformanceSpec s;
  s.c = Matrix::Zero(1, 6);
  s.c(0, 5) = 1.0;
  s.d = Matrix::Zero(1, 2);
  return s;
}

ComparisonData comparison() {
  SystemPair truth{Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  DataSet d;
  d.x.resize(1, 4);
  d.x << 0.0, 0.0, 1.0, 0.0;
  d.u.resize(1, 3);
  d.u << -0.5, 0.5, -1.5;
  d.w_true = Matrix::Constant(1, 3, 0.5);
  return {truth, d, from_energy_bound(SymMatrix::Scalar(1.0), 3)};
}

}  // namespace fixtures

void parallel_for(int count, const std::function<void(int)>& fn,
                  unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, std::max(count, 1));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t slot,
                          std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(slot),
                    static_cast<std::uint32_t>(trial)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json baseline_json(const BaselineResult& r) {
  nlohmann::json j;
  j["verdict"] = to_string(r.verdict);
  j["margin"] = r.margin;
  j["certificate_residual"] = r.certificate_residual;
  j["solver_status"] = to_string(r.report.status);
  if (r.alpha) j["alpha"] = *r.alpha;
  if (r.k) j["K"] = matrix_json(*r.k);
  return j;
}

}  // namespace

bool ComparisonReport::expected_verdicts() const {
  return stab.verdict == Verdict::Success &&
         depersis.verdict == Feasibility::Infeasible &&
         berberich.verdict == Feasibility::Infeasible;
}

std::string ComparisonReport::to_json() const {
  nlohmann::json j;
  j["synth_stab"]["verdict"] = to_string(stab.verdict);
  if (stab.controller) {
    j["synth_stab"]["K"] = matrix_json(stab.controller->k);
    j["synth_stab"]["P"] = matrix_json(stab.controller->lyapunov());
    j["synth_stab"]["alpha"] = stab.controller->alpha;
    j["synth_stab"]["beta"] = stab.controller->beta;
  }
  j["synth_stab"]["slater"] = stab.slater.satisfied;
  if (closed_loop) j["closed_loop"] = *closed_loop;
  j["reference_point"]["feasible"] = reference_point_feasible;
  j["reference_point"]["worst_eig"] = reference_point_worst_eig;
  j["depersis"] = baseline_json(depersis);
  j["berberich"] = baseline_json(berberich);
  return j.dump(2);
}

ComparisonReport exp_comparison(const SynthSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  const fixtures::ComparisonData fx = fixtures::comparison();
  const DataMatrices d = partition(fx.data);
  ComparisonReport rep;
  rep.stab = synth_stab(d, fx.model, settings);
  if (rep.stab.controller) {
    rep.closed_loop =
        (fx.truth.a + fx.truth.b * rep.stab.controller->k)(0, 0);
  }
  // the explicit point, substituted into the unconditioned LMI
  const SynthProblem fs =
      build_fs_problem(build_n(d, fx.model), 1, 1, std::nullopt, settings);
  Vector x = Vector::Zero(fs.sdp.num_scalars());
  fs.sdp.assign(fs.p, Matrix::Constant(1, 1, 0.9), &x);
  fs.sdp.assign(fs.l, Matrix::Constant(1, 1, -1.35), &x);
  fs.sdp.assign(fs.alpha, Matrix::Constant(1, 1, 1.1), &x);
  fs.sdp.assign(fs.beta, Matrix::Constant(1, 1, 0.18), &x);
  const AssignmentCheck chk = verify_assignment(fs.sdp, x);
  rep.reference_point_feasible = chk.feasible;
  rep.reference_point_worst_eig = chk.worst_eig;
  rep.depersis =
      depersis_lmi(d.x_plus, d.x_minus, d.u_minus, 1.0, 1e-8, settings.solver);
  rep.berberich = berberich_lmi(d.x_plus, d.x_minus, d.u_minus,
                                -Matrix::Ones(1, 1),
                                Matrix::Identity(3, 3), 1e-8, settings.solver);
  rep.seconds = elapsed(start);
  return rep;
}

std::string SweepReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  for (const SweepRow& r : rows) {
    j["rows"].push_back({{"eps", r.eps},
                         {"trials", r.trials},
                         {"success", r.success},
                         {"success_rate", r.success_rate()},
                         {"slater", r.slater},
                         {"not_informative", r.not_informative},
                         {"indeterminate", r.indeterminate}});
  }
  return j.dump(2);
}

std::string SweepReport::to_csv() const {
  std::ostringstream out;
  out << "eps,trials,success,success_rate,slater\n";
  for (const SweepRow& r : rows) {
    out << r.eps << ',' << r.trials << ',' << r.success << ','
        << r.success_rate() << ',' << r.slater << '\n';
  }
  return out.str();
}

SweepReport exp_stabilization_sweep(const SystemPair& sys,
                                    const std::vector<double>& levels,
                                    int trials, std::uint64_t seed,
                                    int samples,
                                    const SynthSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  sys.validate();
  const int n = sys.n(), m = sys.m();
  SweepReport rep;
  rep.seed = seed;
  const int total = static_cast<int>(levels.size()) * trials;
  rep.trials.resize(total);
  parallel_for(total, [&](int idx) {
    const int level = idx / trials;
    SweepTrial& tr = rep.trials[idx];
    tr.eps = levels[level];
    tr.trial = idx % trials;
    tr.seed = derive_seed(seed, level, tr.trial);
    Rng rng(tr.seed);
    const Vector x0 = gaussian_matrix(rng, n, 1);
    const Matrix u = gaussian_matrix(rng, m, samples);
    const Matrix w = uniform_ball_columns(rng, n, samples, tr.eps);
    tr.data = partition(simulate(sys, x0, u, w));
    const NoiseModel model = from_sample_norm_bound(tr.eps, n, samples);
    const SynthResult r = synth_stab(tr.data, model, settings);
    tr.verdict = r.verdict;
    tr.slater = r.slater.satisfied;
    tr.positive_eigenvalues = r.slater.positive_eigenvalues;
    tr.controller = r.controller;
    if (r.controller) {
      tr.stabilizes = spectral_radius(sys.a + sys.b * r.controller->k) < 1.0;
    }
  });
  for (std::size_t level = 0; level < levels.size(); ++level) {
    SweepRow row;
    row.eps = levels[level];
    row.trials = trials;
    for (int t = 0; t < trials; ++t) {
      const SweepTrial& tr = rep.trials[level * trials + t];
      row.success += tr.stabilizes ? 1 : 0;
      row.slater += tr.slater ? 1 : 0;
      row.not_informative += tr.verdict == Verdict::NotInformative ? 1 : 0;
      row.indeterminate += tr.verdict == Verdict::Indeterminate ? 1 : 0;
    }
    rep.rows.push_back(row);
  }
  rep.seconds = elapsed(start);
  return rep;
}

AircraftDataset aircraft_dataset(double sigma, double bound_factor,
                                 int samples, std::uint64_t seed,
                                 int max_regenerations) {
  const SystemPair sys = fixtures::aircraft_system();
  const int n = sys.n(), m = sys.m();
  const NoiseModel bound = from_energy_bound(
      SymMatrix::Identity(n) * (bound_factor * samples * sigma * sigma),
      samples);
  for (int attempt = 0; attempt <= max_regenerations; ++attempt) {
    AircraftDataset ds;
    ds.sigma = sigma;
    ds.bound_factor = bound_factor;
    ds.seed = attempt == 0 ? seed : derive_seed(seed, 0, attempt);
    ds.regenerations = attempt;
    Rng rng(ds.seed);
    const Vector x0 = gaussian_matrix(rng, n, 1);
    const Matrix u = gaussian_matrix(rng, m, samples);
    const Matrix w = sigma * gaussian_matrix(rng, n, samples);
    if (!check_noise(bound, w).admissible) continue;
    ds.data = simulate(sys, x0, u, w);
    return ds;
  }
  throw std::runtime_error("aircraft_dataset: noise bound never satisfied");
}

AircraftRun aircraft_run(const AircraftDataset& ds, double bound_factor,
                         int prefix, const SynthSettings& settings) {
  const SystemPair sys = fixtures::aircraft_system();
  const PerformanceSpec spec = fixtures::aircraft_spec();
  const int n = sys.n();
  AircraftRun run;
  run.sigma = ds.sigma;
  run.bound_factor = bound_factor;
  run.samples = prefix;
  const DataMatrices d = partition(ds.data).prefix(prefix);
  const NoiseModel model = from_energy_bound(
      SymMatrix::Identity(n) * (bound_factor * prefix * ds.sigma * ds.sigma),
      prefix);
  const SynthResult r = synth_h2(d, model, spec, std::nullopt, settings);
  run.verdict = r.verdict;
  run.slater = r.slater.satisfied;
  run.controller = r.controller;
  run.strict_margin = r.strict_margin;
  run.flags = r.flags;
  if (r.controller) {
    run.gamma_sq = *r.controller->gamma_achieved * *r.controller->gamma_achieved;
    const ClosedLoop cl = closed_loop(sys, r.controller->k, spec);
    run.stabilizing = spectral_radius(cl.a_cl) < 1.0;
    if (run.stabilizing) {
      const double h2 = h2_norm(cl);
      run.true_h2_sq = h2 * h2;
    }
  }
  return run;
}

std::string AircraftReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["benchmark"] = benchmark;
  j["benchmark_sq"] = benchmark * benchmark;
  const auto run_json = [](const AircraftRun& r) {
    nlohmann::json e;
    e["sigma"] = r.sigma;
    e["bound_factor"] = r.bound_factor;
    e["samples"] = r.samples;
    e["verdict"] = to_string(r.verdict);
    e["slater"] = r.slater;
    e["stabilizing"] = r.stabilizing;
    if (r.gamma_sq) e["certified_sq"] = *r.gamma_sq;
    if (r.true_h2_sq) e["achieved_sq"] = *r.true_h2_sq;
    if (r.strict_margin) e["strict_margin"] = *r.strict_margin;
    if (!r.flags.empty()) e["flags"] = r.flags;
    if (r.controller) e["K"] = matrix_json(r.controller->k);
    return e;
  };
  for (const auto& r : curve) j["curve"].push_back(run_json(r));
  for (const auto& r : variants) j["variants"].push_back(run_json(r));
  for (const auto& d : datasets) {
    j["datasets"].push_back({{"sigma", d.sigma},
                             {"bound_factor", d.bound_factor},
                             {"seed", d.seed},
                             {"regenerations", d.regenerations}});
  }
  return j.dump(2);
}

std::string AircraftReport::plot_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "samples,achieved_sq,benchmark_sq\n";
  for (const AircraftRun& r : curve) {
    out << r.samples << ',';
    if (r.true_h2_sq) out << *r.true_h2_sq;
    out << ',' << benchmark * benchmark << '\n';
  }
  return out.str();
}

AircraftReport exp_aircraft_h2(std::uint64_t seed,
                               const AircraftOptions& opt,
                               const SynthSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  AircraftReport rep;
  rep.seed = seed;
  rep.benchmark = model_based_optimal_h2(fixtures::aircraft_system(),
                                         fixtures::aircraft_spec(),
                                         settings.solver);
  const AircraftDataset main = aircraft_dataset(
      opt.sigma, opt.bound_factor, opt.samples, derive_seed(seed, 1, 0),
      opt.max_regenerations);
  rep.datasets.push_back(main);
  std::vector<int> prefixes;
  for (int i = opt.prefix_step; i < opt.samples; i += opt.prefix_step) {
    prefixes.push_back(i);
  }
  prefixes.push_back(opt.samples);
  rep.curve.resize(prefixes.size());
  parallel_for(static_cast<int>(prefixes.size()), [&](int i) {
    rep.curve[i] = aircraft_run(main, opt.bound_factor, prefixes[i], settings);
  });
  if (opt.variants) {
    // sigma, factor the data must satisfy, factors to run
    struct Variant {
      double sigma;
      double data_factor;
      std::vector<double> run_factors;
    };
    const std::vector<Variant> vs = {{0.05, 1.35, {1.35}},
                                     {0.5, 1.22, {1.35, 1.22}},
                                     {1.0, 1.35, {1.35}}};
    for (std::size_t v = 0; v < vs.size(); ++v) {
      const AircraftDataset ds = aircraft_dataset(
          vs[v].sigma, vs[v].data_factor, opt.samples,
          derive_seed(seed, 2 + v, 0), opt.max_regenerations);
      rep.datasets.push_back(ds);
      for (double f : vs[v].run_factors) {
        rep.variants.push_back(aircraft_run(ds, f, opt.samples, settings));
      }
    }
  }
  rep.seconds = elapsed(start);
  return rep;
}

}  // namespace nsynth
