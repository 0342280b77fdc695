#include "nsynth/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nsynth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix: expected rows");
  const auto rows = static_cast<int>(j.size());
  const auto cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw ConfigError("matrix: ragged rows");
    }
    for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

fs::path existing(const fs::path& base, const std::string& p) {
  const fs::path path = resolve(base, p);
  if (!fs::exists(path)) throw ConfigError("missing file: " + path.string());
  return path;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

void ensure_out(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw ConfigError("cannot create " + cfg.out.string());
}

Matrix load_matrix(const fs::path& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("config: missing ") + what);
  try {
    return read_matrix_csv(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

DataSet load_trajectory(const RunConfig& cfg) {
  if (cfg.trajectory.empty()) throw ConfigError("config: missing trajectory");
  try {
    return read_trajectory_csv(cfg.trajectory);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("trajectory: ") + e.what());
  }
}

NoiseModel load_noise(const RunConfig& cfg, int n, int samples) {
  if (!cfg.noise) throw ConfigError("config: missing noise");
  const NoiseSpec& ns = *cfg.noise;
  try {
    SymMatrix bound = SymMatrix::Identity(n) * ns.scalar_bound;
    if (ns.bound_file) bound = SymMatrix(read_matrix_csv(*ns.bound_file));
    if (ns.kind == "energy") return from_energy_bound(bound, samples);
    if (ns.kind == "sample-norm") {
      return from_sample_norm_bound(ns.eps, n, samples);
    }
    if (ns.kind == "covariance") {
      return from_sample_covariance(bound, samples, ns.delta);
    }
    if (ns.kind == "files") {
      NoiseModel model = read_noise_model(*ns.dir);
      if (model.n() != n || model.samples() != samples) {
        throw ConfigError("noise files do not match the trajectory");
      }
      return model;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
  throw ConfigError("noise: unknown kind " + ns.kind);
}

std::optional<SystemPair> load_system(const RunConfig& cfg) {
  if (cfg.a.empty() || cfg.b.empty()) return std::nullopt;
  SystemPair sys{load_matrix(cfg.a, "system.a"), load_matrix(cfg.b, "system.b")};
  try {
    sys.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  return sys;
}

PerformanceSpec load_spec(const RunConfig& cfg, int n, int m) {
  PerformanceSpec spec;
  spec.c = load_matrix(cfg.c, "system.c");
  spec.d = cfg.d.empty() ? Matrix(Matrix::Zero(spec.c.rows(), m))
                         : load_matrix(cfg.d, "system.d");
  spec.gamma = cfg.gamma;
  try {
    spec.validate(n, m);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("performance: ") + e.what());
  }
  return spec;
}

std::string hex64(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

json settings_json(const SynthSettings& s) {
  return {{"eps_strict", s.eps_strict},
          {"beta_min", s.beta_min},
          {"p_cap", s.p_cap},
          {"y_cap", s.y_cap},
          {"precondition", s.precondition},
          {"hinf_form",
           s.hinf_form == HinfForm::Printed ? "printed" : "corrected"},
          {"feas_tol", s.solver.feas_tol},
          {"gap_tol", s.solver.gap_tol},
          {"max_iter", s.solver.max_iter}};
}

SynthSettings synth_settings(const RunConfig& cfg) {
  SynthSettings s;
  s.hinf_form = cfg.hinf_form;
  return s;
}

json provenance(const std::string& command, const RunConfig& cfg,
                const json& extra) {
  json j;
  j["tool"] = "noisy-synth";
  j["version"] = kVersion;
  j["command"] = command;
  json inputs = json::object();
  for (const auto& p : cfg.inputs) {
    inputs[p.generic_string()] = fs::exists(p) ? hash_file(p) : "missing";
  }
  j["inputs"] = inputs;
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["settings"] = settings_json(synth_settings(cfg));
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Success: return kExitOk;
    case Verdict::NotInformative: return kExitNotInformative;
    case Verdict::Indeterminate: return kExitIndeterminate;
  }
  return kExitIndeterminate;
}

PerformanceKind perf_kind(const std::string& kind) {
  if (kind == "h2") return PerformanceKind::H2;
  if (kind == "hinf") return PerformanceKind::Hinf;
  return PerformanceKind::None;
}

template <class T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_file(const fs::path& path) {
  return "fnv1a64:" + hex64(fnv1a(read_text(path)));
}

RunConfig RunConfig::parse(const std::string& json_text, const fs::path& base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected an object");
  RunConfig cfg;
  try {
    const auto file = [&](const json& obj, const char* key) -> fs::path {
      if (!obj.contains(key) || obj[key].is_null()) return {};
      const fs::path p = existing(base, obj[key].get<std::string>());
      cfg.inputs.push_back(p);
      return p;
    };
    if (j.contains("system")) {
      const json& s = j["system"];
      cfg.a = file(s, "a");
      cfg.b = file(s, "b");
      cfg.c = file(s, "c");
      cfg.d = file(s, "d");
    }
    if (j.contains("data")) cfg.trajectory = file(j["data"], "trajectory");
    if (j.contains("noise")) {
      const json& n = j["noise"];
      NoiseSpec ns;
      ns.kind = n.value("kind", "");
      if (n.contains("bound")) {
        if (n["bound"].is_string()) {
          ns.bound_file = file(n, "bound");
        } else {
          ns.scalar_bound = n["bound"].get<double>();
        }
      }
      ns.eps = n.value("eps", 0.0);
      ns.delta = n.value("delta", 0.0);
      if (n.contains("dir")) {
        const fs::path dir = existing(base, n["dir"].get<std::string>());
        for (const char* f : {"phi11.csv", "phi12.csv", "phi22.csv"}) {
          if (!fs::exists(dir / f)) {
            throw ConfigError("missing file: " + (dir / f).string());
          }
          cfg.inputs.push_back(dir / f);
        }
        ns.dir = dir;
      }
      if (ns.kind != "energy" && ns.kind != "sample-norm" &&
          ns.kind != "covariance" && ns.kind != "files") {
        throw ConfigError("noise: unknown kind '" + ns.kind + "'");
      }
      if (ns.kind == "files" && !ns.dir) throw ConfigError("noise: missing dir");
      cfg.noise = ns;
    }
    if (j.contains("synth")) {
      const json& s = j["synth"];
      cfg.synth_kind = s.value("kind", "stab");
      if (cfg.synth_kind != "stab" && cfg.synth_kind != "h2" &&
          cfg.synth_kind != "hinf" && cfg.synth_kind != "stab-multi") {
        throw ConfigError("synth: unknown kind '" + cfg.synth_kind + "'");
      }
      cfg.gamma = opt<double>(s, "gamma");
      cfg.eps = s.value("eps", 0.0);
      const std::string form = s.value("hinf_form", "printed");
      if (form == "printed") {
        cfg.hinf_form = HinfForm::Printed;
      } else if (form == "corrected") {
        cfg.hinf_form = HinfForm::Corrected;
      } else {
        throw ConfigError("synth: unknown hinf_form '" + form + "'");
      }
    }
    if (j.contains("verify")) {
      const json& v = j["verify"];
      cfg.controller = file(v, "controller");
      cfg.verify_samples = v.value("samples", cfg.verify_samples);
    }
    if (j.contains("experiment")) {
      cfg.experiment = j["experiment"].value("name", "");
      cfg.trials = j["experiment"].value("trials", cfg.trials);
    }
    if (j.contains("simulate")) {
      const json& s = j["simulate"];
      SimulateSpec sim;
      sim.samples = s.value("samples", 0);
      sim.noise = s.value("noise", "gaussian");
      sim.level = s.value("level", 0.0);
      if (sim.noise != "gaussian" && sim.noise != "ball") {
        throw ConfigError("simulate: unknown noise '" + sim.noise + "'");
      }
      cfg.simulate = sim;
    }
    if (j.contains("slemma")) {
      const json& s = j["slemma"];
      SlemmaSpec sl;
      sl.m = file(s, "m");
      sl.n = file(s, "n");
      sl.k = s.value("k", 0);
      sl.form = s.value("form", "nonstrict");
      sl.budget = s.value("budget", sl.budget);
      if (sl.form != "nonstrict" && sl.form != "strict" &&
          sl.form != "structured") {
        throw ConfigError("slemma: unknown form '" + sl.form + "'");
      }
      cfg.slemma = sl;
    }
    cfg.seed = opt<std::uint64_t>(j, "seed");
    if (j.contains("out")) cfg.out = resolve(base, j["out"].get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.trials < 1 || cfg.verify_samples < 0) {
    throw ConfigError("config: counts must be positive");
  }
  return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("missing file: " + path.string());
  RunConfig cfg = parse(read_text(path), path.parent_path());
  cfg.inputs.insert(cfg.inputs.begin(), path);
  return cfg;
}

std::string controller_json(const SynthResult& r) {
  json j;
  j["verdict"] = to_string(r.verdict);
  j["flags"] = r.flags;
  j["slater"] = {{"satisfied", r.slater.satisfied},
                 {"positive_eigenvalues", r.slater.positive_eigenvalues}};
  j["solver"] = {{"status", to_string(r.report.status)},
                 {"iterations", r.report.iterations},
                 {"objective", r.report.objective_value}};
  if (r.strict_margin) j["strict_margin"] = *r.strict_margin;
  if (r.controller) {
    const Controller& c = *r.controller;
    json k;
    k["K"] = matrix_json(c.k);
    if (c.p) k["P"] = matrix_json(*c.p);
    if (c.y) k["Y"] = matrix_json(*c.y);
    if (c.z) k["Z"] = matrix_json(*c.z);
    k["alpha"] = c.alpha;
    k["beta"] = c.beta;
    if (!c.alphas.empty()) k["alphas"] = c.alphas;
    if (c.mu) k["mu"] = *c.mu;
    if (c.gamma_achieved) k["gamma_achieved"] = *c.gamma_achieved;
    k["flags"] = c.flags;
    j["controller"] = k;
  } else {
    j["controller"] = nullptr;
  }
  return j.dump(2);
}

Controller parse_controller_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("controller: ") + e.what());
  }
  if (!j.contains("controller") || j["controller"].is_null()) {
    throw ConfigError("controller: no controller in file");
  }
  try {
    const json& k = j["controller"];
    Controller c;
    c.k = matrix_from_json(k.at("K"));
    if (k.contains("P")) c.p = SymMatrix(matrix_from_json(k["P"]));
    if (k.contains("Y")) c.y = SymMatrix(matrix_from_json(k["Y"]));
    if (k.contains("Z")) c.z = SymMatrix(matrix_from_json(k["Z"]));
    if (!c.p && !c.y) throw ConfigError("controller: missing certificate");
    c.alpha = k.value("alpha", 0.0);
    c.beta = k.value("beta", 0.0);
    if (k.contains("alphas")) c.alphas = k["alphas"].get<std::vector<double>>();
    c.mu = opt<double>(k, "mu");
    c.gamma_achieved = opt<double>(k, "gamma_achieved");
    if (k.contains("flags")) {
      c.flags = k["flags"].get<std::vector<std::string>>();
    }
    if (j.contains("slater")) c.slater = j["slater"].value("satisfied", false);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("controller: ") + e.what());
  }
}

int cmd_simulate(const RunConfig& cfg) {
  const std::optional<SystemPair> sys = load_system(cfg);
  if (!sys) throw ConfigError("simulate: system.a and system.b are required");
  if (!cfg.simulate || cfg.simulate->samples < 1) {
    throw ConfigError("simulate: samples must be positive");
  }
  if (!cfg.seed) throw ConfigError("simulate: seed is required");
  const SimulateSpec& sim = *cfg.simulate;
  Rng rng(*cfg.seed);
  const Vector x0 = gaussian_matrix(rng, sys->n(), 1).col(0);
  const Matrix u = gaussian_matrix(rng, sys->m(), sim.samples);
  const Matrix w = sim.noise == "ball"
                       ? uniform_ball_columns(rng, sys->n(), sim.samples,
                                              sim.level)
                       : Matrix(sim.level *
                                gaussian_matrix(rng, sys->n(), sim.samples));
  const DataSet d = simulate(*sys, x0, u, w);
  ensure_out(cfg);
  write_trajectory_csv(cfg.out / "trajectory.csv", d);
  write_matrix_csv(cfg.out / "noise.csv", w);
  json extra;
  extra["simulate"] = {{"samples", sim.samples},
                       {"noise", sim.noise},
                       {"level", sim.level}};
  extra["outputs"] = {{"trajectory.csv", hash_file(cfg.out / "trajectory.csv")},
                      {"noise.csv", hash_file(cfg.out / "noise.csv")}};
  write_text(cfg.out / "provenance.json",
             provenance("simulate", cfg, extra).dump(2));
  return kExitOk;
}

int cmd_synth(const RunConfig& cfg) {
  const DataSet ds = load_trajectory(cfg);
  const DataMatrices d = partition(ds);
  const int n = d.n();
  const int m = d.m();
  const SynthSettings settings = synth_settings(cfg);
  const std::optional<SystemPair> sys = load_system(cfg);
  if (sys && (sys->n() != n || sys->m() != m)) {
    throw ConfigError("system does not match the trajectory");
  }
  const PerformanceKind pk = perf_kind(cfg.synth_kind);
  std::optional<PerformanceSpec> spec;
  if (pk != PerformanceKind::None) spec = load_spec(cfg, n, m);

  SynthResult r;
  std::optional<NoiseModel> model;
  if (cfg.synth_kind == "stab-multi") {
    double eps = cfg.eps;
    if (!(eps > 0.0) && cfg.noise && cfg.noise->kind == "sample-norm") {
      eps = cfg.noise->eps;
    }
    if (!(eps > 0.0)) throw ConfigError("stab-multi: synth.eps is required");
    r = synth_stab_multi(d, eps, settings);
    model = from_sample_norm_bound(eps, n, d.samples());
  } else {
    model = load_noise(cfg, n, d.samples());
    if (cfg.synth_kind == "stab") {
      r = synth_stab(d, *model, settings);
    } else if (cfg.synth_kind == "h2") {
      r = synth_h2(d, *model, *spec, std::nullopt, settings);
    } else {
      r = synth_hinf(d, *model, *spec, settings);
    }
  }

  ensure_out(cfg);
  write_text(cfg.out / "controller.json", controller_json(r));

  json verify;
  verify["verdict"] = to_string(r.verdict);
  if (r.controller && cfg.synth_kind == "stab-multi") {
    // the certificate covers the intersection of the per-sample sets only
    verify["robust"] = nullptr;
  } else if (r.controller) {
    const DataQmi q = build_data_qmi(d, *model);
    const std::uint64_t seed = cfg.seed.value_or(0);
    const PerformanceSpec* sp = spec ? &*spec : nullptr;
    const PerformanceKind vk =
        r.controller->gamma_achieved ? pk : PerformanceKind::None;
    const RobustReport rep =
        q.ellipsoid ? robust_verify(*r.controller, *q.ellipsoid, n, sp, vk,
                                    cfg.verify_samples, seed)
                    : robust_verify(*r.controller, q.n, sp, vk,
                                    cfg.verify_samples, seed);
    verify["robust"] = json::parse(rep.to_json());
    if (sys) {
      const PerformanceSpec plain =
          spec ? *spec
               : PerformanceSpec{Matrix(Matrix::Identity(n, n)),
                                 Matrix(Matrix::Zero(n, m)), std::nullopt};
      const ClosedLoop cl = closed_loop(*sys, r.controller->k, plain);
      const double rho = spectral_radius(cl.a_cl);
      json t;
      t["spectral_radius"] = rho;
      t["stable"] = rho < 1.0;
      if (rho < 1.0 && pk == PerformanceKind::H2) t["h2_norm"] = h2_norm(cl);
      if (rho < 1.0 && pk == PerformanceKind::Hinf) {
        t["hinf_norm"] = hinf_norm_grid(cl);
      }
      verify["true_system"] = t;
    }
  }
  write_text(cfg.out / "verify.json", verify.dump(2));

  json extra;
  extra["synth"] = {{"kind", cfg.synth_kind}, {"verify_samples", cfg.verify_samples}};
  if (cfg.gamma) extra["synth"]["gamma"] = *cfg.gamma;
  if (cfg.noise) extra["noise"] = cfg.noise->kind;
  extra["slater"] = {{"satisfied", r.slater.satisfied},
                     {"positive_eigenvalues", r.slater.positive_eigenvalues}};
  extra["verdict"] = to_string(r.verdict);
  if (!cfg.seed) extra["seed"] = 0;
  write_text(cfg.out / "provenance.json",
             provenance("synth", cfg, extra).dump(2));
  return exit_for(r.verdict);
}

int cmd_verify(const RunConfig& cfg) {
  const fs::path cpath =
      cfg.controller.empty() ? cfg.out / "controller.json" : cfg.controller;
  if (!fs::exists(cpath)) throw ConfigError("missing file: " + cpath.string());
  const Controller c = parse_controller_json(read_text(cpath));
  const DataMatrices d = partition(load_trajectory(cfg));
  const int n = d.n();
  if (cfg.synth_kind == "stab-multi") {
    throw ConfigError("verify: stab-multi controllers are not supported");
  }
  const NoiseModel model = load_noise(cfg, n, d.samples());
  const PerformanceKind pk =
      c.gamma_achieved ? perf_kind(cfg.synth_kind) : PerformanceKind::None;
  std::optional<PerformanceSpec> spec;
  if (pk != PerformanceKind::None) spec = load_spec(cfg, n, d.m());
  const DataQmi q = build_data_qmi(d, model);
  const std::uint64_t seed = cfg.seed.value_or(0);
  const PerformanceSpec* sp = spec ? &*spec : nullptr;
  const RobustReport rep =
      q.ellipsoid
          ? robust_verify(c, *q.ellipsoid, n, sp, pk, cfg.verify_samples, seed)
          : robust_verify(c, q.n, sp, pk, cfg.verify_samples, seed);
  ensure_out(cfg);
  json verify;
  verify["robust"] = json::parse(rep.to_json());
  verify["pass"] = rep.all_pass();
  write_text(cfg.out / "verify.json", verify.dump(2));
  RunConfig with_ctrl = cfg;
  with_ctrl.inputs.push_back(cpath);
  json extra;
  extra["verify_samples"] = cfg.verify_samples;
  if (!cfg.seed) extra["seed"] = 0;
  write_text(cfg.out / "provenance.json",
             provenance("verify", with_ctrl, extra).dump(2));
  return rep.all_pass() ? kExitOk : kExitIndeterminate;
}

int cmd_slemma(const RunConfig& cfg) {
  if (!cfg.slemma) throw ConfigError("config: missing slemma section");
  const SlemmaSpec& sl = *cfg.slemma;
  if (!cfg.seed) throw ConfigError("slemma: seed is required");
  const Matrix mm = load_matrix(sl.m, "slemma.m");
  const Matrix nm = load_matrix(sl.n, "slemma.n");
  if (mm.rows() != nm.rows() || sl.k < 1 || sl.k >= mm.rows()) {
    throw ConfigError("slemma: inconsistent dimensions");
  }
  QmiForm m_form, n_form;
  try {
    m_form = QmiForm(SymMatrix(mm), sl.k);
    n_form = QmiForm(SymMatrix(nm), sl.k);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("slemma: ") + e.what());
  }
  std::optional<MultiplierCertificate> cert;
  Theorem th = Theorem::Nonstrict;
  if (sl.form == "nonstrict") {
    cert = find_multiplier(m_form, n_form, CertificateForm::Nonstrict);
  } else if (sl.form == "strict") {
    cert = find_multiplier(m_form, n_form, CertificateForm::Strict);
    th = Theorem::Strict;
  } else {
    cert = find_multiplier_structured(m_form, n_form, sl.k);
    th = Theorem::Structured;
  }
  const Strictness strict =
      sl.form == "nonstrict" ? Strictness::Nonstrict : Strictness::Strict;
  const FalsifyResult fr =
      falsify_implication(m_form, n_form, sl.budget, *cfg.seed, strict);
  const PreconditionReport pre =
      check_theorem_preconditions(m_form, n_form, th);

  ensure_out(cfg);
  json j;
  j["form"] = sl.form;
  json conds = json::object();
  for (const auto& [name, v] : pre.conditions) conds[name] = to_string(v);
  j["preconditions"] = conds;
  if (cert) {
    j["certificate"] = {{"alpha", cert->alpha}, {"margin", cert->margin}};
    if (cert->beta) j["certificate"]["beta"] = *cert->beta;
    std::ostringstream csv;
    csv.precision(17);
    csv << "alpha,beta\n" << cert->alpha << ',';
    if (cert->beta) csv << *cert->beta;
    write_text(cfg.out / "certificate.csv", csv.str());
  } else {
    j["certificate"] = nullptr;
  }
  const char* status = fr.status == FalsifyStatus::Counterexample ? "counterexample"
                       : fr.status == FalsifyStatus::NoneFound   ? "none-found"
                                                                 : "inconclusive";
  j["falsifier"] = {{"status", status},
                    {"budget", sl.budget},
                    {"drawn", fr.drawn},
                    {"accepted", fr.accepted},
                    {"worst_target", fr.worst_target}};
  if (fr.counterexample) {
    write_matrix_csv(cfg.out / "counterexample.csv", *fr.counterexample);
  }
  int code = kExitIndeterminate;
  std::string verdict = "indeterminate";
  if (cert && !fr.counterexample) {
    code = kExitOk;
    verdict = "implication-holds";
  } else if (!cert && fr.counterexample) {
    code = kExitNotInformative;
    verdict = "implication-fails";
  } else if (cert && fr.counterexample) {
    verdict = "inconsistent";
  }
  j["verdict"] = verdict;
  write_text(cfg.out / "report.json", j.dump(2));
  std::cout << j.dump() << '\n';
  json extra;
  extra["slemma"] = {{"k", sl.k}, {"form", sl.form}, {"budget", sl.budget}};
  write_text(cfg.out / "provenance.json",
             provenance("slemma", cfg, extra).dump(2));
  return code;
}

int cmd_exp(const std::string& name, const RunConfig& cfg) {
  const SynthSettings settings = synth_settings(cfg);
  json extra;
  extra["experiment"] = name;
  std::string report;
  std::string plot;
  RunConfig run = cfg;
  if (name == "comparison") {
    const ComparisonReport rep = exp_comparison(settings);
    report = rep.to_json();
    plot = "method,verdict\n";
    plot += "synth_stab," + to_string(rep.stab.verdict) + "\n";
    plot += "depersis," + to_string(rep.depersis.verdict) + "\n";
    plot += "berberich," + to_string(rep.berberich.verdict) + "\n";
    extra["expected_verdicts"] = rep.expected_verdicts();
  } else if (name == "sweep") {
    if (!run.seed) run.seed = 7;
    const std::optional<SystemPair> sys = load_system(run);
    const std::vector<double> levels{0.5, 1.0, 1.5, 2.0, 2.2, 2.4};
    const SweepReport rep = exp_stabilization_sweep(
        sys ? *sys : fixtures::sweep_system(), levels, run.trials, *run.seed,
        20, settings);
    report = rep.to_json();
    plot = rep.to_csv();
    extra["trials"] = run.trials;
    extra["levels"] = levels;
    extra["samples"] = 20;
  } else if (name == "aircraft") {
    if (!run.seed) run.seed = 5;
    const AircraftOptions opts;
    const AircraftReport rep = exp_aircraft_h2(*run.seed, opts, settings);
    report = rep.to_json();
    plot = rep.plot_csv();
    extra["options"] = {{"samples", opts.samples},
                        {"prefix_step", opts.prefix_step},
                        {"sigma", opts.sigma},
                        {"bound_factor", opts.bound_factor},
                        {"variants", opts.variants},
                        {"max_regenerations", opts.max_regenerations}};
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  ensure_out(run);
  write_text(run.out / "report.json", report);
  write_text(run.out / "plot.csv", plot);
  extra["outputs"] = {{"report.json", hash_file(run.out / "report.json")},
                      {"plot.csv", hash_file(run.out / "plot.csv")}};
  write_text(run.out / "provenance.json",
             provenance("exp " + name, run, extra).dump(2));
  return kExitOk;
}

}  // namespace nsynth
