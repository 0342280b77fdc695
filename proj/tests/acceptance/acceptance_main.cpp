// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion.
//
// Usage: nsynth_acceptance [--known-red 2,3] [--only 1,4]
// Exit status is 0 when the failing set equals the --known-red set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nsynth/experiments.hpp"
#include "nsynth/sigma.hpp"
#include "nsynth/slemma.hpp"
#include "nsynth/verify.hpp"

using namespace nsynth;

namespace {

// pinned tolerances
constexpr double kReferencePointEig = -1e-8;
constexpr double kCertificateTol = 1e-8;
constexpr double kBenchmarkTol = 0.005;
constexpr double kH2Rel = 1e-6;
constexpr double kHinfRel = 1e-3;
constexpr double kAnalytic = 1e-9;
constexpr double kLemma1 = 1e-9;
constexpr double kDegenerate = 1e-3;  // |gap| / scale below this is rejected
constexpr int kVerifySamples = 500;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Controllers produced by criteria 1-3, kept for criterion 6.
struct Produced {
  std::string origin;
  Controller ctrl;
  Ellipsoid set;
  int n = 0;
};
std::vector<Produced> g_produced;

void keep(const std::string& origin, const Controller& c,
          const DataMatrices& d, const NoiseModel& m) {
  const DataQmi q = build_data_qmi(d, m);
  if (!q.ellipsoid) return;
  g_produced.push_back({origin, c, *q.ellipsoid, d.n()});
}

// --------------------------------------------------------------- 1

Outcome criterion1() {
  const auto t0 = Clock::now();
  const ComparisonReport r = exp_comparison();
  const double sec = since(t0);
  Outcome o;
  const bool stab = r.stab.verdict == Verdict::Success && r.closed_loop &&
                    std::abs(*r.closed_loop) < 1.0;
  const bool point = r.reference_point_feasible &&
                     r.reference_point_worst_eig >= kReferencePointEig;
  const bool dp = r.depersis.verdict == Feasibility::Infeasible &&
                  r.depersis.certificate_residual <= kCertificateTol;
  const bool bb = r.berberich.verdict == Feasibility::Infeasible &&
                  r.berberich.certificate_residual <= kCertificateTol;
  o.pass = stab && point && dp && bb && sec < 5.0;
  std::ostringstream s;
  s << "closed loop " << (r.closed_loop ? *r.closed_loop : NAN)
    << ", point eig " << r.reference_point_worst_eig << ", depersis "
    << to_string(r.depersis.verdict) << " (" << r.depersis.certificate_residual
    << "), berberich " << to_string(r.berberich.verdict) << " ("
    << r.berberich.certificate_residual << "), " << fmt("%.2f s", sec);
  o.detail = s.str();
  if (r.stab.controller) {
    const auto fx = fixtures::comparison();
    keep("comparison", *r.stab.controller, partition(fx.data), fx.model);
  }
  return o;
}

// --------------------------------------------------------------- 2

Outcome criterion2() {
  const auto t0 = Clock::now();
  const AircraftReport r = exp_aircraft_h2(5);
  const double sec = since(t0);
  Outcome o;
  const bool bench = std::abs(r.benchmark - 1.0) <= kBenchmarkTol;
  const AircraftRun& full = r.full_run();
  const bool achieved = full.true_h2_sq && *full.true_h2_sq >= 1.0 &&
                        *full.true_h2_sq <= 1.1;
  bool infeasible_at_one = false;
  for (const auto& v : r.variants) {
    if (v.sigma == 1.0) infeasible_at_one = v.verdict == Verdict::NotInformative;
  }
  std::optional<double> at500;
  int stabilizing = 0;
  for (const auto& c : r.curve) {
    if (c.samples == 500) at500 = c.true_h2_sq;
    stabilizing += c.stabilizing;
  }
  const bool curve = static_cast<int>(r.curve.size()) == 15 &&
                     !r.plot_csv().empty();
  const bool monotone = at500 && full.true_h2_sq &&
                        *full.true_h2_sq <= *at500 + 0.05;
  const bool all_stab = stabilizing == static_cast<int>(r.curve.size());
  o.pass = bench && achieved && infeasible_at_one && curve && monotone &&
           all_stab && sec < 600.0;
  std::ostringstream s;
  s << "benchmark " << r.benchmark << ", achieved^2(750) "
    << (full.true_h2_sq ? *full.true_h2_sq : NAN) << ", sigma=1 "
    << (infeasible_at_one ? "infeasible" : "NOT certified") << ", stabilizing "
    << stabilizing << "/" << r.curve.size();
  for (const auto& c : r.curve) {
    if (!c.stabilizing) s << " [i=" << c.samples << ": " << to_string(c.verdict) << "]";
  }
  s << ", " << fmt("%.1f s", sec);
  o.detail = s.str();
  for (const auto& ds : r.datasets) {
    for (const auto* runs : {&r.curve, &r.variants}) {
      for (const auto& c : *runs) {
        if (!c.controller || c.sigma != ds.sigma ||
            c.bound_factor != ds.bound_factor) {
          continue;
        }
        const int n = 6;
        const NoiseModel m = from_energy_bound(
            SymMatrix::Identity(n) * (c.bound_factor * c.samples * c.sigma * c.sigma),
            c.samples);
        keep("aircraft i=" + std::to_string(c.samples), *c.controller,
             partition(ds.data).prefix(c.samples), m);
      }
    }
  }
  return o;
}

// --------------------------------------------------------------- 3

Outcome criterion3() {
  const auto t0 = Clock::now();
  const std::vector<double> levels{0.5, 1.0, 1.5, 2.0, 2.2, 2.4};
  const SweepReport r =
      exp_stabilization_sweep(fixtures::sweep_system(), levels, 100, 7);
  const double sec = since(t0);
  Outcome o;
  bool decreasing = true;
  int slater = 0, total = 0;
  std::ostringstream s;
  s << "success";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    s << ' ' << r.rows[i].success;
    slater += r.rows[i].slater;
    total += r.rows[i].trials;
    for (std::size_t j = 0; j < i; ++j) {
      if (r.rows[i].success_rate() > r.rows[j].success_rate() + 0.05) {
        decreasing = false;
      }
    }
  }
  const double first = r.rows.front().success_rate();
  const double last = r.rows.back().success_rate();
  const bool slater_ok = slater >= 0.99 * total;
  o.pass = first >= 0.95 && last >= 0.55 && last <= 0.90 && decreasing &&
           slater_ok && sec < 600.0;
  s << " %, slater " << slater << "/" << total << ", " << fmt("%.1f s", sec);
  o.detail = s.str();
  const SystemPair sys = fixtures::sweep_system();
  for (const auto& t : r.trials) {
    if (t.verdict != Verdict::Success || !t.controller) continue;
    keep("sweep eps=" + fmt("%g", t.eps), *t.controller, t.data,
         from_sample_norm_bound(t.eps, 3, t.data.samples()));
  }
  return o;
}

// --------------------------------------------------------------- 4

Matrix random_sym(Rng& rng, int d, double lo, double hi) {
  std::uniform_real_distribution<double> ud(lo, hi);
  const Matrix g = gaussian_matrix(rng, d, d);
  const Matrix q = g.householderQr().householderQ();
  Vector lam(d);
  for (int i = 0; i < d; ++i) lam(i) = ud(rng);
  return q * lam.asDiagonal() * q.transpose();
}

// N11 > 0 and N22 < 0: the generalized Slater condition holds at Z = 0,
// S_N is bounded and N is nonsingular.
QmiForm random_n(Rng& rng, int k, int q) {
  const Matrix n22 = -random_sym(rng, q, 0.2, 2.0);
  const Matrix n11 = random_sym(rng, k, 0.2, 2.0);
  const Matrix n12 = gaussian_matrix(rng, k, q);
  Matrix n(k + q, k + q);
  n << n11, n12, n12.transpose(), n22;
  return QmiForm(SymMatrix(n), k);
}

Outcome criterion4() {
  Rng rng(2024);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_real_distribution<double> ua(0.2, 3.0);
  const CertificateForm forms[] = {CertificateForm::Nonstrict,
                                   CertificateForm::Strict,
                                   CertificateForm::Structured};
  int accepted = 0, rejected = 0, certified = 0, refuted = 0;
  int soundness = 0, missed = 0;
  std::map<std::string, int> per_form;
  while (accepted < 1000) {
    const CertificateForm form = forms[accepted % 3];
    const int k = dim(rng), q = dim(rng);
    const QmiForm n = random_n(rng, k, q);
    const Matrix r = random_sym(rng, k + q, -0.4, 1.0);
    Matrix mm = ua(rng) * n.mat().matrix() + r;
    if (form == CertificateForm::Strict) {
      // M22 <= 0 as required by the strict theorem
      mm.bottomRightCorner(q, q) = -random_sym(rng, q, 0.0, 1.0);
    }
    const QmiForm m(SymMatrix(mm), k);
    const Theorem th = form == CertificateForm::Nonstrict ? Theorem::Nonstrict
                       : form == CertificateForm::Strict  ? Theorem::Strict
                                                          : Theorem::Structured;
    if (!check_theorem_preconditions(m, n, th).all_hold()) {
      ++rejected;
      continue;
    }
    const LineSearchResult g = maximize_multiplier_gap(m, n);
    double level = g.value / g.scale;
    std::optional<MultiplierCertificate> cert;
    if (form == CertificateForm::Structured) {
      cert = find_multiplier_structured(m, n, k);
      if (cert && cert->beta) level = std::max(level, *cert->beta / g.scale);
    } else {
      cert = find_multiplier(m, n, form);
    }
    if (std::abs(level) < kDegenerate) {
      ++rejected;
      continue;
    }
    ++accepted;
    const Strictness st = form == CertificateForm::Nonstrict
                              ? Strictness::Nonstrict
                              : Strictness::Strict;
    const FalsifyResult f =
        falsify_implication(m, n, 10000, derive_seed(99, 4, accepted), st);
    if (cert) {
      ++certified;
      if (f.counterexample) ++soundness;
    } else {
      ++refuted;
      if (!f.counterexample) ++missed;
    }
  }
  Outcome o;
  const double found = refuted ? 1.0 - 1.0 * missed / refuted : 1.0;
  o.pass = soundness == 0 && found >= 0.99;
  std::ostringstream s;
  s << accepted << " instances (" << rejected << " rejected), " << certified
    << " certified / " << soundness << " violations, " << refuted
    << " uncertified / " << fmt("%.1f%%", 100.0 * found) << " refuted";
  o.detail = s.str();
  return o;
}

// --------------------------------------------------------------- 5

Outcome criterion5() {
  Rng rng(55);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> ud(0.05, 2.0);
  int agree = 0, margin_ok = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = dim(rng), m = dim(rng);
    const int t = n + m + dim(rng) * 3;
    const SystemPair truth{gaussian_matrix(rng, n, n) * 0.5,
                           gaussian_matrix(rng, n, m)};
    const double level = ud(rng);
    NoiseModel model = from_sample_norm_bound(level, n, t);
    switch (kind(rng)) {
      case 0: break;
      case 1:
        model = from_energy_bound(SymMatrix(random_sym(rng, n, 0.1, 2.0)), t);
        break;
      case 2:
        model = from_sample_covariance(SymMatrix(random_sym(rng, n, 0.1, 2.0)),
                                       t, 1e-3);
        break;
    }
    const Matrix w = uniform_ball_columns(rng, n, t, level);
    const DataSet ds = simulate(truth, gaussian_matrix(rng, n, 1).col(0),
                                gaussian_matrix(rng, m, t), w);
    const DataMatrices d = partition(ds);
    const QmiForm qf = build_n(d, model);
    const SystemPair s{truth.a + ud(rng) * 0.2 * gaussian_matrix(rng, n, n),
                       truth.b + ud(rng) * 0.2 * gaussian_matrix(rng, n, m)};
    const Membership mem = membership(s, qf);
    const Matrix wr = d.x_plus - s.a * d.x_minus - s.b * d.u_minus;
    const NoiseCheck nc = check_noise(model, wr);
    agree += mem.member == nc.admissible;
    const SymMatrix v = qmi_eval(qf, stack_z(s));
    const double scale = std::max(1.0, v.matrix().cwiseAbs().maxCoeff());
    const double diff = std::abs(mem.margin - nc.margin) / scale;
    worst = std::max(worst, diff);
    margin_ok += diff <= kLemma1;
  }
  Outcome o;
  o.pass = agree == 1000 && margin_ok == 1000;
  std::ostringstream s;
  s << "booleans agree " << agree << "/1000, margins " << margin_ok
    << "/1000 (worst " << worst << ")";
  o.detail = s.str();
  return o;
}

// --------------------------------------------------------------- 6

Outcome criterion6() {
  int ok = 0;
  std::vector<std::string> bad;
  std::vector<int> passed(g_produced.size(), 0);
  parallel_for(static_cast<int>(g_produced.size()), [&](int i) {
    const Produced& p = g_produced[i];
    const RobustReport r = robust_verify(p.ctrl, p.set, p.n, nullptr,
                                         PerformanceKind::None, kVerifySamples,
                                         derive_seed(6, 0, i));
    passed[i] = r.pass_lyapunov == kVerifySamples &&
                r.pass_spectral == kVerifySamples;
  });
  for (std::size_t i = 0; i < g_produced.size(); ++i) {
    if (passed[i]) {
      ++ok;
    } else if (bad.size() < 5) {
      bad.push_back(g_produced[i].origin);
    }
  }
  Outcome o;
  o.pass = !g_produced.empty() && ok == static_cast<int>(g_produced.size());
  std::ostringstream s;
  s << ok << "/" << g_produced.size() << " controllers pass " << kVerifySamples
    << " samples";
  for (const auto& b : bad) s << " [" << b << "]";
  o.detail = s.str();
  return o;
}

// --------------------------------------------------------------- 7

Outcome criterion7() {
  Rng rng(77);
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_real_distribution<double> rad(0.1, 0.95);
  int h2_ok = 0, hinf_ok = 0;
  double h2_worst = 0.0, hinf_worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = dim(rng), p = dim(rng);
    Matrix a = gaussian_matrix(rng, n, n);
    const double rho = spectral_radius(a);
    if (rho > 0.0) a *= rad(rng) / rho;
    const ClosedLoop cl{a, gaussian_matrix(rng, p, n)};
    const double g = h2_norm(cl);
    const double e = std::abs(h2_norm_sdp(cl) - g) / g;
    h2_worst = std::max(h2_worst, e);
    h2_ok += e <= kH2Rel;
  }
  for (int rep = 0; rep < 100; ++rep) {
    const int n = dim(rng), p = dim(rng);
    Matrix a = gaussian_matrix(rng, n, n);
    const double rho = spectral_radius(a);
    if (rho > 0.0) a *= rad(rng) / rho;
    const ClosedLoop cl{a, gaussian_matrix(rng, p, n)};
    try {
      const double h = hinf_norm(cl);
      const double grid = hinf_norm_grid(cl);
      const double e = std::abs(h - grid) / grid;
      hinf_worst = std::max(hinf_worst, e);
      hinf_ok += e <= kHinfRel;
    } catch (const std::exception&) {
    }
  }
  int analytic = 0;
  const double cases[][2] = {{0.5, 2.0}, {0.9, -1.0}, {0.1, 0.3}, {0.99, 1.0}};
  for (const auto& c : cases) {
    const ClosedLoop cl{Matrix::Constant(1, 1, c[0]), Matrix::Constant(1, 1, c[1])};
    const double h2 = c[1] * c[1] / (1.0 - c[0] * c[0]);
    const double hi = std::abs(c[1]) / (1.0 - c[0]);
    analytic += std::abs(std::pow(h2_norm(cl), 2) - h2) <= kAnalytic * h2 &&
                std::abs(hinf_norm_grid(cl) - hi) <= kAnalytic * hi;
  }
  Outcome o;
  o.pass = h2_ok == 100 && hinf_ok == 100 && analytic == 4;
  std::ostringstream s;
  s << "h2 " << h2_ok << "/100 (worst " << h2_worst << "), hinf " << hinf_ok
    << "/100 (worst " << hinf_worst << "), analytic " << analytic << "/4";
  o.detail = s.str();
  return o;
}

// --------------------------------------------------------------- 8

Outcome criterion8() {
  int optimal = 0, optimal_ok = 0, infeasible = 0, infeasible_ok = 0, other = 0;
  const auto tally = [&](const SdpProblem& p) {
    const SolveResult r = solve(p);
    if (r.report.status == SolveStatus::Optimal) {
      ++optimal;
      optimal_ok += verify_assignment(p, r.x).feasible;
    } else if (r.report.status == SolveStatus::Infeasible) {
      ++infeasible;
      infeasible_ok +=
          certificate_residual(p, r.report.certificate) <= kCertificateTol;
    } else {
      ++other;
    }
    return r.report.status;
  };
  // the comparison stabilization instance, timed
  const auto fx = fixtures::comparison();
  const SynthProblem fs =
      build_fs_problem(build_n(partition(fx.data), fx.model), 1, 1, std::nullopt);
  const auto t0 = Clock::now();
  const bool fs_optimal = tally(fs.sdp) == SolveStatus::Optimal;
  const double fs_sec = since(t0);

  // Lyapunov problems: feasible for stable a, infeasible for unstable a
  Rng rng(88);
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_real_distribution<double> stable(0.1, 0.95), unstable(1.1, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = dim(rng);
    Matrix a = gaussian_matrix(rng, n, n);
    a *= (rep % 2 ? unstable(rng) : stable(rng)) / spectral_radius(a);
    SdpProblem p;
    const int pid = p.add_symmetric("P", n);
    const AffineMatrix pv = p.var(pid);
    const Matrix eye = Matrix::Identity(n, n);
    p.add_psd(pv - eye);
    const Matrix at = a.transpose();
    p.add_psd(pv - at * pv * a - eye);
    p.minimize(pv.trace().entry(0, 0));
    tally(p);
  }
  // synthesis problems on sweep data
  const SystemPair sys = fixtures::sweep_system();
  for (int rep = 0; rep < 20; ++rep) {
    const DataSet ds = simulate(sys, gaussian_matrix(rng, 3, 1).col(0),
                                gaussian_matrix(rng, 2, 20),
                                uniform_ball_columns(rng, 3, 20, 0.05 + 0.1 * rep));
    const DataMatrices d = partition(ds);
    const DataQmi q =
        build_data_qmi(d, from_sample_norm_bound(0.05 + 0.1 * rep, 3, 20));
    tally(build_fs_problem(q.n, 3, 2, q.ellipsoid).sdp);
  }
  Outcome o;
  o.pass = fs_optimal && fs_sec < 1.0 && optimal_ok == optimal &&
           infeasible_ok == infeasible && optimal > 0 && infeasible > 0;
  std::ostringstream s;
  s << "optimal " << optimal_ok << "/" << optimal << " verified, infeasible "
    << infeasible_ok << "/" << infeasible << " certified, " << other
    << " other, FS "
    << fmt("%.3f s", fs_sec);
  o.detail = s.str();
  return o;
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known_red, only;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--known-red") known_red = parse_list(argv[i + 1]);
    if (flag == "--only") only = parse_list(argv[i + 1]);
  }
  const std::vector<std::function<Outcome()>> checks = {
      criterion1, criterion2, criterion3, criterion4,
      criterion5, criterion6, criterion7, criterion8};
  std::set<int> red;
  for (int c = 1; c <= 8; ++c) {
    if (!only.empty() && !only.count(c)) {
      // criterion 6 needs the controllers of 1-3
      if (c <= 3 && only.count(6)) checks[c - 1]();
      continue;
    }
    const Outcome o = checks[c - 1]();
    if (!o.pass) red.insert(c);
    std::printf("criterion %d: %s  %s\n", c, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  for (int c : known_red) {
    if (!only.empty() && !only.count(c)) continue;
    if (!red.count(c)) std::printf("criterion %d passes but is listed as known red\n", c);
  }
  std::set<int> expected;
  for (int c : known_red) {
    if (only.empty() || only.count(c)) expected.insert(c);
  }
  return red == expected ? 0 : 1;
}
