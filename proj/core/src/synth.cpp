#include "nsynth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nsynth {

void PerformanceSpec::validate(int n, int m) const {
  if (c.rows() < 1 || c.cols() != n || d.rows() != c.rows() ||
      d.cols() != m) {
    throw std::invalid_argument("PerformanceSpec: C must be p x n, D p x m");
  }
  if (!all_finite(c) || !all_finite(d)) {
    throw std::invalid_argument("PerformanceSpec: non-finite entries");
  }
  if (gamma && !(*gamma > 0.0 && std::isfinite(*gamma))) {
    throw std::invalid_argument("PerformanceSpec: gamma must be positive");
  }
}

const SymMatrix& Controller::lyapunov() const {
  if (p) return *p;
  if (y) return *y;
  throw std::logic_error("Controller: no certificate");
}

Matrix Controller::l() const { return k * lyapunov().matrix(); }

bool Controller::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Success:
      return "success";
    case Verdict::NotInformative:
      return "not-informative";
    case Verdict::Indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

namespace {

AffineMatrix zero(int r, int c) { return AffineMatrix::Zero(r, c); }

AffineMatrix scaled_identity(const LinExpr& e, int dim) {
  return AffineMatrix::Scaled(e, Matrix::Identity(dim, dim));
}

AffineMatrix constant_identity(double s, int dim) {
  return AffineMatrix(Matrix(s * Matrix::Identity(dim, dim)));
}

void check_form(const QmiForm& f, int n, int m) {
  if (f.k() != n || f.q() != n + m) {
    throw std::invalid_argument("synthesis: QMI form has wrong dimensions");
  }
}

// [T'^T Mtop T' - sum a_i N_i, T'^T Bcol; ., Dblk] with T' the optional
// congruence on the first k+q rows. The N_i are given already transformed.
AffineMatrix assemble(const AffineMatrix& mtop, const AffineMatrix& bcol,
                      const AffineMatrix& dblk,
                      const std::vector<std::pair<LinExpr, Matrix>>& n_terms,
                      const std::optional<Matrix>& t) {
  AffineMatrix top = t ? t->transpose() * mtop * *t : mtop;
  for (const auto& [a, nm] : n_terms) top = top - AffineMatrix::Scaled(a, nm);
  const AffineMatrix side = t ? t->transpose() * bcol : bcol;
  return AffineMatrix::Blocks({{top, side}, {side.transpose(), dblk}});
}

Matrix transformed_n(const QmiForm& n_form,
                     const std::optional<Ellipsoid>& e) {
  return e ? e->reduced_form().matrix() : n_form.mat().matrix();
}

std::optional<Matrix> congruence_of(const std::optional<Ellipsoid>& e) {
  if (!e) return std::nullopt;
  return e->congruence();
}

// Stabilization LMI without the data term: rows n | n | m, bordered by the P block.
struct FsParts {
  AffineMatrix mtop, bcol, dblk;
};

FsParts fs_parts(const SdpProblem& sdp, int pid, int lid, int bid, int n,
                 int m) {
  const AffineMatrix p = sdp.var(pid);
  const AffineMatrix l = sdp.var(lid);
  const AffineMatrix pb = p - scaled_identity(sdp.scalar(bid), n);
  FsParts f;
  f.mtop = AffineMatrix::Blocks({{pb, zero(n, n), zero(n, m)},
                                 {zero(n, n), -p, -l.transpose()},
                                 {zero(m, n), -l, zero(m, m)}});
  f.bcol = AffineMatrix::Blocks({{zero(n, n)}, {zero(n, n)}, {l}});
  f.dblk = p;
  return f;
}

void add_stab_bounds(SynthProblem& sp, const SynthSettings& st) {
  const int n = sp.n;
  const AffineMatrix p = sp.sdp.var(sp.p);
  sp.sdp.add_psd(p - constant_identity(st.eps_strict, n), "P>0");
  sp.sdp.add_psd(constant_identity(st.p_cap, n) - p, "P<=cap");
  sp.sdp.add_psd(sp.sdp.var(sp.beta) - constant_identity(st.beta_min, 1),
                 "beta>0");
}

}  // namespace

SynthProblem build_fs_problem(const QmiForm& n_form, int n, int m,
                              const std::optional<Ellipsoid>& ellipsoid,
                              const SynthSettings& settings) {
  check_form(n_form, n, m);
  SynthProblem sp;
  sp.n = n;
  sp.m = m;
  sp.p = sp.sdp.add_symmetric("P", n);
  sp.l = sp.sdp.add_full("L", m, n);
  sp.alpha = sp.sdp.add_scalar("alpha");
  sp.beta = sp.sdp.add_scalar("beta");
  const FsParts f = fs_parts(sp.sdp, sp.p, sp.l, sp.beta, n, m);
  sp.sdp.add_psd(assemble(f.mtop, f.bcol, f.dblk,
                          {{sp.sdp.scalar(sp.alpha),
                            transformed_n(n_form, ellipsoid)}},
                          congruence_of(ellipsoid)),
                 "FS");
  add_stab_bounds(sp, settings);
  sp.sdp.add_psd(sp.sdp.var(sp.alpha), "alpha>=0");
  sp.sdp.maximize(sp.sdp.scalar(sp.beta));
  return sp;
}

SynthProblem build_h2_problem(const QmiForm& n_form, int n, int m,
                              const PerformanceSpec& spec,
                              const std::optional<Matrix>& e_subspace,
                              const std::optional<Ellipsoid>& ellipsoid,
                              const SynthSettings& settings) {
  check_form(n_form, n, m);
  spec.validate(n, m);
  const int p = spec.p();
  const Matrix e = e_subspace.value_or(Matrix::Identity(n, n));
  if (e.rows() != n || e.cols() < 1) {
    throw std::invalid_argument("synth_h2: E must have n rows");
  }
  const int r = static_cast<int>(e.cols());
  SynthProblem sp;
  sp.n = n;
  sp.m = m;
  sp.p = sp.sdp.add_symmetric("Y", n);
  sp.l = sp.sdp.add_full("L", m, n);
  sp.alpha = sp.sdp.add_scalar("alpha");
  sp.beta = sp.sdp.add_scalar("beta");
  sp.z = sp.sdp.add_symmetric("Z", r);
  SdpProblem& sdp = sp.sdp;
  const AffineMatrix y = sdp.var(sp.p);
  const AffineMatrix l = sdp.var(sp.l);
  const AffineMatrix z = sdp.var(sp.z);
  const AffineMatrix cyl = spec.c * y + spec.d * l;
  const AffineMatrix mtop = AffineMatrix::Blocks(
      {{y - scaled_identity(sdp.scalar(sp.beta), n), zero(n, n), zero(n, m)},
       {zero(n, n), zero(n, n), zero(n, m)},
       {zero(m, n), zero(m, n), zero(m, m)}});
  const AffineMatrix bcol = AffineMatrix::Blocks(
      {{zero(n, n), zero(n, p)}, {y, zero(n, p)}, {l, zero(m, p)}});
  const AffineMatrix out_blk = AffineMatrix::Blocks(
      {{y, cyl.transpose()}, {cyl, constant_identity(1.0, p)}});
  sdp.add_psd(assemble(mtop, bcol, out_blk,
                       {{sdp.scalar(sp.alpha),
                         transformed_n(n_form, ellipsoid)}},
                       congruence_of(ellipsoid)),
              "H2");
  sdp.add_psd(out_blk - constant_identity(settings.eps_strict, n + p),
              "output");
  sdp.add_psd(AffineMatrix::Blocks({{z, AffineMatrix(Matrix(e.transpose()))},
                                    {AffineMatrix(e), y}}),
              "coupling");
  sdp.add_psd(y - constant_identity(settings.eps_strict, n), "Y>0");
  sdp.add_psd(constant_identity(settings.y_cap, n) - y, "Y<=cap");
  sdp.add_psd(sdp.var(sp.alpha), "alpha>=0");
  sdp.add_psd(sdp.var(sp.beta) - constant_identity(settings.beta_min, 1),
              "beta>0");
  if (spec.gamma) {
    const double g2 = *spec.gamma * *spec.gamma;
    sdp.add_psd(constant_identity(g2 * (1.0 - 1e-9), 1) - z.trace(),
                "trace");
  }
  sdp.minimize(z.trace().entry(0, 0));
  return sp;
}

SynthProblem build_hinf_problem(const QmiForm& n_form, int n, int m,
                                const PerformanceSpec& spec,
                                const std::optional<Ellipsoid>& ellipsoid,
                                const SynthSettings& settings) {
  check_form(n_form, n, m);
  spec.validate(n, m);
  const int p = spec.p();
  SynthProblem sp;
  sp.n = n;
  sp.m = m;
  sp.p = sp.sdp.add_symmetric("Y", n);
  sp.l = sp.sdp.add_full("L", m, n);
  sp.alpha = sp.sdp.add_scalar("alpha");
  sp.beta = sp.sdp.add_scalar("beta");
  SdpProblem& sdp = sp.sdp;
  LinExpr mu_e;
  if (spec.gamma) {
    mu_e = LinExpr(1.0 / (*spec.gamma * *spec.gamma));
  } else {
    sp.mu = sdp.add_scalar("mu");
    mu_e = sdp.scalar(sp.mu);
  }
  const AffineMatrix y = sdp.var(sp.p);
  const AffineMatrix l = sdp.var(sp.l);
  const AffineMatrix cyl = spec.c * y + spec.d * l;
  const AffineMatrix ymu = y - scaled_identity(mu_e, n);
  const AffineMatrix yb = y - scaled_identity(sdp.scalar(sp.beta), n);
  AffineMatrix mtop, bcol, dblk;
  if (settings.hinf_form == HinfForm::Printed) {
    mtop = AffineMatrix::Blocks({{yb, zero(n, n), zero(n, m)},
                                 {zero(n, n), zero(n, n), zero(n, m)},
                                 {zero(m, n), zero(m, n), zero(m, m)}});
    bcol = AffineMatrix::Blocks({{zero(n, n), cyl.transpose()},
                                 {y, zero(n, p)},
                                 {l, zero(m, p)}});
    dblk = AffineMatrix::Blocks({{ymu, zero(n, p)},
                                 {zero(p, n), constant_identity(1.0, p)}});
  } else {
    mtop = AffineMatrix::Blocks(
        {{yb - scaled_identity(mu_e, n), zero(n, n), zero(n, m)},
         {zero(n, n), zero(n, n), zero(n, m)},
         {zero(m, n), zero(m, n), zero(m, m)}});
    bcol = AffineMatrix::Blocks(
        {{zero(n, n), zero(n, p)}, {y, zero(n, p)}, {l, zero(m, p)}});
    dblk = AffineMatrix::Blocks(
        {{y, cyl.transpose()}, {cyl, constant_identity(1.0, p)}});
    sdp.add_psd(dblk - constant_identity(settings.eps_strict, n + p),
                "output");
  }
  sdp.add_psd(assemble(mtop, bcol, dblk,
                       {{sdp.scalar(sp.alpha),
                         transformed_n(n_form, ellipsoid)}},
                       congruence_of(ellipsoid)),
              "Hinf");
  sdp.add_psd(ymu - constant_identity(settings.eps_strict, n), "Y-mu>0");
  sdp.add_psd(y - constant_identity(settings.eps_strict, n), "Y>0");
  sdp.add_psd(constant_identity(settings.y_cap, n) - y, "Y<=cap");
  sdp.add_psd(sdp.var(sp.alpha), "alpha>=0");
  sdp.add_psd(sdp.var(sp.beta) - constant_identity(settings.beta_min, 1),
              "beta>0");
  if (spec.gamma) {
    sdp.add_psd(constant_identity(1.0, 1) - sdp.var(sp.beta), "beta<=1");
    sdp.maximize(sdp.scalar(sp.beta));
  } else {
    sdp.add_psd(sdp.var(sp.mu), "mu>=0");
    sdp.maximize(sdp.scalar(sp.mu));
  }
  return sp;
}

std::vector<QmiForm> sample_forms(const DataMatrices& d, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("sample_forms: eps <= 0");
  const int n = d.n(), m = d.m();
  std::vector<QmiForm> out;
  Matrix phi = Matrix::Zero(n + 1, n + 1);
  phi.topLeftCorner(n, n) = eps * Matrix::Identity(n, n);
  phi(n, n) = -1.0;
  for (int t = 0; t < d.samples(); ++t) {
    Matrix r = Matrix::Zero(2 * n + m, n + 1);
    r.topLeftCorner(n, n).setIdentity();
    r.block(0, n, n, 1) = d.x_plus.col(t);
    r.block(n, n, n, 1) = -d.x_minus.col(t);
    r.block(2 * n, n, m, 1) = -d.u_minus.col(t);
    out.emplace_back(SymMatrix(r * phi * r.transpose()), n);
  }
  return out;
}

SynthProblem build_multi_problem(const std::vector<QmiForm>& forms, int n,
                                 int m,
                                 const std::optional<Ellipsoid>& ellipsoid,
                                 const SynthSettings& settings) {
  if (forms.empty()) {
    throw std::invalid_argument("synth_stab_multi: no samples");
  }
  SynthProblem sp;
  sp.n = n;
  sp.m = m;
  sp.p = sp.sdp.add_symmetric("P", n);
  sp.l = sp.sdp.add_full("L", m, n);
  sp.beta = sp.sdp.add_scalar("beta");
  const std::optional<Matrix> t = congruence_of(ellipsoid);
  std::vector<std::pair<LinExpr, Matrix>> terms;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    check_form(forms[i], n, m);
    const int a = sp.sdp.add_scalar("alpha" + std::to_string(i));
    sp.alphas.push_back(a);
    const Matrix& nm = forms[i].mat().matrix();
    terms.emplace_back(sp.sdp.scalar(a),
                       t ? Matrix(t->transpose() * nm * *t) : nm);
    sp.sdp.add_psd(sp.sdp.var(a), "alpha>=0");
  }
  const FsParts f = fs_parts(sp.sdp, sp.p, sp.l, sp.beta, n, m);
  sp.sdp.add_psd(assemble(f.mtop, f.bcol, f.dblk, terms, t), "FS-multi");
  add_stab_bounds(sp, settings);
  sp.sdp.maximize(sp.sdp.scalar(sp.beta));
  return sp;
}

namespace {

enum class Kind { Stab, H2, Hinf, Multi };

Controller extract(const SynthProblem& sp, const Vector& x, Kind kind,
                   std::vector<std::string>* flags) {
  Controller c;
  const SymMatrix cert(sp.sdp.value(sp.p, x));
  const Matrix l = sp.sdp.value(sp.l, x);
  // K = L X^{-1} through X^T K^T = L^T
  c.k = cert.matrix().transpose().ldlt().solve(l.transpose()).transpose();
  if (kind == Kind::Stab || kind == Kind::Multi) {
    c.p = cert;
  } else {
    c.y = cert;
  }
  if (sp.alpha >= 0) c.alpha = x(sp.sdp.variables()[sp.alpha].offset);
  c.beta = x(sp.sdp.variables()[sp.beta].offset);
  for (int a : sp.alphas) c.alphas.push_back(x(sp.sdp.variables()[a].offset));
  if (sp.z >= 0) {
    c.z = SymMatrix(sp.sdp.value(sp.z, x));
    c.gamma_achieved = std::sqrt(c.z->matrix().trace() * (1.0 + 1e-9));
  }
  if (sp.mu >= 0) {
    const double mu = x(sp.sdp.variables()[sp.mu].offset);
    c.mu = mu;
    if (mu > 0.0) {
      c.gamma_achieved = 1.0 / std::sqrt(mu * (1.0 - 1e-9));
    } else {
      flags->push_back("unbounded-gain");
    }
  }
  return c;
}

SynthResult run(const SynthProblem& sp, const SlaterResult& slater, Kind kind,
                const SynthSettings& st) {
  SynthResult out;
  out.slater = slater;
  const SolveResult sol = solve(sp.sdp, st.solver);
  out.report = sol.report;
  const bool conservative = kind == Kind::Multi;
  const auto not_informative = [&] {
    if (conservative) {
      out.verdict = Verdict::Indeterminate;
      out.flags.push_back("conservative");
      return;
    }
    out.verdict = Verdict::NotInformative;
    if (!slater.satisfied) out.flags.push_back("slater-unverified");
  };
  Vector x = sol.x;
  switch (sol.report.status) {
    case SolveStatus::Optimal:
      break;
    case SolveStatus::Infeasible:
      not_informative();
      return out;
    case SolveStatus::Inaccurate:
    case SolveStatus::IterationLimit:
      if (verify_assignment(sp.sdp, sol.x, st.solver.feas_tol).feasible) {
        out.flags.push_back("inaccurate-solve");
        break;
      }
      [[fallthrough]];
    case SolveStatus::Unbounded: {
      const StrictFeasibility f = strict_feasibility(sp.sdp, 1e-8, st.solver);
      if (f.report.status == SolveStatus::Optimal ||
          f.report.status == SolveStatus::Inaccurate) {
        out.strict_margin = f.margin;
      }
      if (f.verdict == Feasibility::Infeasible) {
        not_informative();
        return out;
      }
      if (f.verdict != Feasibility::Feasible) {
        out.verdict = Verdict::Indeterminate;
        if (out.strict_margin) out.flags.push_back("marginal");
        return out;
      }
      out.flags.push_back("suboptimal");
      x = f.x;
      break;
    }
  }
  Controller c = extract(sp, x, kind, &out.flags);
  c.slater = slater.satisfied;
  if (!slater.satisfied) out.flags.push_back("sufficient-only");
  if (conservative) out.flags.push_back("conservative");
  c.flags = out.flags;
  out.controller = std::move(c);
  out.verdict = Verdict::Success;
  return out;
}

std::optional<Ellipsoid> maybe(const DataQmi& q, const SynthSettings& st) {
  return st.precondition ? q.ellipsoid : std::nullopt;
}

}  // namespace

SynthResult synth_stab(const DataMatrices& d, const NoiseModel& model,
                       const SynthSettings& settings) {
  const DataQmi q = build_data_qmi(d, model);
  const SlaterResult slater = slater_check(q, d.n());
  const SynthProblem sp =
      build_fs_problem(q.n, d.n(), d.m(), maybe(q, settings), settings);
  return run(sp, slater, Kind::Stab, settings);
}

SynthResult synth_h2(const DataMatrices& d, const NoiseModel& model,
                     const PerformanceSpec& spec,
                     const std::optional<Matrix>& e_subspace,
                     const SynthSettings& settings) {
  const DataQmi q = build_data_qmi(d, model);
  const SlaterResult slater = slater_check(q, d.n());
  const SynthProblem sp = build_h2_problem(q.n, d.n(), d.m(), spec, e_subspace,
                                           maybe(q, settings), settings);
  SynthResult r = run(sp, slater, Kind::H2, settings);
  if (r.controller && spec.gamma) r.controller->gamma_achieved = *spec.gamma;
  return r;
}

SynthResult synth_hinf(const DataMatrices& d, const NoiseModel& model,
                       const PerformanceSpec& spec,
                       const SynthSettings& settings) {
  const DataQmi q = build_data_qmi(d, model);
  const SlaterResult slater = slater_check(q, d.n());
  const SynthProblem sp = build_hinf_problem(q.n, d.n(), d.m(), spec,
                                             maybe(q, settings), settings);
  SynthResult r = run(sp, slater, Kind::Hinf, settings);
  if (r.controller && spec.gamma) r.controller->gamma_achieved = *spec.gamma;
  return r;
}

SynthResult synth_stab_multi(const DataMatrices& d, double eps,
                             const SynthSettings& settings) {
  const NoiseModel agg = from_sample_norm_bound(eps, d.n(), d.samples());
  const DataQmi q = build_data_qmi(d, agg);
  const SlaterResult slater = slater_check(q, d.n());
  const SynthProblem sp = build_multi_problem(sample_forms(d, eps), d.n(),
                                              d.m(), maybe(q, settings),
                                              settings);
  return run(sp, slater, Kind::Multi, settings);
}

Vector controller_assignment(const SynthProblem& sp, const Controller& c) {
  Vector x = Vector::Zero(sp.sdp.num_scalars());
  const auto scalar = [&](int id, double v) {
    if (id >= 0) sp.sdp.assign(id, Matrix::Constant(1, 1, v), &x);
  };
  sp.sdp.assign(sp.p, c.lyapunov().matrix(), &x);
  sp.sdp.assign(sp.l, c.l(), &x);
  scalar(sp.alpha, c.alpha);
  scalar(sp.beta, c.beta);
  if (sp.z >= 0 && c.z) sp.sdp.assign(sp.z, c.z->matrix(), &x);
  if (sp.mu >= 0 && c.mu) scalar(sp.mu, *c.mu);
  for (std::size_t i = 0; i < sp.alphas.size() && i < c.alphas.size(); ++i) {
    scalar(sp.alphas[i], c.alphas[i]);
  }
  return x;
}

bool check_image_inclusion(const Matrix& k, const Matrix& x_minus,
                           const Matrix& u_minus, double tol) {
  const int n = static_cast<int>(x_minus.rows());
  const int m = static_cast<int>(u_minus.rows());
  if (k.rows() != m || k.cols() != n || x_minus.cols() != u_minus.cols()) {
    throw std::invalid_argument("check_image_inclusion: dimension mismatch");
  }
  Matrix d(n + m, x_minus.cols());
  d << x_minus, u_minus;
  Matrix g(n + m, n);
  g << Matrix::Identity(n, n), k;
  if (d.cols() == 0) return false;
  const Matrix theta = d.completeOrthogonalDecomposition().solve(g);
  const Matrix res = d * theta - g;
  for (int j = 0; j < n; ++j) {
    if (res.col(j).norm() > tol * std::max(1.0, g.col(j).norm())) return false;
  }
  return true;
}

}  // namespace nsynth
