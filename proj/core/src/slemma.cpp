#include "nsynth/slemma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsynth/data.hpp"
#include "nsynth/sigma.hpp"

namespace nsynth {

namespace {

void check_pair(const QmiForm& m, const QmiForm& n) {
  if (m.mat().dim() != n.mat().dim() || m.k() != n.k()) {
    throw std::invalid_argument("M and N must share dimension and partition");
  }
}

}  // namespace

double multiplier_gap(const QmiForm& m, const QmiForm& n, double alpha) {
  return min_eig(SymMatrix(m.mat().matrix() - alpha * n.mat().matrix()));
}

LineSearchResult maximize_multiplier_gap(const QmiForm& m, const QmiForm& n) {
  check_pair(m, n);
  auto g = [&](double a) { return multiplier_gap(m, n, a); };
  double prev = 0.0, cur = 1.0;
  double g_prev = g(prev), g_cur = g(cur);
  double lo = 0.0, hi = 1.0;
  if (g_cur > g_prev) {
    const double cap = 1e12;
    while (true) {
      const double next = 2.0 * cur;
      const double g_next = g(next);
      if (g_next <= g_cur || next >= cap) {
        lo = prev;
        hi = next;
        break;
      }
      prev = cur;
      cur = next;
      g_cur = g_next;
    }
  }
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double gc = g(c), gd = g(d);
  while (b - a > 1e-12 * std::max(1.0, b)) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + phi * (b - a);
      gd = g(d);
    }
  }
  LineSearchResult r;
  r.alpha = gc >= gd ? c : d;
  r.value = std::max(gc, gd);
  const double g0 = g(0.0);
  if (g0 >= r.value) {
    r.alpha = 0.0;
    r.value = g0;
  }
  r.scale = spectral_scale(
      SymMatrix(m.mat().matrix() - r.alpha * n.mat().matrix()));
  return r;
}

std::optional<MultiplierCertificate> find_multiplier(const QmiForm& m,
                                                     const QmiForm& n,
                                                     CertificateForm form,
                                                     const Tolerance& tol) {
  if (form == CertificateForm::Structured) {
    throw std::invalid_argument("use find_multiplier_structured");
  }
  const LineSearchResult r = maximize_multiplier_gap(m, n);
  const bool ok = form == CertificateForm::Nonstrict
                      ? r.value >= -tol.eig_zero * r.scale
                      : r.value > tol.strict_margin * r.scale;
  if (!ok) return std::nullopt;
  MultiplierCertificate cert;
  cert.alpha = r.alpha;
  cert.margin = r.value;
  cert.form = form;
  return cert;
}

std::optional<MultiplierCertificate> find_multiplier_structured(
    const QmiForm& m, const QmiForm& n, int k,
    const StructuredSettings& settings, const Tolerance& tol) {
  check_pair(m, n);
  if (k != m.k()) throw std::invalid_argument("k must match the partition");
  const int dim = m.mat().dim();
  SdpProblem p;
  const int ia = p.add_scalar("alpha");
  const int ib = p.add_scalar("beta");
  Matrix ek = Matrix::Zero(dim, dim);
  ek.topLeftCorner(k, k).setIdentity();
  const AffineMatrix lmi =
      AffineMatrix(m.mat().matrix()) -
      AffineMatrix::Scaled(p.scalar(ia), n.mat().matrix()) -
      AffineMatrix::Scaled(p.scalar(ib), ek);
  p.add_psd(lmi, "multiplier");
  p.add_psd(p.var(ia), "alpha>=0");
  p.add_psd(AffineMatrix(Matrix::Constant(1, 1, settings.alpha_cap)) -
                p.var(ia),
            "alpha<=cap");
  p.add_psd(AffineMatrix(Matrix::Constant(1, 1, settings.beta_cap)) -
                p.var(ib),
            "beta<=cap");
  p.maximize(p.scalar(ib));
  const SolveResult res = solve(p, settings.solver);
  if (res.report.status == SolveStatus::Infeasible) return std::nullopt;
  if (res.report.status != SolveStatus::Optimal &&
      res.report.status != SolveStatus::Inaccurate) {
    throw std::runtime_error("structured multiplier search: solver " +
                             to_string(res.report.status));
  }
  // The optimum sits on the boundary of the LMI; recover a beta that keeps
  // M - alpha N - beta E exactly PSD by bisection at fixed alpha.
  const auto largest_beta = [&](double alpha, double hint) {
    if (!std::isfinite(alpha)) return -std::numeric_limits<double>::infinity();
    if (!std::isfinite(hint)) hint = 0.0;
    const Matrix r = m.mat().matrix() - alpha * n.mat().matrix();
    const auto ok = [&](double b) { return min_eig(SymMatrix(r - b * ek)) >= 0.0; };
    double lo = std::min(0.0, hint), hi = std::max(hint, 0.0) + 1.0;
    if (!ok(lo)) return -std::numeric_limits<double>::infinity();
    while (ok(hi) && hi < settings.beta_cap) hi *= 2.0;
    for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
    return std::min(lo, settings.beta_cap);
  };
  // beta*(alpha) is concave; search between the solver's alpha and the
  // maximizer of the plain gap
  const double a_sdp = std::max(0.0, res.x(p.variables()[ia].offset));
  const double b_sdp = res.x(p.variables()[ib].offset);
  const LineSearchResult gap = maximize_multiplier_gap(m, n);
  const double pad = 1e-4 * (1.0 + std::max(a_sdp, gap.alpha));
  double lo = std::max(0.0, std::min(a_sdp, gap.alpha) - pad);
  double hi = std::max(a_sdp, gap.alpha) + pad;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = largest_beta(x1, b_sdp), f2 = largest_beta(x2, b_sdp);
  for (int it = 0; it < 80 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = largest_beta(x2, b_sdp);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = largest_beta(x1, b_sdp);
    }
  }
  double alpha = f1 >= f2 ? x1 : x2;
  double beta = std::max(f1, f2);
  for (const double a : {a_sdp, gap.alpha}) {
    const double b = largest_beta(a, b_sdp);
    if (b > beta) {
      alpha = a;
      beta = b;
    }
  }
  if (!std::isfinite(beta)) return std::nullopt;
  const SymMatrix cert_mat(m.mat().matrix() - alpha * n.mat().matrix() -
                           beta * ek);
  const double margin = min_eig(cert_mat);
  const double scale = spectral_scale(
      SymMatrix(m.mat().matrix() - alpha * n.mat().matrix()));
  if (!(beta > tol.strict_margin * scale) ||
      margin < -tol.psd_margin * scale) {
    return std::nullopt;
  }
  MultiplierCertificate cert;
  cert.alpha = alpha;
  cert.beta = beta;
  cert.margin = margin;
  cert.form = CertificateForm::Structured;
  return cert;
}

std::string to_string(Tri t) {
  switch (t) {
    case Tri::True:
      return "true";
    case Tri::False:
      return "false";
    case Tri::Unknown:
      return "unknown";
  }
  return "unknown";
}

bool PreconditionReport::all_hold() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const auto& kv) { return kv.second == Tri::True; });
}

namespace {

Tri tri(bool b) { return b ? Tri::True : Tri::False; }

Tri slater_tri(const QmiForm& n, const Tolerance& tol) {
  const SlaterResult s = slater_check(n, n.k(), tol);
  if (s.satisfied) return Tri::True;
  if (s.positive_eigenvalues < n.k()) return Tri::False;
  return Tri::Unknown;
}

}  // namespace

PreconditionReport check_theorem_preconditions(const QmiForm& m,
                                               const QmiForm& n, Theorem th,
                                               const Tolerance& tol) {
  check_pair(m, n);
  PreconditionReport r;
  const SymMatrix n22(n.m22());
  switch (th) {
    case Theorem::Nonstrict:
      r.conditions["slater"] = slater_tri(n, tol);
      r.conditions["bounded_sn"] =
          definiteness(n22, Definiteness::ND, tol) ? Tri::True : Tri::Unknown;
      break;
    case Theorem::Strict:
      r.conditions["m22_nsd"] =
          tri(definiteness(SymMatrix(m.m22()), Definiteness::NSD, tol));
      r.conditions["n22_nsd"] = tri(definiteness(n22, Definiteness::NSD, tol));
      r.conditions["kernel_inclusion"] = tri(kernel_inclusion(n, tol));
      r.conditions["slater"] = slater_tri(n, tol);
      break;
    case Theorem::Structured: {
      const auto [lam, v] = sym_eig(n.mat());
      const double sc = std::max(1.0, lam.cwiseAbs().maxCoeff());
      r.conditions["n_nonsingular"] =
          tri(lam.cwiseAbs().minCoeff() > tol.eig_zero * sc);
      r.conditions["n11_psd"] =
          tri(definiteness(SymMatrix(n.m11()), Definiteness::PSD, tol));
      r.conditions["n22_nd"] = tri(definiteness(n22, Definiteness::ND, tol));
      break;
    }
  }
  return r;
}

// ------------------------------------------------------------ falsifier

namespace {

enum class SamplerMode { Ellipsoid, Kernel, Rejection };

// Z = center + left * V * dsqrt + kernel * F, ||V|| <= 1, F free.
struct Sampler {
  SamplerMode mode = SamplerMode::Rejection;
  Matrix center, left, dsqrt, kernel;
  int r = 0;  // rows of V
};

Sampler make_sampler(const QmiForm& n, const Tolerance& tol) {
  Sampler s;
  const int q = n.q(), k = n.k();
  const SymMatrix n22(n.m22());
  if (definiteness(n22, Definiteness::ND, tol)) {
    try {
      const Ellipsoid e = ellipsoid_of(n, tol);
      s.mode = SamplerMode::Ellipsoid;
      s.center = e.center;
      s.left = e.left;
      s.dsqrt = e.delta_sqrt;
      s.kernel = Matrix::Zero(q, 0);
      s.r = q;
      return s;
    } catch (const std::domain_error&) {
      return s;
    }
  }
  if (definiteness(n22, Definiteness::NSD, tol) && kernel_inclusion(n, tol)) {
    const auto [lam, v] = sym_eig(n22);
    const double sc = std::max(1.0, lam.cwiseAbs().maxCoeff());
    std::vector<int> rng_idx, ker_idx;
    for (int i = 0; i < q; ++i) {
      (lam(i) < -tol.eig_zero * sc ? rng_idx : ker_idx).push_back(i);
    }
    const int nr = static_cast<int>(rng_idx.size());
    Matrix ur(q, nr), uk(q, static_cast<Eigen::Index>(ker_idx.size()));
    for (int i = 0; i < nr; ++i) ur.col(i) = v.col(rng_idx[i]);
    for (std::size_t i = 0; i < ker_idx.size(); ++i) {
      uk.col(static_cast<Eigen::Index>(i)) = v.col(ker_idx[i]);
    }
    s.kernel = uk;
    if (nr == 0) {
      // S_N = R^{q x k} if N11 >= 0, else empty
      if (!definiteness(SymMatrix(n.m11()), Definiteness::PSD, tol)) return s;
      s.mode = SamplerMode::Kernel;
      s.center = Matrix::Zero(q, k);
      s.left = Matrix::Zero(q, 0);
      s.dsqrt = Matrix::Zero(k, k);
      s.r = 0;
      return s;
    }
    Matrix red(k + nr, k + nr);
    red << n.m11(), n.m12() * ur, ur.transpose() * n.m12().transpose(),
        ur.transpose() * n.m22() * ur;
    try {
      const Ellipsoid e = ellipsoid_of(QmiForm(SymMatrix(red), k), tol);
      s.mode = SamplerMode::Kernel;
      s.center = ur * e.center;
      s.left = ur * e.left;
      s.dsqrt = e.delta_sqrt;
      s.r = nr;
    } catch (const std::domain_error&) {
    }
    return s;
  }
  return s;
}

double target_value(const QmiForm& m, const Matrix& z) {
  const SymMatrix v = qmi_eval(m, z);
  const auto lam = sym_eig(v).values;
  return lam(0) / std::max(1.0, lam.cwiseAbs().maxCoeff());
}

bool violates(const QmiForm& m, const Matrix& z, Strictness st,
              const Tolerance& tol) {
  const SymMatrix v = qmi_eval(m, z);
  return st == Strictness::Nonstrict
             ? !definiteness(v, Definiteness::PSD, tol)
             : !definiteness(v, Definiteness::PD, tol);
}

Matrix clip_contraction(const Matrix& v) {
  if (v.size() == 0) return v;
  Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sv = svd.singularValues().cwiseMin(1.0);
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

// Gradient of lambda_min([I;Z]^T M [I;Z]) with respect to Z.
Matrix target_gradient(const QmiForm& m, const Matrix& z) {
  const SymMatrix v = qmi_eval(m, z);
  const auto [lam, vec] = sym_eig(v);
  const Vector u = vec.col(0);
  return 2.0 * (m.m12().transpose() + m.m22() * z) * u * u.transpose();
}

}  // namespace

FalsifyResult falsify_implication(const QmiForm& m, const QmiForm& n,
                                  int budget, std::uint64_t seed,
                                  Strictness strictness,
                                  const Tolerance& tol) {
  check_pair(m, n);
  FalsifyResult out;
  out.worst_target = std::numeric_limits<double>::infinity();
  const Sampler s = make_sampler(n, tol);
  const int q = n.q(), k = n.k();
  Rng rng(seed);
  std::uniform_int_distribution<int> grid(0, 20);

  auto hypothesis = [&](const Matrix& z) {
    return definiteness(qmi_eval(n, z), Definiteness::PSD, tol);
  };
  auto record = [&](const Matrix& z) {
    const double tv = target_value(m, z);
    out.worst_target = std::min(out.worst_target, tv);
    if (violates(m, z, strictness, tol)) {
      out.status = FalsifyStatus::Counterexample;
      out.counterexample = z;
      return true;
    }
    return false;
  };

  if (s.mode == SamplerMode::Rejection) {
    for (int i = 0; i < budget; ++i) {
      const double sc = std::pow(10.0, -3.0 + 6.0 * grid(rng) / 20.0);
      const Matrix z = sc * gaussian_matrix(rng, q, k);
      ++out.drawn;
      if (!hypothesis(z)) continue;
      ++out.accepted;
      if (record(z)) return out;
    }
    if (out.drawn > 0 && out.accepted < 0.001 * out.drawn) {
      out.status = FalsifyStatus::Inconclusive;
    }
    return out;
  }

  const int nk = static_cast<int>(s.kernel.cols());
  auto point = [&](const Matrix& v, const Matrix& f) {
    Matrix z = s.center;
    if (s.r > 0) z += s.left * v * s.dsqrt;
    if (nk > 0) z += s.kernel * f;
    return z;
  };
  double best_tv = std::numeric_limits<double>::infinity();
  Matrix best_v = Matrix::Zero(s.r, k), best_f = Matrix::Zero(nk, k);
  for (int i = 0; i < budget; ++i) {
    const SampleMode mode = i % 2 == 0 ? SampleMode::Interior
                                       : SampleMode::Boundary;
    const Matrix v = s.r > 0 ? random_contraction(rng, s.r, k, mode)
                             : Matrix::Zero(0, k);
    Matrix f = Matrix::Zero(nk, k);
    if (nk > 0) {
      f = std::pow(10.0, -2.0 + 5.0 * grid(rng) / 20.0) *
          gaussian_matrix(rng, nk, k);
    }
    const Matrix z = point(v, f);
    ++out.drawn;
    if (!hypothesis(z)) continue;
    ++out.accepted;
    if (record(z)) return out;
    const double tv = target_value(m, z);
    if (tv < best_tv) {
      best_tv = tv;
      best_v = v;
      best_f = f;
    }
  }
  // local refinement of the worst sample by projected gradient descent
  double step = 0.1;
  for (int it = 0; it < 300 && budget > 0 && step > 1e-10; ++it) {
    const Matrix z = point(best_v, best_f);
    const Matrix gz = target_gradient(m, z);
    Matrix gv = s.r > 0 ? Matrix(s.left.transpose() * gz * s.dsqrt.transpose())
                        : Matrix::Zero(0, k);
    Matrix gf = nk > 0 ? Matrix(s.kernel.transpose() * gz) : Matrix::Zero(0, k);
    const double gn = std::sqrt(gv.squaredNorm() + gf.squaredNorm());
    if (gn == 0.0) break;
    const Matrix v2 = clip_contraction(best_v - step * gv / gn);
    const Matrix f2 = best_f - step * gf / gn * std::max(1.0, best_f.norm());
    const Matrix z2 = point(v2, f2);
    if (!hypothesis(z2)) {
      step *= 0.5;
      continue;
    }
    if (record(z2)) return out;
    const double tv = target_value(m, z2);
    if (tv < best_tv) {
      best_tv = tv;
      best_v = v2;
      best_f = f2;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  return out;
}

}  // namespace nsynth
