#include "nsynth/sdp.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace nsynth {

// ---------------------------------------------------------------- LinExpr

LinExpr LinExpr::Term(int index, double coeff) {
  LinExpr e;
  e.terms_[index] = coeff;
  return e;
}

LinExpr LinExpr::operator+(const LinExpr& other) const {
  LinExpr out = *this;
  out.constant_ += other.constant_;
  for (const auto& [i, c] : other.terms_) out.terms_[i] += c;
  return out;
}

LinExpr LinExpr::operator-(const LinExpr& other) const {
  return *this + other * -1.0;
}

LinExpr LinExpr::operator*(double s) const {
  LinExpr out = *this;
  out.constant_ *= s;
  for (auto& [i, c] : out.terms_) c *= s;
  return out;
}

double LinExpr::evaluate(const Vector& x) const {
  double v = constant_;
  for (const auto& [i, c] : terms_) v += c * x(i);
  return v;
}

// ----------------------------------------------------------- AffineMatrix

AffineMatrix::AffineMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), constant_(Matrix::Zero(rows, cols)) {}

AffineMatrix::AffineMatrix(const Matrix& constant)
    : rows_(static_cast<int>(constant.rows())),
      cols_(static_cast<int>(constant.cols())),
      constant_(constant) {}

AffineMatrix AffineMatrix::Identity(int dim) {
  return AffineMatrix(Matrix::Identity(dim, dim));
}

AffineMatrix AffineMatrix::Scaled(const LinExpr& e, const Matrix& m) {
  AffineMatrix out(e.constant() * m);
  for (const auto& [i, c] : e.terms()) out.terms_[i] = c * m;
  return out;
}

AffineMatrix AffineMatrix::Blocks(
    const std::vector<std::vector<AffineMatrix>>& grid) {
  if (grid.empty() || grid.front().empty()) return {};
  const std::size_t nr = grid.size();
  const std::size_t nc = grid.front().size();
  std::vector<int> heights(nr), widths(nc);
  for (std::size_t i = 0; i < nr; ++i) {
    if (grid[i].size() != nc) {
      throw std::invalid_argument("AffineMatrix::Blocks: ragged grid");
    }
    heights[i] = grid[i][0].rows();
  }
  for (std::size_t j = 0; j < nc; ++j) widths[j] = grid[0][j].cols();
  int total_r = 0, total_c = 0;
  for (int h : heights) total_r += h;
  for (int w : widths) total_c += w;
  AffineMatrix out(total_r, total_c);
  int r0 = 0;
  for (std::size_t i = 0; i < nr; ++i) {
    int c0 = 0;
    for (std::size_t j = 0; j < nc; ++j) {
      const AffineMatrix& b = grid[i][j];
      if (b.rows() != heights[i] || b.cols() != widths[j]) {
        throw std::invalid_argument("AffineMatrix::Blocks: size mismatch");
      }
      out.constant_.block(r0, c0, b.rows(), b.cols()) = b.constant_;
      for (const auto& [k, m] : b.terms_) {
        auto it = out.terms_.find(k);
        if (it == out.terms_.end()) {
          it = out.terms_.emplace(k, Matrix::Zero(total_r, total_c)).first;
        }
        it->second.block(r0, c0, b.rows(), b.cols()) += m;
      }
      c0 += widths[j];
    }
    r0 += heights[i];
  }
  return out;
}

AffineMatrix AffineMatrix::operator+(const AffineMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw std::invalid_argument("AffineMatrix: dimension mismatch in +");
  }
  AffineMatrix out = *this;
  out.constant_ += other.constant_;
  for (const auto& [k, m] : other.terms_) {
    auto it = out.terms_.find(k);
    if (it == out.terms_.end()) {
      out.terms_.emplace(k, m);
    } else {
      it->second += m;
    }
  }
  return out;
}

AffineMatrix AffineMatrix::operator-(const AffineMatrix& other) const {
  return *this + other * -1.0;
}

AffineMatrix AffineMatrix::operator+(const Matrix& other) const {
  return *this + AffineMatrix(other);
}

AffineMatrix AffineMatrix::operator-(const Matrix& other) const {
  return *this + AffineMatrix(Matrix(-other));
}

AffineMatrix AffineMatrix::operator*(double s) const {
  AffineMatrix out = *this;
  out.constant_ *= s;
  for (auto& [k, m] : out.terms_) m *= s;
  return out;
}

AffineMatrix AffineMatrix::transpose() const {
  AffineMatrix out(cols_, rows_);
  out.constant_ = constant_.transpose();
  for (const auto& [k, m] : terms_) out.terms_.emplace(k, m.transpose());
  return out;
}

AffineMatrix AffineMatrix::trace() const {
  if (rows_ != cols_) throw std::invalid_argument("trace of non-square");
  AffineMatrix out(1, 1);
  out.constant_(0, 0) = constant_.trace();
  for (const auto& [k, m] : terms_) {
    out.terms_.emplace(k, Matrix::Constant(1, 1, m.trace()));
  }
  return out;
}

LinExpr AffineMatrix::entry(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
    throw std::out_of_range("AffineMatrix::entry");
  }
  LinExpr out(constant_(i, j));
  for (const auto& [k, m] : terms_) {
    if (m(i, j) != 0.0) out = out + LinExpr::Term(k, m(i, j));
  }
  return out;
}

Matrix AffineMatrix::evaluate(const Vector& x) const {
  Matrix v = constant_;
  for (const auto& [k, m] : terms_) v += x(k) * m;
  return v;
}

AffineMatrix operator*(const Matrix& left, const AffineMatrix& a) {
  if (left.cols() != a.rows_) {
    throw std::invalid_argument("AffineMatrix: dimension mismatch in *");
  }
  AffineMatrix out(static_cast<int>(left.rows()), a.cols_);
  out.constant_ = left * a.constant_;
  for (const auto& [k, m] : a.terms_) out.terms_.emplace(k, left * m);
  return out;
}

AffineMatrix operator*(const AffineMatrix& a, const Matrix& right) {
  if (a.cols_ != right.rows()) {
    throw std::invalid_argument("AffineMatrix: dimension mismatch in *");
  }
  AffineMatrix out(a.rows_, static_cast<int>(right.cols()));
  out.constant_ = a.constant_ * right;
  for (const auto& [k, m] : a.terms_) out.terms_.emplace(k, m * right);
  return out;
}

// ------------------------------------------------------------- SdpProblem

int SdpProblem::add_var(const std::string& name, VarKind kind, int rows,
                        int cols, int size) {
  for (const auto& v : vars_) {
    if (v.name == name) {
      throw std::invalid_argument("duplicate variable name: " + name);
    }
  }
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("variable dimensions must be positive");
  }
  vars_.push_back({name, kind, rows, cols, num_scalars_, size});
  num_scalars_ += size;
  return static_cast<int>(vars_.size()) - 1;
}

int SdpProblem::add_scalar(const std::string& name) {
  return add_var(name, VarKind::Scalar, 1, 1, 1);
}

int SdpProblem::add_symmetric(const std::string& name, int dim) {
  return add_var(name, VarKind::Symmetric, dim, dim, dim * (dim + 1) / 2);
}

int SdpProblem::add_full(const std::string& name, int rows, int cols) {
  return add_var(name, VarKind::Full, rows, cols, rows * cols);
}

const VarInfo& SdpProblem::variable(const std::string& name) const {
  for (const auto& v : vars_) {
    if (v.name == name) return v;
  }
  throw std::invalid_argument("unknown variable: " + name);
}

AffineMatrix SdpProblem::var(int id) const {
  const VarInfo& v = vars_.at(id);
  AffineMatrix out(v.rows, v.cols);
  int k = v.offset;
  switch (v.kind) {
    case VarKind::Scalar:
      return AffineMatrix::Scaled(LinExpr::Term(k, 1.0), Matrix::Ones(1, 1));
    case VarKind::Symmetric:
      for (int j = 0; j < v.cols; ++j) {
        for (int i = j; i < v.rows; ++i) {
          Matrix e = Matrix::Zero(v.rows, v.cols);
          e(i, j) = 1.0;
          e(j, i) = 1.0;
          out = out + AffineMatrix::Scaled(LinExpr::Term(k++, 1.0), e);
        }
      }
      return out;
    case VarKind::Full:
      for (int j = 0; j < v.cols; ++j) {
        for (int i = 0; i < v.rows; ++i) {
          Matrix e = Matrix::Zero(v.rows, v.cols);
          e(i, j) = 1.0;
          out = out + AffineMatrix::Scaled(LinExpr::Term(k++, 1.0), e);
        }
      }
      return out;
  }
  return out;
}

LinExpr SdpProblem::scalar(int id) const {
  const VarInfo& v = vars_.at(id);
  if (v.kind != VarKind::Scalar) {
    throw std::invalid_argument(v.name + " is not a scalar variable");
  }
  return LinExpr::Term(v.offset, 1.0);
}

void SdpProblem::add_psd(const AffineMatrix& block, const std::string& label) {
  if (block.rows() != block.cols() || block.rows() < 1) {
    throw std::invalid_argument("PSD block must be square and non-empty");
  }
  for (const auto& [k, m] : block.terms()) {
    if (k < 0 || k >= num_scalars_) {
      throw std::invalid_argument("PSD block references unknown variable");
    }
  }
  AffineMatrix sym = (block + block.transpose()) * 0.5;
  blocks_.push_back(std::move(sym));
  labels_.push_back(label);
}

void SdpProblem::add_equality(const LinExpr& lhs) {
  equalities_.push_back(lhs);
}

void SdpProblem::add_equality(const AffineMatrix& lhs) {
  for (int i = 0; i < lhs.rows(); ++i) {
    for (int j = 0; j < lhs.cols(); ++j) {
      LinExpr e(lhs.constant()(i, j));
      for (const auto& [k, m] : lhs.terms()) {
        if (m(i, j) != 0.0) e = e + LinExpr::Term(k, m(i, j));
      }
      equalities_.push_back(e);
    }
  }
}

Matrix SdpProblem::value(int id, const Vector& x) const {
  return var(id).evaluate(x);
}

void SdpProblem::assign(int id, const Matrix& value, Vector* x) const {
  const VarInfo& v = vars_.at(id);
  if (value.rows() != v.rows || value.cols() != v.cols) {
    throw std::invalid_argument("assign: wrong shape for " + v.name);
  }
  if (x->size() != num_scalars_) x->conservativeResize(num_scalars_);
  int k = v.offset;
  if (v.kind == VarKind::Symmetric) {
    const Matrix s = 0.5 * (value + value.transpose());
    for (int j = 0; j < v.cols; ++j) {
      for (int i = j; i < v.rows; ++i) (*x)(k++) = s(i, j);
    }
    return;
  }
  for (int j = 0; j < v.cols; ++j) {
    for (int i = 0; i < v.rows; ++i) (*x)(k++) = value(i, j);
  }
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::Inaccurate:
      return "inaccurate";
    case SolveStatus::IterationLimit:
      return "iteration_limit";
  }
  return "unknown";
}

// ------------------------------------------------------------ IPM core
//
// Standard form handled by the interior point method:
//   primal  min <C, X>  s.t. <A_i, X> = b_i,  X >= 0
//   dual    max b^T y   s.t. S = C - sum_i y_i A_i >= 0
// The user's LMIs F0 + sum_i z_i F_i >= 0 map to C = F0, A_i = -F_i.
// Solved through the homogeneous self-dual embedding with NT scaling and a
// Mehrotra predictor-corrector step.

namespace {

struct Block {
  int dim = 0;
  Matrix c;
  std::vector<std::pair<int, Matrix>> a;  // (index, A_i)
};

struct StandardForm {
  int m = 0;
  std::vector<Block> blocks;
  Vector b;
};

using Blocks = std::vector<Matrix>;

double inner(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += inner(a[j], b[j]);
  return s;
}

double fro_norm(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

Vector op_a(const StandardForm& sf, const Blocks& x) {
  Vector out = Vector::Zero(sf.m);
  for (std::size_t j = 0; j < sf.blocks.size(); ++j) {
    for (const auto& [i, a] : sf.blocks[j].a) out(i) += inner(a, x[j]);
  }
  return out;
}

Blocks op_at(const StandardForm& sf, const Vector& y) {
  Blocks out;
  out.reserve(sf.blocks.size());
  for (const auto& blk : sf.blocks) {
    Matrix s = Matrix::Zero(blk.dim, blk.dim);
    for (const auto& [i, a] : blk.a) s += y(i) * a;
    out.push_back(std::move(s));
  }
  return out;
}

Blocks c_blocks(const StandardForm& sf) {
  Blocks out;
  for (const auto& blk : sf.blocks) out.push_back(blk.c);
  return out;
}

struct Scaling {
  Matrix g;      // W = G G^T, G^{-1} X G^{-T} = G^T S G = diag(lambda)
  Matrix g_inv;
  Vector lambda;
  Matrix w;
};

bool nt_scaling(const Matrix& x, const Matrix& s, Scaling* out) {
  Eigen::LLT<Matrix> lx(x), ls(s);
  if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) {
    return false;
  }
  const Matrix l_x = lx.matrixL();
  const Matrix l_s = ls.matrixL();
  Eigen::JacobiSVD<Matrix> svd(l_s.transpose() * l_x,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& lam = svd.singularValues();
  if (lam.minCoeff() <= 0.0 || !lam.allFinite()) return false;
  const Vector isq = lam.cwiseSqrt().cwiseInverse();
  out->lambda = lam;
  out->g = l_x * svd.matrixV() * isq.asDiagonal();
  // G^{-1} = Lambda^{1/2} V^T L_x^{-1} = Lambda^{-1/2} U^T L_s^T
  out->g_inv = isq.asDiagonal() * svd.matrixU().transpose() * l_s.transpose();
  out->w = out->g * out->g.transpose();
  return true;
}

// Largest step alpha so that D + alpha * dD stays PSD, where D is diagonal
// positive (scaled iterate) and dD symmetric.
double max_step_scaled(const Vector& d, const Matrix& dd) {
  const Vector isq = d.cwiseSqrt().cwiseInverse();
  Matrix t = isq.asDiagonal() * dd * isq.asDiagonal();
  t = 0.5 * (t + t.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(t, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  if (lo >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lo;
}

struct IpmResult {
  SolveStatus status = SolveStatus::Inaccurate;
  Vector y;
  Blocks x;  // primal (certificate candidate)
  int iterations = 0;
  double pres = 0.0, dres = 0.0, gap = 0.0;
  double cert_res = 0.0;
};

IpmResult run_ipm(const StandardForm& sf, const SolverSettings& st) {
  const int m = sf.m;
  const std::size_t nb = sf.blocks.size();
  int nu = 0;
  for (const auto& blk : sf.blocks) nu += blk.dim;

  Blocks x, s;
  for (const auto& blk : sf.blocks) {
    x.push_back(Matrix::Identity(blk.dim, blk.dim));
    s.push_back(Matrix::Identity(blk.dim, blk.dim));
  }
  Vector y = Vector::Zero(m);
  double tau = 1.0, kappa = 1.0;
  const Blocks cb = c_blocks(sf);
  const double b_norm = sf.b.size() ? sf.b.lpNorm<Eigen::Infinity>() : 0.0;
  const double c_norm = fro_norm(cb);

  IpmResult res;
  res.y = y;
  res.x = x;
  double best_merit = std::numeric_limits<double>::infinity();
  IpmResult best = res;

  for (int iter = 0; iter <= st.max_iter; ++iter) {
    // residuals of the embedding
    const Vector ax = op_a(sf, x);
    const Vector rp = sf.b * tau - ax;
    const Blocks aty = op_at(sf, y);
    Blocks rd(nb);
    for (std::size_t j = 0; j < nb; ++j) rd[j] = aty[j] + s[j] - cb[j] * tau;
    const double cx = inner(cb, x);
    const double by = sf.b.dot(y);
    const double rg = cx - by + kappa;
    double xs = 0.0;
    for (std::size_t j = 0; j < nb; ++j) xs += inner(x[j], s[j]);
    const double mu = (xs + tau * kappa) / (nu + 1);

    // termination tests on the de-homogenized point
    res.iterations = iter;
    res.pres = (ax / tau - sf.b).norm() / (1.0 + b_norm);
    Blocks dr(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      dr[j] = (aty[j] + s[j]) / tau - cb[j];
    }
    res.dres = fro_norm(dr) / (1.0 + c_norm);
    const double pobj = cx / tau, dobj = by / tau;
    res.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    res.y = y / tau;
    res.x = x;
    for (auto& xj : res.x) xj /= tau;
    if (res.pres <= st.feas_tol && res.dres <= st.feas_tol &&
        res.gap <= st.gap_tol) {
      res.status = SolveStatus::Optimal;
      return res;
    }
    const double merit = std::max({res.pres, res.dres, res.gap});
    if (merit < best_merit) {
      best_merit = merit;
      best = res;
    }
    // primal infeasibility of the user problem: X >= 0, A(X) ~ 0, <C,X> < 0
    if (cx < 0.0) {
      const double r = ax.lpNorm<Eigen::Infinity>() / -cx;
      if (r <= st.feas_tol) {
        res.status = SolveStatus::Infeasible;
        res.x = x;
        for (auto& xj : res.x) xj /= -cx;
        res.cert_res = r;
        return res;
      }
    }
    // unboundedness: b^T y > 0 with A^T y + S ~ 0
    if (by > 0.0) {
      Blocks ray(nb);
      for (std::size_t j = 0; j < nb; ++j) ray[j] = aty[j] + s[j];
      if (fro_norm(ray) / by <= st.feas_tol) {
        res.status = SolveStatus::Unbounded;
        res.y = y / by;
        return res;
      }
    }
    if (iter == st.max_iter) break;

    // NT scaling
    std::vector<Scaling> sc(nb);
    bool ok = true;
    for (std::size_t j = 0; j < nb && ok; ++j) ok = nt_scaling(x[j], s[j], &sc[j]);
    if (!ok) break;

    // Schur complement system
    Matrix mm = Matrix::Zero(m, m);
    Vector g = Vector::Zero(m);
    double cwc = 0.0;
    Blocks wcw(nb), wrw(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      const auto& blk = sf.blocks[j];
      const Matrix& gj = sc[j].g;
      std::vector<Matrix> at;
      at.reserve(blk.a.size());
      for (const auto& [i, a] : blk.a) at.push_back(gj.transpose() * a * gj);
      const Matrix ct = gj.transpose() * blk.c * gj;
      for (std::size_t p = 0; p < blk.a.size(); ++p) {
        const int ip = blk.a[p].first;
        g(ip) += inner(at[p], ct);
        for (std::size_t q = p; q < blk.a.size(); ++q) {
          const int iq = blk.a[q].first;
          const double v = inner(at[p], at[q]);
          mm(ip, iq) += v;
          if (iq != ip) mm(iq, ip) += v;
        }
      }
      cwc += ct.squaredNorm();
      wcw[j] = sc[j].w * blk.c * sc[j].w;
      wrw[j] = sc[j].w * rd[j] * sc[j].w;
    }
    Matrix kk(m + 1, m + 1);
    kk.topLeftCorner(m, m) = mm;
    kk.topRightCorner(m, 1) = -(g + sf.b);
    kk.bottomLeftCorner(1, m) = (sf.b - g).transpose();
    kk(m, m) = cwc + kappa / tau;
    const double reg = 1e-14 * std::max(1.0, mm.diagonal().cwiseAbs().maxCoeff());
    kk.topLeftCorner(m, m).diagonal().array() += reg;
    Eigen::PartialPivLU<Matrix> lu(kk);

    struct Dir {
      Blocks dx, ds;
      Vector dy;
      double dtau = 0.0, dkappa = 0.0;
      Blocks dx_t, ds_t;  // scaled
    };

    // rhs_c: per block scaled complementarity target (symmetric)
    auto direction = [&](double eta, const std::vector<Matrix>& rhs_c,
                         double r_tau) {
      Dir d;
      Blocks rx(nb), q(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        const Vector& lam = sc[j].lambda;
        const int dim = static_cast<int>(lam.size());
        Matrix t(dim, dim);
        for (int a = 0; a < dim; ++a) {
          for (int bb = 0; bb < dim; ++bb) {
            t(a, bb) = 2.0 * rhs_c[j](a, bb) / (lam(a) + lam(bb));
          }
        }
        rx[j] = sc[j].g * t * sc[j].g.transpose();
        q[j] = rx[j] + eta * wrw[j];
      }
      Vector rhs(m + 1);
      rhs.head(m) = eta * rp - op_a(sf, q);
      rhs(m) = r_tau / tau + inner(cb, q) + eta * rg;
      const Vector sol = lu.solve(rhs);
      d.dy = sol.head(m);
      d.dtau = sol(m);
      const Blocks atdy = op_at(sf, d.dy);
      d.dx.resize(nb);
      d.ds.resize(nb);
      d.dx_t.resize(nb);
      d.ds_t.resize(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        d.ds[j] = -atdy[j] + cb[j] * d.dtau - eta * rd[j];
        d.ds[j] = 0.5 * (d.ds[j] + d.ds[j].transpose());
        d.dx[j] = rx[j] - sc[j].w * d.ds[j] * sc[j].w;
        d.dx[j] = 0.5 * (d.dx[j] + d.dx[j].transpose());
        d.dx_t[j] = sc[j].g_inv * d.dx[j] * sc[j].g_inv.transpose();
        d.ds_t[j] = sc[j].g.transpose() * d.ds[j] * sc[j].g;
      }
      d.dkappa = (r_tau - kappa * d.dtau) / tau;
      return d;
    };

    auto step_length = [&](const Dir& d) {
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nb; ++j) {
        alpha = std::min(alpha, max_step_scaled(sc[j].lambda, d.dx_t[j]));
        alpha = std::min(alpha, max_step_scaled(sc[j].lambda, d.ds_t[j]));
      }
      if (d.dtau < 0.0) alpha = std::min(alpha, -tau / d.dtau);
      if (d.dkappa < 0.0) alpha = std::min(alpha, -kappa / d.dkappa);
      return alpha;
    };

    // predictor
    std::vector<Matrix> rc(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      rc[j] = Matrix(Vector(-sc[j].lambda.array().square()).asDiagonal());
    }
    const Dir pred = direction(1.0, rc, -tau * kappa);
    const double a_aff = std::min(1.0, step_length(pred));
    double xs_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      xs_aff += inner(x[j] + a_aff * pred.dx[j], s[j] + a_aff * pred.ds[j]);
    }
    xs_aff += (tau + a_aff * pred.dtau) * (kappa + a_aff * pred.dkappa);
    const double mu_aff = xs_aff / (nu + 1);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // corrector
    for (std::size_t j = 0; j < nb; ++j) {
      const Matrix prod = pred.dx_t[j] * pred.ds_t[j];
      rc[j] = Matrix(Vector(-sc[j].lambda.array().square()).asDiagonal()) -
              0.5 * (prod + prod.transpose());
      rc[j].diagonal().array() += sigma * mu;
    }
    const Dir corr = direction(1.0 - sigma, rc,
                               sigma * mu - tau * kappa -
                                   pred.dtau * pred.dkappa);
    const double alpha = std::min(1.0, st.step_fraction * step_length(corr));

    for (std::size_t j = 0; j < nb; ++j) {
      x[j] += alpha * corr.dx[j];
      s[j] += alpha * corr.ds[j];
      x[j] = 0.5 * (x[j] + x[j].transpose());
      s[j] = 0.5 * (s[j] + s[j].transpose());
    }
    y += alpha * corr.dy;
    tau += alpha * corr.dtau;
    kappa += alpha * corr.dkappa;
    if (!(tau > 0.0) || !(kappa > 0.0) || !y.allFinite()) break;
    if (tau < 1e-12 * std::max(1.0, kappa)) {
      // tau has collapsed: hand back the primal ray as a candidate
      const Vector ax1 = op_a(sf, x);
      const double cx1 = inner(cb, x);
      if (cx1 < 0.0) {
        res.status = SolveStatus::Infeasible;
        res.x = x;
        for (auto& xj : res.x) xj /= -cx1;
        res.cert_res = ax1.lpNorm<Eigen::Infinity>() / -cx1;
        return res;
      }
      break;
    }
  }
  best.status = best_merit <= std::sqrt(st.feas_tol)
                    ? SolveStatus::Inaccurate
                    : SolveStatus::IterationLimit;
  return best;
}

// Reduction of the user problem to StandardForm: elimination of
// equalities, removal of absent variables, block and column scaling.
struct Reduction {
  Vector x0;           // particular solution of the equalities
  Matrix null_basis;   // x = x0 + null_basis * z
  std::vector<int> kept;      // indices into z that enter the IPM
  Vector col_scale;           // per kept column
  std::vector<double> block_scale;
  double obj_scale = 1.0;
  Vector z_obj;               // objective in z coordinates
  double obj_const = 0.0;
  bool unbounded = false;
  bool eq_infeasible = false;
  std::vector<Matrix> f0;                    // per block, reduced constant
  std::vector<std::vector<Matrix>> fz;       // per block, per z column
};

Reduction reduce(const SdpProblem& p) {
  Reduction r;
  const int nx = p.num_scalars();
  const auto& eqs = p.equalities();
  if (eqs.empty()) {
    r.x0 = Vector::Zero(nx);
    r.null_basis = Matrix::Identity(nx, nx);
  } else {
    Matrix e = Matrix::Zero(static_cast<Eigen::Index>(eqs.size()), nx);
    Vector f(static_cast<Eigen::Index>(eqs.size()));
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      for (const auto& [i, c] : eqs[k].terms()) e(k, i) = c;
      f(k) = -eqs[k].constant();
    }
    Eigen::JacobiSVD<Matrix> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double cut = 1e-12 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) rank += sv(i) > cut ? 1 : 0;
    Vector x0 = Vector::Zero(nx);
    const Vector utf = svd.matrixU().transpose() * f;
    for (int i = 0; i < rank; ++i) x0 += svd.matrixV().col(i) * (utf(i) / sv(i));
    if ((e * x0 - f).norm() > 1e-9 * (1.0 + f.norm())) r.eq_infeasible = true;
    r.x0 = x0;
    r.null_basis = svd.matrixV().rightCols(nx - rank);
  }
  const int nz = static_cast<int>(r.null_basis.cols());
  const auto& blocks = p.psd_blocks();
  r.f0.resize(blocks.size());
  r.fz.resize(blocks.size());
  const bool identity = eqs.empty();
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto& blk = blocks[j];
    r.f0[j] = blk.evaluate(r.x0);
    r.fz[j].assign(nz, Matrix::Zero(blk.rows(), blk.cols()));
    for (const auto& [i, m] : blk.terms()) {
      if (identity) {
        r.fz[j][i] += m;
      } else {
        for (int k = 0; k < nz; ++k) {
          const double c = r.null_basis(i, k);
          if (c != 0.0) r.fz[j][k] += c * m;
        }
      }
    }
  }
  Vector cx = Vector::Zero(nx);
  for (const auto& [i, c] : p.objective().terms()) cx(i) = c;
  r.z_obj = r.null_basis.transpose() * cx;
  r.obj_const = p.objective().constant() + cx.dot(r.x0);

  // column scaling and detection of variables absent from every block
  std::vector<double> cs;
  for (int k = 0; k < nz; ++k) {
    double mx = 0.0;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      mx = std::max(mx, r.fz[j][k].cwiseAbs().maxCoeff());
    }
    if (mx <= 1e-14) {
      if (std::abs(r.z_obj(k)) > 1e-14) r.unbounded = true;
      continue;
    }
    r.kept.push_back(k);
    cs.push_back(mx);
  }
  r.col_scale = Eigen::Map<Vector>(cs.data(), static_cast<Eigen::Index>(cs.size()));
  r.block_scale.resize(blocks.size());
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    double mx = r.f0[j].cwiseAbs().maxCoeff();
    for (std::size_t t = 0; t < r.kept.size(); ++t) {
      mx = std::max(mx, r.fz[j][r.kept[t]].cwiseAbs().maxCoeff() / cs[t]);
    }
    r.block_scale[j] = mx > 0.0 ? mx : 1.0;
  }
  double ob = 0.0;
  for (std::size_t t = 0; t < r.kept.size(); ++t) {
    ob = std::max(ob, std::abs(r.z_obj(r.kept[t]) / cs[t]));
  }
  r.obj_scale = ob > 0.0 ? ob : 1.0;
  return r;
}

StandardForm to_standard(const Reduction& r) {
  StandardForm sf;
  sf.m = static_cast<int>(r.kept.size());
  sf.b.resize(sf.m);
  for (int t = 0; t < sf.m; ++t) {
    sf.b(t) = r.z_obj(r.kept[t]) / r.col_scale(t) / r.obj_scale;
  }
  for (std::size_t j = 0; j < r.f0.size(); ++j) {
    Block blk;
    blk.dim = static_cast<int>(r.f0[j].rows());
    blk.c = r.f0[j] / r.block_scale[j];
    for (int t = 0; t < sf.m; ++t) {
      const Matrix& f = r.fz[j][r.kept[t]];
      if (f.cwiseAbs().maxCoeff() == 0.0) continue;
      blk.a.emplace_back(t, -f / (r.col_scale(t) * r.block_scale[j]));
    }
    sf.blocks.push_back(std::move(blk));
  }
  return sf;
}

Vector lift(const Reduction& r, const Vector& y) {
  Vector z = Vector::Zero(r.null_basis.cols());
  for (std::size_t t = 0; t < r.kept.size(); ++t) {
    z(r.kept[t]) = y(static_cast<Eigen::Index>(t)) / r.col_scale(static_cast<Eigen::Index>(t));
  }
  return r.x0 + r.null_basis * z;
}

}  // namespace

// ----------------------------------------------------------- public API

AssignmentCheck verify_assignment(const SdpProblem& p, const Vector& x,
                                  double feas_tol) {
  if (x.size() != p.num_scalars()) {
    throw std::invalid_argument("assignment does not cover all variables");
  }
  AssignmentCheck out;
  out.worst_eig = std::numeric_limits<double>::infinity();
  for (const auto& blk : p.psd_blocks()) {
    const SymMatrix v(blk.evaluate(x));
    Eigen::SelfAdjointEigenSolver<Matrix> es(v.matrix(), Eigen::EigenvaluesOnly);
    const Vector& lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    out.worst_eig = std::min(out.worst_eig, lam(0) / scale);
  }
  for (const auto& e : p.equalities()) {
    double mag = std::abs(e.constant());
    for (const auto& [i, c] : e.terms()) mag = std::max(mag, std::abs(c * x(i)));
    out.worst_equality =
        std::max(out.worst_equality, std::abs(e.evaluate(x)) / (1.0 + mag));
  }
  out.feasible = out.worst_eig >= -feas_tol && out.worst_equality <= feas_tol;
  return out;
}

namespace {

// r_i = sum_j <F_ij, X_j> and c0 = sum_j <F_0j, X_j>, after removing the
// component of r that equality multipliers can absorb.
std::pair<Vector, double> pair_with(const SdpProblem& p,
                                    const std::vector<Matrix>& blocks) {
  const auto& psd = p.psd_blocks();
  if (blocks.size() != psd.size()) {
    throw std::invalid_argument("certificate block count mismatch");
  }
  const int nx = p.num_scalars();
  Vector r = Vector::Zero(nx);
  double c0 = 0.0;
  for (std::size_t j = 0; j < psd.size(); ++j) {
    const Matrix& xj = blocks[j];
    c0 += inner(psd[j].constant(), xj);
    for (const auto& [i, m] : psd[j].terms()) r(i) += inner(m, xj);
  }
  const auto& eqs = p.equalities();
  if (!eqs.empty()) {
    Matrix e = Matrix::Zero(static_cast<Eigen::Index>(eqs.size()), nx);
    Vector cst(static_cast<Eigen::Index>(eqs.size()));
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      for (const auto& [i, c] : eqs[k].terms()) e(k, i) = c;
      cst(k) = eqs[k].constant();
    }
    const Vector lam = e.transpose().completeOrthogonalDecomposition().solve(-r);
    r += e.transpose() * lam;
    c0 += cst.dot(lam);
  }
  return {r, c0};
}

}  // namespace

double certificate_residual(const SdpProblem& p,
                            const std::vector<Matrix>& blocks) {
  const auto [r, c0] = pair_with(p, blocks);
  const int nx = p.num_scalars();
  if (!(c0 < 0.0)) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int i = 0; i < nx; ++i) worst = std::max(worst, std::abs(r(i)) / -c0);
  return worst;
}

double strict_certificate_residual(const SdpProblem& p,
                                   const std::vector<Matrix>& blocks) {
  double tr = 0.0;
  for (const Matrix& b : blocks) tr += b.trace();
  if (!(tr > 0.0)) return std::numeric_limits<double>::infinity();
  const auto [r, c0] = pair_with(p, blocks);
  // each pairing is measured against the size of its coefficients
  Vector norm = Vector::Zero(p.num_scalars());
  double norm0 = 0.0;
  for (const auto& blk : p.psd_blocks()) {
    norm0 += blk.constant().squaredNorm();
    for (const auto& [i, m] : blk.terms()) norm(i) += m.squaredNorm();
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    worst = std::max(worst, std::abs(r(i)) / std::max(1.0, std::sqrt(norm(i))));
  }
  return std::max(worst, std::max(c0, 0.0) / std::max(1.0, std::sqrt(norm0))) /
         tr;
}

namespace {

using Residual = std::function<double(const std::vector<Matrix>&)>;

// Alternating projections onto {X : <F_i, X> = 0} and the PSD cone, then
// an exact correction inside the dominant face.
std::vector<Matrix> polish_certificate(const SdpProblem& p,
                                       std::vector<Matrix> blocks,
                                       const Residual& residual, double tol,
                                       int max_iter = 500) {
  const auto& psd = p.psd_blocks();
  const int nx = p.num_scalars();
  std::vector<Eigen::Index> off(psd.size() + 1, 0);
  for (std::size_t j = 0; j < psd.size(); ++j) {
    off[j + 1] = off[j] + static_cast<Eigen::Index>(psd[j].rows()) * psd[j].rows();
  }
  Matrix g = Matrix::Zero(nx, off.back());
  for (std::size_t j = 0; j < psd.size(); ++j) {
    for (const auto& [i, m] : psd[j].terms()) {
      g.row(i).segment(off[j], m.size()) =
          Eigen::Map<const Vector>(m.data(), m.size()).transpose();
    }
  }
  const auto& eqs = p.equalities();
  if (!eqs.empty()) {
    Matrix e = Matrix::Zero(static_cast<Eigen::Index>(eqs.size()), nx);
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      for (const auto& [i, c] : eqs[k].terms()) e(k, i) = c;
    }
    const Matrix q = e.transpose().colPivHouseholderQr().householderQ();
    const int rank = static_cast<int>(
        e.transpose().colPivHouseholderQr().rank());
    const Matrix basis = q.leftCols(rank);
    g -= basis * (basis.transpose() * g);
  }
  // orthonormal basis of the row space of g
  Eigen::JacobiSVD<Matrix> svd(g.transpose(), Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-12 * std::max(1.0, sv(0))) ++rank;
  const Matrix u = svd.matrixU().leftCols(rank);
  Vector v(off.back());
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t j = 0; j < psd.size(); ++j) {
      v.segment(off[j], blocks[j].size()) =
          Eigen::Map<const Vector>(blocks[j].data(), blocks[j].size());
    }
    v -= u * (u.transpose() * v);
    double tr = 0.0;
    for (std::size_t j = 0; j < psd.size(); ++j) {
      const int d = psd[j].rows();
      Matrix xj = Eigen::Map<const Matrix>(v.data() + off[j], d, d);
      xj = 0.5 * (xj + xj.transpose());
      const auto [lam, vec] = sym_eig(SymMatrix(xj));
      blocks[j] = vec * lam.cwiseMax(0.0).asDiagonal() * vec.transpose();
      tr += blocks[j].trace();
    }
    if (!(tr > 0.0)) break;
    for (auto& b : blocks) b /= tr;
    if (residual(blocks) <= tol) break;
  }
  if (residual(blocks) <= tol) return blocks;
  // exact min-norm correction inside faces spanned by the iterate's
  // dominant eigenvectors
  std::vector<Matrix> best = blocks;
  double best_res = residual(blocks);
  for (double cut : {1e-9, 1e-7, 1e-5, 1e-3, 1e-1}) {
    std::vector<Matrix> faces(psd.size());
    std::vector<Eigen::Index> soff(psd.size() + 1, 0);
    for (std::size_t j = 0; j < psd.size(); ++j) {
      const auto [lam, vec] = sym_eig(SymMatrix(blocks[j]));
      const double top = std::max(lam.size() ? lam.maxCoeff() : 0.0, 0.0);
      int r = 0;
      for (Eigen::Index i = 0; i < lam.size(); ++i) r += lam(i) > cut * top;
      faces[j] = vec.rightCols(r);
      soff[j + 1] = soff[j] + static_cast<Eigen::Index>(r) * r;
    }
    Matrix h = Matrix::Zero(g.rows(), soff.back());
    Vector s0(soff.back());
    for (std::size_t j = 0; j < psd.size(); ++j) {
      const Matrix& f = faces[j];
      const int d = static_cast<int>(f.rows());
      const int r = static_cast<int>(f.cols());
      const Matrix sj = f.transpose() * blocks[j] * f;
      for (int b = 0; b < r; ++b) {
        for (int a = 0; a < r; ++a) {
          const Matrix e = f.col(a) * f.col(b).transpose();
          const Eigen::Index c = soff[j] + static_cast<Eigen::Index>(b) * r + a;
          h.col(c) = g.middleCols(off[j], static_cast<Eigen::Index>(d) * d) *
                     Eigen::Map<const Vector>(e.data(), e.size());
          s0(c) = sj(a, b);
        }
      }
    }
    const Vector s1 = s0 - h.completeOrthogonalDecomposition().solve(h * s0);
    std::vector<Matrix> fixed(psd.size());
    double tr = 0.0;
    bool psd_ok = true;
    for (std::size_t j = 0; j < psd.size() && psd_ok; ++j) {
      const int r = static_cast<int>(faces[j].cols());
      Matrix sj = Eigen::Map<const Matrix>(s1.data() + soff[j], r, r);
      sj = 0.5 * (sj + sj.transpose());
      psd_ok = r == 0 || min_eig(SymMatrix(sj)) >= 0.0;
      fixed[j] = faces[j] * sj * faces[j].transpose();
      tr += fixed[j].trace();
    }
    if (!psd_ok || !(tr > 0.0)) continue;
    for (auto& b : fixed) b /= tr;
    const double res = residual(fixed);
    if (res < best_res) {
      best_res = res;
      best = std::move(fixed);
    }
    if (best_res <= tol) break;
  }
  return best;
}

}  // namespace

SolveResult solve(const SdpProblem& p, const SolverSettings& settings) {
  SolveResult out;
  out.x = Vector::Zero(p.num_scalars());
  if (p.psd_blocks().empty()) {
    throw std::invalid_argument("SDP has no PSD constraints");
  }
  const Reduction red = reduce(p);
  if (red.eq_infeasible) {
    out.report.status = SolveStatus::Infeasible;
    out.report.certificate_residual = 0.0;
    return out;
  }
  if (red.unbounded) {
    out.report.status = SolveStatus::Unbounded;
    return out;
  }
  const StandardForm sf = to_standard(red);
  const IpmResult ipm = run_ipm(sf, settings);
  out.report.iterations = ipm.iterations;
  out.report.primal_residual = ipm.pres;
  out.report.dual_residual = ipm.dres;
  out.report.gap = ipm.gap;
  out.report.status = ipm.status;

  if (ipm.status == SolveStatus::Infeasible) {
    std::vector<Matrix> cert;
    for (std::size_t j = 0; j < ipm.x.size(); ++j) {
      // undo block scaling and project onto the PSD cone
      const SymMatrix xj(ipm.x[j] / red.block_scale[j]);
      const auto [lam, v] = sym_eig(xj);
      cert.push_back(v * lam.cwiseMax(0.0).asDiagonal() * v.transpose());
    }
    double cr = certificate_residual(p, cert);
    if (!(cr <= settings.feas_tol)) {
      const Residual res = [&p](const std::vector<Matrix>& b) {
        return certificate_residual(p, b);
      };
      cert = polish_certificate(p, std::move(cert), res, settings.feas_tol);
      cr = certificate_residual(p, cert);
    }
    out.report.certificate = std::move(cert);
    out.report.certificate_residual = cr;
    if (!(cr <= settings.feas_tol)) {
      out.report.status = SolveStatus::Inaccurate;
    }
    return out;
  }
  if (ipm.status == SolveStatus::Unbounded) return out;

  out.x = lift(red, ipm.y);
  for (std::size_t j = 0; j < ipm.x.size(); ++j) {
    out.report.dual.push_back(
        SymMatrix(ipm.x[j] * (red.obj_scale / red.block_scale[j])).matrix());
  }
  out.report.objective_value = p.objective().evaluate(out.x);
  const AssignmentCheck chk = verify_assignment(p, out.x, settings.feas_tol);
  out.report.min_constraint_eig = chk.worst_eig;
  if (out.report.status == SolveStatus::Optimal && !chk.feasible) {
    out.report.status = SolveStatus::Inaccurate;
  }
  return out;
}

std::string to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Feasible:
      return "feasible";
    case Feasibility::Infeasible:
      return "infeasible";
    case Feasibility::Indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

namespace {

// Alternating projections between {X : sum_j <F_ij, X_j> = 0 modulo the
// equalities} and the PSD cone, starting from a dual estimate.

}  // namespace

StrictFeasibility strict_feasibility(const SdpProblem& p, double margin,
                                     const SolverSettings& s) {
  constexpr double kCertificateTol = 1e-8;
  StrictFeasibility out;
  SdpProblem a;
  for (const auto& v : p.variables()) {
    switch (v.kind) {
      case VarKind::Scalar:
        a.add_scalar(v.name);
        break;
      case VarKind::Symmetric:
        a.add_symmetric(v.name, v.rows);
        break;
      case VarKind::Full:
        a.add_full(v.name, v.rows, v.cols);
        break;
    }
  }
  for (const auto& e : p.equalities()) a.add_equality(e);
  const int tid = a.add_scalar("t");
  const auto& blocks = p.psd_blocks();
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const int d = blocks[j].rows();
    a.add_psd(blocks[j] - AffineMatrix::Scaled(a.scalar(tid),
                                               Matrix::Identity(d, d)),
              p.psd_labels()[j]);
  }
  a.add_psd(AffineMatrix(Matrix::Identity(1, 1)) - a.var(tid), "t<=1");
  a.maximize(a.scalar(tid));
  const SolveResult r = solve(a, s);
  out.report = r.report;
  const bool usable =
      r.report.status == SolveStatus::Optimal ||
      (r.report.status == SolveStatus::Inaccurate &&
       verify_assignment(a, r.x, s.feas_tol).feasible);
  if (!usable || r.report.dual.size() != blocks.size() + 1) return out;
  out.margin = r.x(a.variables()[tid].offset);
  out.x = r.x.head(p.num_scalars());
  if (out.margin > margin) {
    out.verdict = Feasibility::Feasible;
    return out;
  }
  std::vector<Matrix> cert;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto [lam, v] = sym_eig(SymMatrix(r.report.dual[j]));
    cert.push_back(v * lam.cwiseMax(0.0).asDiagonal() * v.transpose());
  }
  out.certificate_residual = strict_certificate_residual(p, cert);
  if (out.certificate_residual > kCertificateTol) {
    const Residual res = [&p](const std::vector<Matrix>& b) {
      return strict_certificate_residual(p, b);
    };
    cert = polish_certificate(p, std::move(cert), res, kCertificateTol);
    out.certificate_residual = strict_certificate_residual(p, cert);
  }
  if (out.certificate_residual <= kCertificateTol) {
    out.verdict = Feasibility::Infeasible;
  }
  return out;
}

void dump_problem(const SdpProblem& p, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  for (const auto& v : p.variables()) {
    const char* kind = v.kind == VarKind::Scalar      ? "scalar"
                       : v.kind == VarKind::Symmetric ? "symmetric"
                                                      : "full";
    manifest["variables"].push_back({{"name", v.name},
                                     {"kind", kind},
                                     {"rows", v.rows},
                                     {"cols", v.cols},
                                     {"offset", v.offset},
                                     {"size", v.size}});
  }
  std::vector<double> obj(p.num_scalars(), 0.0);
  for (const auto& [i, c] : p.objective().terms()) obj[i] = c;
  manifest["objective"] = {{"maximize", obj},
                           {"constant", p.objective().constant()}};
  for (std::size_t j = 0; j < p.psd_blocks().size(); ++j) {
    const auto& blk = p.psd_blocks()[j];
    nlohmann::json entry;
    entry["label"] = p.psd_labels()[j];
    entry["dim"] = blk.rows();
    const std::string base = "block" + std::to_string(j);
    write_matrix_csv(dir / (base + "_F0.csv"), blk.constant());
    entry["constant"] = base + "_F0.csv";
    for (const auto& [i, m] : blk.terms()) {
      const std::string fn = base + "_F" + std::to_string(i + 1) + ".csv";
      write_matrix_csv(dir / fn, m);
      entry["terms"].push_back({{"index", i}, {"file", fn}});
    }
    manifest["psd"].push_back(entry);
  }
  for (const auto& e : p.equalities()) {
    nlohmann::json entry;
    entry["constant"] = e.constant();
    for (const auto& [i, c] : e.terms()) {
      entry["terms"].push_back({{"index", i}, {"coeff", c}});
    }
    manifest["equalities"].push_back(entry);
  }
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace nsynth
