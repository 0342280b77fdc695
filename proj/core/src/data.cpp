#include "nsynth/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nsynth {

void SystemPair::validate() const {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument("A must be square and non-empty");
  }
  if (b.rows() != a.rows() || b.cols() < 1) {
    throw std::invalid_argument("B must have as many rows as A");
  }
  if (!all_finite(a) || !all_finite(b)) {
    throw std::invalid_argument("system matrices must be finite");
  }
}

void DataSet::validate() const {
  if (u.cols() < 1) throw std::invalid_argument("trajectory needs T >= 1");
  if (x.cols() != u.cols() + 1) {
    throw std::invalid_argument("state trajectory must have T+1 columns");
  }
  if (!all_finite(x) || !all_finite(u)) {
    throw std::invalid_argument("trajectory must be finite");
  }
  if (w_true && (w_true->rows() != x.rows() || w_true->cols() != u.cols())) {
    throw std::invalid_argument("noise record has wrong dimensions");
  }
}

DataMatrices DataMatrices::prefix(int count) const {
  if (count < 1 || count > samples()) {
    throw std::invalid_argument("prefix length out of range");
  }
  return {x_plus.leftCols(count), x_minus.leftCols(count),
          u_minus.leftCols(count)};
}

DataSet simulate(const SystemPair& sys, const Vector& x0, const Matrix& u,
                 const Matrix& w) {
  sys.validate();
  const int n = sys.n(), t = static_cast<int>(u.cols());
  if (x0.size() != n || u.rows() != sys.m() || w.rows() != n ||
      w.cols() != t) {
    throw std::invalid_argument("simulate: dimension mismatch");
  }
  DataSet d;
  d.x.resize(n, t + 1);
  d.x.col(0) = x0;
  for (int k = 0; k < t; ++k) {
    d.x.col(k + 1) = sys.a * d.x.col(k) + sys.b * u.col(k) + w.col(k);
  }
  d.u = u;
  d.w_true = w;
  return d;
}

DataMatrices partition(const DataSet& d) {
  d.validate();
  const int t = d.samples();
  return {d.x.rightCols(t), d.x.leftCols(t), d.u};
}

DataMatrices stack(const std::vector<DataSet>& ds) {
  if (ds.empty()) throw std::invalid_argument("stack: no datasets");
  const int n = ds.front().n(), m = ds.front().m();
  int total = 0;
  for (const auto& d : ds) {
    if (d.n() != n || d.m() != m) {
      throw std::invalid_argument("stack: inconsistent dimensions");
    }
    total += d.samples();
  }
  DataMatrices out{Matrix(n, total), Matrix(n, total), Matrix(m, total)};
  int off = 0;
  for (const auto& d : ds) {
    const DataMatrices p = partition(d);
    const int t = p.samples();
    out.x_plus.middleCols(off, t) = p.x_plus;
    out.x_minus.middleCols(off, t) = p.x_minus;
    out.u_minus.middleCols(off, t) = p.u_minus;
    off += t;
  }
  return out;
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

double parse_cell(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (!blank(s.substr(used))) throw std::invalid_argument(s);
  return v;
}

}  // namespace

DataSet read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trajectory");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_cells(line);
  int n = 0, m = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string h = header[i];
    if (!h.empty() && h[0] == 'x') {
      ++n;
    } else if (!h.empty() && h[0] == 'u') {
      ++m;
    } else {
      throw std::runtime_error("bad trajectory header cell: " + h);
    }
  }
  if (header.empty() || header[0] != "t" || n < 1 || m < 1) {
    throw std::runtime_error("trajectory header must be t,x1..xn,u1..um");
  }
  std::vector<Vector> xs, us;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    auto cells = split_cells(line);
    cells.resize(1 + n + m);
    Vector x(n), u(m);
    bool has_u = true;
    try {
      for (int i = 0; i < n; ++i) x(i) = parse_cell(cells[1 + i]);
      for (int i = 0; i < m; ++i) {
        if (blank(cells[1 + n + i])) {
          has_u = false;
        } else {
          u(i) = parse_cell(cells[1 + n + i]);
        }
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("bad number in trajectory row: " + line);
    }
    xs.push_back(x);
    if (has_u) us.push_back(u);
  }
  if (xs.size() < 2) throw std::runtime_error("trajectory needs >= 2 rows");
  const int t = static_cast<int>(xs.size()) - 1;
  if (static_cast<int>(us.size()) < t) {
    throw std::runtime_error("missing inputs before the final row");
  }
  DataSet d;
  d.x.resize(n, t + 1);
  d.u.resize(m, t);
  for (int k = 0; k <= t; ++k) d.x.col(k) = xs[k];
  for (int k = 0; k < t; ++k) d.u.col(k) = us[k];
  d.validate();
  return d;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const DataSet& d) {
  d.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << 't';
  for (int i = 0; i < d.n(); ++i) out << ",x" << i + 1;
  for (int i = 0; i < d.m(); ++i) out << ",u" << i + 1;
  out << '\n';
  for (int k = 0; k <= d.samples(); ++k) {
    out << k;
    for (int i = 0; i < d.n(); ++i) out << ',' << d.x(i, k);
    for (int i = 0; i < d.m(); ++i) {
      out << ',';
      if (k < d.samples()) out << d.u(i, k);
    }
    out << '\n';
  }
}

Matrix gaussian_matrix(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = nd(rng);
  }
  return m;
}

Matrix uniform_ball_columns(Rng& rng, int n, int cols, double eps) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Matrix w(n, cols);
  for (int j = 0; j < cols; ++j) {
    Vector d(n);
    do {
      for (int i = 0; i < n; ++i) d(i) = nd(rng);
    } while (d.norm() == 0.0);
    const double r = std::sqrt(eps) * std::pow(ud(rng), 1.0 / n);
    w.col(j) = d.normalized() * r;
  }
  return w;
}

}  // namespace nsynth
