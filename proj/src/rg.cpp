#include "pdebias/rg.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "pdebias/io.hpp"

namespace pdebias {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::Sine1D: return "sine1d";
    case BasisKind::Hat1D: return "hat1d";
    case BasisKind::TensorSine2D: return "tensor_sine_2d";
    case BasisKind::BilinearFem2D: return "bilinear_fem_2d";
  }
  return "?";
}

BasisFamily::BasisFamily(BasisKind kind, const Domain& domain, int m1, int m2)
    : kind_(kind), domain_(domain), m1_(m1), m2_(m2) {
  if (m1 < 1 || m2 < 1) throw std::invalid_argument("basis needs m >= 1 per axis");
  const bool want2d = kind == BasisKind::TensorSine2D || kind == BasisKind::BilinearFem2D;
  if ((domain.dim() == 2) != want2d)
    throw std::invalid_argument("basis kind does not match domain dimension");
}

BasisFamily BasisFamily::sine1d(const Domain& domain, int m) {
  return BasisFamily(BasisKind::Sine1D, domain, m, 1);
}
BasisFamily BasisFamily::hat1d(const Domain& domain, int m) {
  return BasisFamily(BasisKind::Hat1D, domain, m, 1);
}
BasisFamily BasisFamily::tensor_sine_2d(const Domain& domain, int m1, int m2) {
  return BasisFamily(BasisKind::TensorSine2D, domain, m1, m2);
}
BasisFamily BasisFamily::bilinear_fem_2d(const Domain& domain, int m1, int m2) {
  return BasisFamily(BasisKind::BilinearFem2D, domain, m1, m2);
}

double BasisFamily::spacing(int axis) const {
  const int m = axis_count(axis);
  return domain_.length(axis) / (m + 1);
}

double BasisFamily::node(int axis, int j) const {
  return domain_.axis(axis).lo + j * spacing(axis);
}

namespace {

double sine_1d_value(double lo, double len, int k, double x) {
  const double t = (x - lo) / len;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return std::sin(k * kPi * t);
}

double hat_1d_value(double lo, double h, int k, double x) {
  const double xk = lo + k * h;
  const double v = 1.0 - std::abs(x - xk) / h;
  return v > 0.0 ? v : 0.0;
}

}  // namespace

double eval_basis(const BasisFamily& basis, int k, const Point& x) {
  if (k < 1 || k > basis.size())
    throw std::out_of_range("basis index " + std::to_string(k) + " out of range");
  const Domain& dom = basis.domain();
  if (!dom.inside_closed(x))
    throw std::invalid_argument("eval_basis: point outside the closed domain");
  for (int i = 0; i < dom.dim(); ++i)
    if (x[i] == dom.axis(i).lo || x[i] == dom.axis(i).hi) return 0.0;

  switch (basis.kind()) {
    case BasisKind::Sine1D:
      return sine_1d_value(dom.axis(0).lo, dom.length(0), k, x[0]);
    case BasisKind::Hat1D:
      return hat_1d_value(dom.axis(0).lo, basis.spacing(0), k, x[0]);
    case BasisKind::TensorSine2D: {
      const int m2 = basis.axis_count(1);
      const int k1 = (k - 1) / m2 + 1;
      const int k2 = (k - 1) % m2 + 1;
      return sine_1d_value(dom.axis(0).lo, dom.length(0), k1, x[0]) *
             sine_1d_value(dom.axis(1).lo, dom.length(1), k2, x[1]);
    }
    case BasisKind::BilinearFem2D: {
      const int m2 = basis.axis_count(1);
      const int k1 = (k - 1) / m2 + 1;
      const int k2 = (k - 1) % m2 + 1;
      return hat_1d_value(dom.axis(0).lo, basis.spacing(0), k1, x[0]) *
             hat_1d_value(dom.axis(1).lo, basis.spacing(1), k2, x[1]);
    }
  }
  return 0.0;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// 1D hat stiffness (2/h diagonal, -1/h off) and mass (2h/3, h/6) bands.
void hat_bands(int m, double h, std::vector<double>& sd, std::vector<double>& so,
               std::vector<double>& md, std::vector<double>& mo) {
  sd.assign(m, 2.0 / h);
  so.assign(m > 1 ? m - 1 : 0, -1.0 / h);
  md.assign(m, 2.0 * h / 3.0);
  mo.assign(m > 1 ? m - 1 : 0, h / 6.0);
}

}  // namespace

StiffnessSystem assemble_stiffness(const BasisFamily& basis) {
  const Domain& dom = basis.domain();
  const int m = basis.size();
  Eigen::SparseMatrix<double> A(m, m);
  Triplets trip;
  MatrixStructure structure = MatrixStructure::Dense;

  switch (basis.kind()) {
    case BasisKind::Sine1D: {
      const double len = dom.length(0);
      for (int k = 1; k <= m; ++k)
        trip.emplace_back(k - 1, k - 1, k * k * kPi * kPi / (2.0 * len));
      structure = MatrixStructure::Diagonal;
      break;
    }
    case BasisKind::Hat1D: {
      const double h = basis.spacing(0);
      for (int j = 0; j < m; ++j) {
        trip.emplace_back(j, j, 2.0 / h);
        if (j + 1 < m) {
          trip.emplace_back(j, j + 1, -1.0 / h);
          trip.emplace_back(j + 1, j, -1.0 / h);
        }
      }
      structure = MatrixStructure::Tridiagonal;
      break;
    }
    case BasisKind::TensorSine2D: {
      const int m1 = basis.axis_count(0), m2 = basis.axis_count(1);
      const double lx = dom.length(0), ly = dom.length(1);
      for (int k1 = 1; k1 <= m1; ++k1)
        for (int k2 = 1; k2 <= m2; ++k2) {
          const double p = k1 * kPi / lx;
          const double q = k2 * kPi / ly;
          const int idx = (k1 - 1) * m2 + (k2 - 1);
          trip.emplace_back(idx, idx, (p * p + q * q) * lx * ly / 4.0);
        }
      structure = MatrixStructure::Diagonal;
      break;
    }
    case BasisKind::BilinearFem2D: {
      const int m1 = basis.axis_count(0), m2 = basis.axis_count(1);
      std::vector<double> sd1, so1, md1, mo1, sd2, so2, md2, mo2;
      hat_bands(m1, basis.spacing(0), sd1, so1, md1, mo1);
      hat_bands(m2, basis.spacing(1), sd2, so2, md2, mo2);
      auto band = [](const std::vector<double>& d, const std::vector<double>& o, int i,
                     int j) {
        if (i == j) return d[i];
        if (std::abs(i - j) == 1) return o[std::min(i, j)];
        return 0.0;
      };
      // a(phi_{i j}, phi_{i' j'}) = S1[i,i'] M2[j,j'] + M1[i,i'] S2[j,j']
      for (int i = 0; i < m1; ++i)
        for (int ip = std::max(0, i - 1); ip <= std::min(m1 - 1, i + 1); ++ip)
          for (int j = 0; j < m2; ++j)
            for (int jp = std::max(0, j - 1); jp <= std::min(m2 - 1, j + 1); ++jp) {
              const double v = band(sd1, so1, i, ip) * band(md2, mo2, j, jp) +
                               band(md1, mo1, i, ip) * band(sd2, so2, j, jp);
              trip.emplace_back(i * m2 + j, ip * m2 + jp, v);
            }
      structure = MatrixStructure::Banded;
      break;
    }
  }
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return StiffnessSystem{structure, std::move(A), {}};
}

std::vector<double> assemble_rhs(const BasisFamily& basis, const SampleSet& samples) {
  if (!(samples.domain == basis.domain()))
    throw std::invalid_argument("assemble_rhs: sample domain does not match basis");
  const int m = basis.size();
  std::vector<double> b(m, 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double wf = samples.weights[i] * samples.values[i];
    if (wf == 0.0) continue;
    for (int k = 1; k <= m; ++k)
      b[k - 1] += wf * eval_basis(basis, k, samples.points[i]);
  }
  return b;
}

namespace {

std::vector<double> solve_tridiagonal(const Eigen::SparseMatrix<double>& A,
                                      const std::vector<double>& rhs) {
  const int m = static_cast<int>(rhs.size());
  std::vector<double> d(m), e(m > 1 ? m - 1 : 0);
  for (int j = 0; j < m; ++j) d[j] = A.coeff(j, j);
  for (int j = 0; j + 1 < m; ++j) e[j] = A.coeff(j, j + 1);
  // Symmetric elimination; positive pivots certify SPD.
  std::vector<double> diag(d), sol(rhs);
  for (int j = 1; j < m; ++j) {
    if (diag[j - 1] <= 0.0) throw std::runtime_error("tridiagonal solve: matrix not SPD");
    const double l = e[j - 1] / diag[j - 1];
    diag[j] -= l * e[j - 1];
    sol[j] -= l * sol[j - 1];
  }
  if (diag[m - 1] <= 0.0) throw std::runtime_error("tridiagonal solve: matrix not SPD");
  sol[m - 1] /= diag[m - 1];
  for (int j = m - 2; j >= 0; --j) sol[j] = (sol[j] - e[j] * sol[j + 1]) / diag[j];
  return sol;
}

}  // namespace

std::vector<double> solve_system(const StiffnessSystem& system) {
  const int m = static_cast<int>(system.rhs.size());
  if (system.matrix.rows() != m || system.matrix.cols() != m)
    throw std::invalid_argument("solve_system: matrix/rhs size mismatch");
  std::vector<double> c(m, 0.0);

  switch (system.structure) {
    case MatrixStructure::Diagonal: {
      for (int j = 0; j < m; ++j) {
        const double d = system.matrix.coeff(j, j);
        if (d <= 0.0) throw std::runtime_error("diagonal solve: matrix not SPD");
        c[j] = system.rhs[j] / d;
      }
      break;
    }
    case MatrixStructure::Tridiagonal:
      c = solve_tridiagonal(system.matrix, system.rhs);
      break;
    case MatrixStructure::Banded: {
      Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(system.matrix);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("sparse Cholesky failed: matrix not SPD");
      Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(system.rhs.data(), m);
      Eigen::VectorXd x = llt.solve(b);
      for (int j = 0; j < m; ++j) c[j] = x[j];
      break;
    }
    case MatrixStructure::Dense: {
      Eigen::MatrixXd A(system.matrix);
      Eigen::LLT<Eigen::MatrixXd> llt(A);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("dense Cholesky failed: matrix not SPD");
      Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(system.rhs.data(), m);
      Eigen::VectorXd x = llt.solve(b);
      for (int j = 0; j < m; ++j) c[j] = x[j];
      break;
    }
  }

  // Residual gate: a violation signals an assembly or dispatch bug.
  Eigen::VectorXd cv = Eigen::Map<const Eigen::VectorXd>(c.data(), m);
  Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(system.rhs.data(), m);
  const double res = (system.matrix * cv - bv).lpNorm<Eigen::Infinity>();
  const double scale = bv.lpNorm<Eigen::Infinity>();
  if (res > 1e-10 * scale && res > 0.0)
    throw std::runtime_error("linear solve residual " + fmt17(res) +
                             " exceeds 1e-10 * ||b||");
  return c;
}

RgSolution solve_rg(const BasisFamily& basis, const SampleSet& samples) {
  StiffnessSystem system = assemble_stiffness(basis);
  system.rhs = assemble_rhs(basis, samples);
  return RgSolution{basis, solve_system(system)};
}

namespace {

double eval_sine1d(const RgSolution& s, double x) {
  const Domain& dom = s.basis.domain();
  const double t = (x - dom.axis(0).lo) / dom.length(0);
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double u = 0.0;
  const int m = s.basis.size();
  for (int k = 1; k <= m; ++k) u += s.coefficients[k - 1] * std::sin(k * kPi * t);
  return u;
}

double eval_hat1d(const RgSolution& s, double x) {
  const Domain& dom = s.basis.domain();
  const double lo = dom.axis(0).lo;
  const int m = s.basis.size();
  const double h = s.basis.spacing(0);
  if (x <= lo || x >= dom.axis(0).hi) return 0.0;
  int cell = static_cast<int>((x - lo) / h);  // nodes cell, cell+1 bracket x
  if (cell > m) cell = m;
  const double frac = (x - lo - cell * h) / h;
  const double cl = cell >= 1 && cell <= m ? s.coefficients[cell - 1] : 0.0;
  const double cr = cell + 1 >= 1 && cell + 1 <= m ? s.coefficients[cell] : 0.0;
  return cl * (1.0 - frac) + cr * frac;
}

double eval_tensor_sine(const RgSolution& s, const Point& p,
                        std::vector<double>& sx, std::vector<double>& sy) {
  const Domain& dom = s.basis.domain();
  const double tx = (p[0] - dom.axis(0).lo) / dom.length(0);
  const double ty = (p[1] - dom.axis(1).lo) / dom.length(1);
  if (tx <= 0.0 || tx >= 1.0 || ty <= 0.0 || ty >= 1.0) return 0.0;
  const int m1 = s.basis.axis_count(0), m2 = s.basis.axis_count(1);
  sx.resize(m1);
  sy.resize(m2);
  for (int k = 1; k <= m1; ++k) sx[k - 1] = std::sin(k * kPi * tx);
  for (int l = 1; l <= m2; ++l) sy[l - 1] = std::sin(l * kPi * ty);
  double u = 0.0;
  for (int k = 0; k < m1; ++k) {
    const double* row = s.coefficients.data() + static_cast<std::size_t>(k) * m2;
    double acc = 0.0;
    for (int l = 0; l < m2; ++l) acc += row[l] * sy[l];
    u += sx[k] * acc;
  }
  return u;
}

double eval_bilinear(const RgSolution& s, const Point& p) {
  const Domain& dom = s.basis.domain();
  for (int i = 0; i < 2; ++i)
    if (p[i] <= dom.axis(i).lo || p[i] >= dom.axis(i).hi) return 0.0;
  const int m1 = s.basis.axis_count(0), m2 = s.basis.axis_count(1);
  const double hx = s.basis.spacing(0), hy = s.basis.spacing(1);
  int cx = static_cast<int>((p[0] - dom.axis(0).lo) / hx);
  int cy = static_cast<int>((p[1] - dom.axis(1).lo) / hy);
  if (cx > m1) cx = m1;
  if (cy > m2) cy = m2;
  const double fx = (p[0] - dom.axis(0).lo - cx * hx) / hx;
  const double fy = (p[1] - dom.axis(1).lo - cy * hy) / hy;
  auto coeff = [&](int i, int j) {
    if (i < 1 || i > m1 || j < 1 || j > m2) return 0.0;
    return s.coefficients[static_cast<std::size_t>(i - 1) * m2 + (j - 1)];
  };
  return coeff(cx, cy) * (1 - fx) * (1 - fy) + coeff(cx + 1, cy) * fx * (1 - fy) +
         coeff(cx, cy + 1) * (1 - fx) * fy + coeff(cx + 1, cy + 1) * fx * fy;
}

}  // namespace

double eval_rg_at(const RgSolution& solution, const Point& x) {
  if (!solution.basis.domain().inside_closed(x))
    throw std::invalid_argument("eval_rg: point outside the closed domain");
  std::vector<double> sx, sy;
  switch (solution.basis.kind()) {
    case BasisKind::Sine1D: return eval_sine1d(solution, x[0]);
    case BasisKind::Hat1D: return eval_hat1d(solution, x[0]);
    case BasisKind::TensorSine2D: return eval_tensor_sine(solution, x, sx, sy);
    case BasisKind::BilinearFem2D: return eval_bilinear(solution, x);
  }
  return 0.0;
}

std::vector<double> eval_rg(const RgSolution& solution, const std::vector<Point>& grid) {
  std::vector<double> out(grid.size());
  std::vector<double> sx, sy;
  const Domain& dom = solution.basis.domain();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point& p = grid[i];
    if (!dom.inside_closed(p))
      throw std::invalid_argument("eval_rg: grid point outside the closed domain");
    switch (solution.basis.kind()) {
      case BasisKind::Sine1D: out[i] = eval_sine1d(solution, p[0]); break;
      case BasisKind::Hat1D: out[i] = eval_hat1d(solution, p[0]); break;
      case BasisKind::TensorSine2D: out[i] = eval_tensor_sine(solution, p, sx, sy); break;
      case BasisKind::BilinearFem2D: out[i] = eval_bilinear(solution, p); break;
    }
  }
  return out;
}

std::string solution_json(const RgSolution& solution) {
  nlohmann::json j;
  j["kind"] = "rg";
  j["basis"]["kind"] = to_string(solution.basis.kind());
  j["basis"]["m"] = solution.basis.size();
  j["basis"]["m1"] = solution.basis.axis_count(0);
  j["basis"]["m2"] = solution.basis.axis_count(1);
  const Domain& dom = solution.basis.domain();
  j["basis"]["domain"]["dim"] = dom.dim();
  for (int i = 0; i < dom.dim(); ++i) {
    j["basis"]["domain"]["bounds"].push_back(dom.axis(i).lo);
    j["basis"]["domain"]["bounds"].push_back(dom.axis(i).hi);
  }
  j["coefficients"] = solution.coefficients;
  return j.dump(2);
}

}  // namespace pdebias
