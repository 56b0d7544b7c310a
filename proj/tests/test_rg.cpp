#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "pdebias/io.hpp"
#include "pdebias/limit.hpp"
#include "pdebias/rg.hpp"
#include "pdebias/rng.hpp"

using namespace pdebias;

namespace {

constexpr double kPi = std::numbers::pi;

// d/dx of the mapped basis functions, for quadrature oracles.
double sine_deriv(const Domain& dom, int k, double x) {
  const double len = dom.length(0);
  const double t = (x - dom.axis(0).lo) / len;
  return k * kPi / len * std::cos(k * kPi * t);
}

double hat_deriv(const Domain& dom, int m, int k, double x) {
  const double h = dom.length(0) / (m + 1);
  const double xk = dom.axis(0).lo + k * h;
  if (x <= xk - h || x >= xk + h) return 0.0;
  return x < xk ? 1.0 / h : -1.0 / h;
}

}  // namespace

TEST_CASE("eval_basis matches the closed forms") {
  const Domain dom = Domain::interval(-1, 1);
  const BasisFamily sine = BasisFamily::sine1d(dom, 5);
  CHECK(eval_basis(sine, 1, pt(0.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_basis(sine, 1, pt(-1.0)) == 0.0);
  CHECK(eval_basis(sine, 3, pt(1.0)) == 0.0);

  const BasisFamily hat = BasisFamily::hat1d(dom, 7);
  for (int k = 1; k <= 7; ++k)
    for (int j = 1; j <= 7; ++j)
      CHECK(eval_basis(hat, k, pt(hat.node(0, j))) == (k == j ? 1.0 : 0.0));

  const BasisFamily tensor = BasisFamily::tensor_sine_2d(Domain::box(0, 1, 0, 1), 3, 3);
  CHECK(eval_basis(tensor, 1, pt(0.5, 0.5)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_basis(tensor, 5, pt(0.0, 0.3)) == 0.0);

  CHECK_THROWS(eval_basis(sine, 0, pt(0.0)));
  CHECK_THROWS(eval_basis(sine, 6, pt(0.0)));
}

TEST_CASE("sine1d stiffness diagonal matches the quadrature oracle") {
  const Domain dom = Domain::interval(-1, 1);
  const int m = 20;
  const auto sys = assemble_stiffness(BasisFamily::sine1d(dom, m));
  CHECK(sys.structure == MatrixStructure::Diagonal);
  for (int k = 1; k <= m; ++k) {
    const double closed = k * k * kPi * kPi / 4.0;
    CHECK(sys.matrix.coeff(k - 1, k - 1) == doctest::Approx(closed).epsilon(1e-15));
    const double quad = oracles::quad_gl(
        [&](double x) { return sine_deriv(dom, k, x) * sine_deriv(dom, k, x); }, -1.0,
        1.0, 4 * k + 8);
    CHECK(std::abs(closed - quad) <= 1e-12 * std::max(1.0, closed));
  }
  // off-diagonal entries vanish
  for (auto [k, j] : {std::pair{1, 2}, {2, 5}, {3, 7}}) {
    const double quad = oracles::quad_gl(
        [&](double x) { return sine_deriv(dom, k, x) * sine_deriv(dom, j, x); }, -1.0,
        1.0, 64);
    CHECK(std::abs(quad) <= 1e-12);
    CHECK(sys.matrix.coeff(k - 1, j - 1) == 0.0);
  }
}

TEST_CASE("hat1d stiffness is the expected tridiagonal matrix") {
  const auto sys = assemble_stiffness(BasisFamily::hat1d(Domain::interval(-1, 1), 3));
  CHECK(sys.structure == MatrixStructure::Tridiagonal);
  for (int j = 0; j < 3; ++j) CHECK(sys.matrix.coeff(j, j) == doctest::Approx(4.0));
  CHECK(sys.matrix.coeff(0, 1) == doctest::Approx(-2.0));
  CHECK(sys.matrix.coeff(2, 1) == doctest::Approx(-2.0));
  CHECK(sys.matrix.coeff(0, 2) == 0.0);

  // quadrature oracle for a non-unit interval
  const Domain dom = Domain::interval(0.0, 2.5);
  const int m = 4;
  const auto sys2 = assemble_stiffness(BasisFamily::hat1d(dom, m));
  for (int k = 1; k <= m; ++k)
    for (int j = k; j <= std::min(m, k + 1); ++j) {
      const double quad = oracles::quad_gl(
          [&](double x) { return hat_deriv(dom, m, k, x) * hat_deriv(dom, m, j, x); },
          0.0, 2.5, 1000);
      CHECK(sys2.matrix.coeff(k - 1, j - 1) == doctest::Approx(quad).epsilon(1e-9));
    }
}

TEST_CASE("tensor sine stiffness diagonal matches (p^2+q^2)/4 on the unit box") {
  const auto sys =
      assemble_stiffness(BasisFamily::tensor_sine_2d(Domain::box(0, 1, 0, 1), 4, 4));
  CHECK(sys.structure == MatrixStructure::Diagonal);
  const double d11 = sys.matrix.coeff(0, 0);
  CHECK(d11 == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-15));
  // (k,l) = (2,3) -> index (2-1)*4 + (3-1) = 6
  const double p = 2 * kPi, q = 3 * kPi;
  CHECK(sys.matrix.coeff(6, 6) == doctest::Approx((p * p + q * q) / 4.0).epsilon(1e-15));
}

TEST_CASE("bilinear FEM stiffness matches the 2D quadrature oracle") {
  const Domain dom = Domain::box(0, 1, 0, 1);
  const int m = 3;
  const BasisFamily basis = BasisFamily::bilinear_fem_2d(dom, m, m);
  const auto sys = assemble_stiffness(basis);
  CHECK(sys.structure == MatrixStructure::Banded);

  const double h = basis.spacing(0);
  auto hat = [&](int k, double x) {
    const double v = 1.0 - std::abs(x - k * h) / h;
    return v > 0.0 ? v : 0.0;
  };
  auto dhat = [&](int k, double x) {
    if (x <= (k - 1) * h || x >= (k + 1) * h) return 0.0;
    return x < k * h ? 1.0 / h : -1.0 / h;
  };
  // a(phi_{11}, phi_{11}) and a(phi_{11}, phi_{12}) by tensor quadrature
  auto entry = [&](int i1, int j1, int i2, int j2) {
    const double sx = oracles::quad_gl(
        [&](double x) { return dhat(i1, x) * dhat(i2, x); }, 0, 1, 600);
    const double mx = oracles::quad_gl(
        [&](double x) { return hat(i1, x) * hat(i2, x); }, 0, 1, 600);
    const double sy = oracles::quad_gl(
        [&](double y) { return dhat(j1, y) * dhat(j2, y); }, 0, 1, 600);
    const double my = oracles::quad_gl(
        [&](double y) { return hat(j1, y) * hat(j2, y); }, 0, 1, 600);
    return sx * my + mx * sy;
  };
  auto idx = [&](int i, int j) { return (i - 1) * m + (j - 1); };
  CHECK(sys.matrix.coeff(idx(1, 1), idx(1, 1)) ==
        doctest::Approx(entry(1, 1, 1, 1)).epsilon(1e-12));
  CHECK(sys.matrix.coeff(idx(1, 1), idx(1, 2)) ==
        doctest::Approx(entry(1, 1, 1, 2)).epsilon(1e-12));
  CHECK(sys.matrix.coeff(idx(1, 1), idx(2, 2)) ==
        doctest::Approx(entry(1, 1, 2, 2)).epsilon(1e-12));
  CHECK(sys.matrix.coeff(idx(2, 2), idx(3, 1)) ==
        doctest::Approx(entry(2, 2, 3, 1)).epsilon(1e-12));
}

TEST_CASE("assemble_rhs matches hand evaluations") {
  const Domain dom = Domain::interval(-1, 1);
  const auto one = [](const Point&) { return 1.0; };
  const auto s = make_sample_set(dom, {pt(0.0)}, one);
  const auto b = assemble_rhs(BasisFamily::sine1d(dom, 6), s);
  const double expect[6] = {1.0, 0.0, -1.0, 0.0, 1.0, 0.0};
  for (int j = 0; j < 6; ++j) CHECK(b[j] == doctest::Approx(expect[j]).epsilon(1e-14));

  const BasisFamily hat = BasisFamily::hat1d(dom, 3);  // nodes -0.5, 0, 0.5
  const auto s2 = make_sample_set(dom, {pt(-0.5), pt(0.5)}, one);
  const auto b2 = assemble_rhs(hat, s2);
  CHECK(b2[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b2[1] == 0.0);
  CHECK(b2[2] == doctest::Approx(0.5).epsilon(1e-15));

  const auto s3 = make_sample_set(dom, {pt(0.3), pt(-0.7)}, std::vector<double>{0, 0});
  for (double v : assemble_rhs(hat, s3)) CHECK(v == 0.0);
}

TEST_CASE("solve_rg matches the diagonal hand solve and handles zero data") {
  const Domain dom = Domain::interval(-1, 1);
  const auto one = [](const Point&) { return 1.0; };
  const auto s = make_sample_set(dom, {pt(0.0)}, one);
  const auto sol = solve_rg(BasisFamily::sine1d(dom, 1), s);
  CHECK(sol.coefficients[0] == doctest::Approx(4.0 / (kPi * kPi)).epsilon(1e-14));

  const auto zero = make_sample_set(dom, {pt(0.1), pt(-0.4)}, std::vector<double>{0, 0});
  for (double c : solve_rg(BasisFamily::sine1d(dom, 8), zero).coefficients)
    CHECK(c == 0.0);
}

TEST_CASE("hat FEM with samples at nodes reproduces the exact limit everywhere") {
  const Domain dom = Domain::interval(-1, 1);
  const auto samples = example1_samples();
  // m = 9 interior nodes at spacing 0.2 contain -0.8, -0.4, 0, 0.4, 0.8
  const auto sol = solve_rg(BasisFamily::hat1d(dom, 9), samples);
  const LimitSolution1D limit(samples);
  const auto grid = linspace(-1.0, 1.0, 1000);
  for (double x : grid)
    CHECK(eval_rg_at(sol, pt(x)) == doctest::Approx(limit.eval(x)).epsilon(1e-12));
}

TEST_CASE("eval_rg is exact on the boundary and linear in the coefficients") {
  const Domain dom = Domain::interval(-1, 1);
  RgSolution s{BasisFamily::sine1d(dom, 3), {1.0, -0.5, 2.0}};
  CHECK(eval_rg_at(s, pt(-1.0)) == 0.0);
  CHECK(eval_rg_at(s, pt(1.0)) == 0.0);

  RgSolution s1{BasisFamily::sine1d(dom, 1), {1.0}};
  CHECK(eval_rg_at(s1, pt(0.0)) == doctest::Approx(1.0).epsilon(1e-15));

  RgSolution a{BasisFamily::sine1d(dom, 3), {0.3, 0.1, -0.2}};
  RgSolution b{BasisFamily::sine1d(dom, 3), {-1.0, 0.7, 0.4}};
  RgSolution sum{BasisFamily::sine1d(dom, 3), {0.3 - 1.0, 0.1 + 0.7, -0.2 + 0.4}};
  for (double x : {-0.9, -0.3, 0.2, 0.77}) {
    CHECK(eval_rg_at(sum, pt(x)) ==
          doctest::Approx(eval_rg_at(a, pt(x)) + eval_rg_at(b, pt(x))).epsilon(1e-13));
  }

  const RgSolution t2{BasisFamily::tensor_sine_2d(Domain::box(0, 1, 0, 1), 3, 3),
                      std::vector<double>(9, 0.5)};
  CHECK(eval_rg_at(t2, pt(0.0, 0.4)) == 0.0);
  CHECK(eval_rg_at(t2, pt(1.0, 0.4)) == 0.0);
  const RgSolution f2{BasisFamily::bilinear_fem_2d(Domain::box(0, 1, 0, 1), 3, 3),
                      std::vector<double>(9, 0.5)};
  CHECK(eval_rg_at(f2, pt(0.3, 1.0)) == 0.0);
}

TEST_CASE("stiffness matrices are symmetric positive definite up to m = 200") {
  auto check_spd = [](const BasisFamily& basis) {
    const auto sys = assemble_stiffness(basis);
    Eigen::SparseMatrix<double> diff =
        Eigen::SparseMatrix<double>(sys.matrix.transpose()) - sys.matrix;
    CHECK(diff.norm() == 0.0);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(sys.matrix);
    CHECK(llt.info() == Eigen::Success);
  };
  const Domain d1 = Domain::interval(-1, 1);
  const Domain d2 = Domain::box(0, 1, 0, 1);
  for (int m : {1, 7, 64, 200}) {
    check_spd(BasisFamily::sine1d(d1, m));
    check_spd(BasisFamily::hat1d(d1, m));
  }
  for (int m : {1, 5, 14}) {
    check_spd(BasisFamily::tensor_sine_2d(d2, m, m));
    check_spd(BasisFamily::bilinear_fem_2d(d2, m, m));
  }
}

TEST_CASE("solutions are linear in the sample values") {
  CounterRng rng(5);
  const Domain dom = Domain::interval(-1, 1);
  auto pts = random_sample_points(6, dom, 17);
  std::vector<double> vals(6);
  for (auto& v : vals) v = rng.uniform(-2.0, 2.0);
  const double alpha = 3.7;
  std::vector<double> scaled(vals);
  for (auto& v : scaled) v *= alpha;

  for (const char* kind : {"sine", "hat"}) {
    const BasisFamily basis = kind[0] == 's' ? BasisFamily::sine1d(dom, 24)
                                             : BasisFamily::hat1d(dom, 24);
    const auto sol1 = solve_rg(basis, make_sample_set(dom, pts, vals));
    const auto sol2 = solve_rg(basis, make_sample_set(dom, pts, scaled));
    for (int k = 0; k < 24; ++k) {
      CHECK(sol2.coefficients[k] ==
            doctest::Approx(alpha * sol1.coefficients[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("tensor sine coefficients equal the Green series term by term") {
  const auto samples = example3_samples();
  const int m = 6;
  const auto sol =
      solve_rg(BasisFamily::tensor_sine_2d(samples.domain, m, m), samples);
  const GreenSeries2D series(samples, m, m);
  for (int i = 0; i < m * m; ++i) {
    CHECK(sol.coefficients[i] ==
          doctest::Approx(series.coefficients()[i]).epsilon(1e-12));
  }
}

TEST_CASE("sine1d L2 distance to the limit decreases with m") {
  const auto samples = example1_samples();
  const LimitSolution1D limit(samples);
  const auto grid = linspace(-1.0, 1.0, 8001);
  double prev = 1e300;
  for (int m : {5, 10, 50}) {
    const auto sol = solve_rg(BasisFamily::sine1d(samples.domain, m), samples);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double h = grid[i + 1] - grid[i];
      const double d0 = eval_rg_at(sol, pt(grid[i])) - limit.eval(grid[i]);
      const double d1 = eval_rg_at(sol, pt(grid[i + 1])) - limit.eval(grid[i + 1]);
      acc += 0.5 * h * (d0 * d0 + d1 * d1);
    }
    const double dist = std::sqrt(acc);
    CHECK(dist < prev);
    prev = dist;
  }
}

TEST_CASE("solution_json carries the basis descriptor") {
  RgSolution s{BasisFamily::sine1d(Domain::interval(-1, 1), 2), {1.0, 2.0}};
  const auto j = solution_json(s);
  CHECK(j.find("\"sine1d\"") != std::string::npos);
  CHECK(j.find("\"coefficients\"") != std::string::npos);
}
