#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "pdebias/domain.hpp"
#include "pdebias/experiment.hpp"
#include "pdebias/fprinciple.hpp"
#include "pdebias/io.hpp"
#include "pdebias/network.hpp"
#include "pdebias/rng.hpp"

using namespace pdebias;

namespace {
constexpr double kPi = std::numbers::pi;

SampleSet ten_point_set() { return example2_samples(2, 10); }
}  // namespace

TEST_CASE("nudft matches hand evaluations") {
  const Spectrum s1 = nudft({0.3, -0.4, 0.9}, {1.0, 1.0, 1.0}, {0.0});
  CHECK(s1.amp[0].real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s1.amp[0].imag() == doctest::Approx(0.0).epsilon(1e-15));

  const Spectrum s2 = nudft({0.0}, {2.5}, {0.0, 0.7, 3.1});
  for (const auto& a : s2.amp) {
    CHECK(a.real() == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(a.imag() == doctest::Approx(0.0).epsilon(1e-14));
  }

  const Spectrum s3 = nudft({0.25, -0.25}, {1.0, 1.0}, {1.0});
  CHECK(std::abs(s3.amp[0]) <= 1e-15);
}

TEST_CASE("nudft of real data is conjugate symmetric") {
  CounterRng rng(12);
  std::vector<double> x, v, freqs;
  for (int i = 0; i < 40; ++i) {
    x.push_back(rng.uniform(-1.0, 1.0));
    v.push_back(rng.normal());
  }
  for (int j = 1; j <= 16; ++j) freqs.push_back(0.5 * j);
  std::vector<double> sym;
  for (int j = 16; j >= 1; --j) sym.push_back(-0.5 * j);
  for (double f : freqs) sym.push_back(f);

  const Spectrum s = nudft(x, v, sym);
  const int n = 16;
  for (int j = 0; j < n; ++j) {
    const auto neg = s.amp[n - 1 - j];
    const auto pos = s.amp[n + j];
    CHECK(std::abs(neg - std::conj(pos)) <= 1e-12);
  }
}

TEST_CASE("gamma kernel matches the closed form") {
  const GammaKernel k1(1.0, 0.0, 1);
  CHECK(k1(2.0) == doctest::Approx(0.0625).epsilon(1e-15));
  const GammaKernel k2(0.0, 4.0 * kPi * kPi, 1);
  CHECK(k2(1.0) == doctest::Approx(4.0 * kPi * kPi).epsilon(1e-15));
  CHECK_THROWS(k1(0.0));
  CHECK_THROWS(GammaKernel(0.0, 0.0, 1));
  CHECK_THROWS(GammaKernel(-1.0, 0.5, 1));

  CounterRng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const GammaKernel k(rng.uniform01() + 1e-6, rng.uniform01(), trial % 2 + 1);
    const double xi = rng.uniform(0.01, 50.0);
    CHECK(k(2.0 * xi) < k(xi));
  }
}

TEST_CASE("gamma kernel coefficients derive from the network init") {
  const auto p = init_network(64, 1, Activation::Sin, 42, 1.0);
  const GammaKernel k = GammaKernel::from_network(p);
  double a = 0.0, b = 0.0;
  for (int j = 0; j < 64; ++j) {
    a += p.w[j][0] * p.w[j][0] + p.c[j] * p.c[j];
    b += p.w[j][0] * p.w[j][0] * p.c[j] * p.c[j];
  }
  CHECK(k.coef_a() == doctest::Approx(a / 64.0).epsilon(1e-14));
  CHECK(k.coef_b() == doctest::Approx(4.0 * kPi * kPi * b / 64.0).epsilon(1e-14));
  CHECK(k.exp_p() == 4.0);
  CHECK(k.exp_q() == 2.0);
}

TEST_CASE("padded frequency grid covers the domain with 25% padding") {
  const auto g = padded_freq_grid(Domain::interval(-1, 1), 1024);
  CHECK(g.period == doctest::Approx(2.5));
  CHECK(g.origin == doctest::Approx(-1.25));
  CHECK(g.modes == 511);
  CHECK_THROWS(padded_freq_grid(Domain::interval(-1, 1), 100));
  CHECK_THROWS(padded_freq_grid(Domain::interval(-1, 1), 32));
}

TEST_CASE("fp_norm_minimize returns zero for zero data") {
  const auto s = make_sample_set(Domain::interval(-1, 1), {pt(0.2)},
                                 std::vector<double>{0.0});
  const auto res = fp_norm_minimize(s, GammaKernel(1.0, 0.0, 1, 2.0, 2.0), 256);
  for (double v : res.values) CHECK(v == 0.0);
  CHECK(res.fp_norm == 0.0);
}

TEST_CASE("fp_norm_minimize satisfies the interpolation constraints") {
  const auto s = ten_point_set();
  const auto res = fp_norm_minimize(s, default_gamma_kernel(), 1024);
  double maxf = 0.0;
  for (double f : s.values) maxf = std::max(maxf, std::abs(f));
  const auto h = eval_spectrum(res.grid, res.spectrum, s.coords_1d());
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(std::abs(h[i] - s.values[i]) <= 1e-8 * maxf);
}

TEST_CASE("no feasible perturbation beats the minimizer's FP-norm") {
  const auto s = ten_point_set();
  const GammaKernel kernel = default_gamma_kernel();
  const int n_grid = 512;
  const auto res = fp_norm_minimize(s, kernel, n_grid);
  const auto gam = gamma_on_grid(kernel, res.grid);
  const auto xs = s.coords_1d();

  CounterRng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    // Random smooth spectrum, then subtract its kernel interpolant so the
    // perturbation vanishes at every sample point.
    std::vector<std::complex<double>> d(res.grid.modes + 1, {0.0, 0.0});
    for (int j = 0; j <= 24; ++j)
      d[j] = std::complex<double>(rng.normal(0.1), j == 0 ? 0.0 : rng.normal(0.1));
    std::vector<double> d_at(xs.size());
    {
      const auto vals = eval_spectrum(res.grid, d, xs);
      for (std::size_t i = 0; i < xs.size(); ++i) d_at[i] = vals[i];
    }
    const auto corr =
        fp_norm_minimize(make_sample_set(s.domain, s.points, d_at), gam, n_grid);
    std::vector<std::complex<double>> perturbed(res.spectrum);
    for (int j = 0; j <= res.grid.modes; ++j)
      perturbed[j] += d[j] - corr.spectrum[j];
    // feasibility check, then optimality
    const auto h = eval_spectrum(res.grid, perturbed, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
      CHECK(std::abs(h[i] - s.values[i]) <= 1e-7);
    CHECK(fp_norm(perturbed, gam) >= res.fp_norm - 1e-10 * std::max(1.0, res.fp_norm));
  }
}

TEST_CASE("xi^-2 minimizer approximates the periodic linear interpolant") {
  const auto s = ten_point_set();
  const auto res = fp_norm_minimize(s, GammaKernel(1.0, 0.0, 1, 2.0, 2.0), 1024);
  auto xs = s.coords_1d();
  auto ys = s.values;
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> sx, sy;
  for (auto i : order) {
    sx.push_back(xs[i]);
    sy.push_back(ys[i]);
  }
  const oracles::PeriodicLinearInterp pl(sx, sy, res.grid.origin, res.grid.period);
  double max_err = 0.0, max_ref = 0.0;
  for (std::size_t g = 0; g < res.x.size(); ++g) {
    max_err = std::max(max_err, std::abs(res.values[g] - pl.eval(res.x[g])));
    max_ref = std::max(max_ref, std::abs(pl.eval(res.x[g])));
  }
  CHECK(max_err / max_ref < 0.05);
}

TEST_CASE("xi^-4 minimizer approximates the periodic cubic spline") {
  const auto s = ten_point_set();
  const auto res = fp_norm_minimize(s, GammaKernel(1.0, 0.0, 1, 4.0, 4.0), 1024);
  auto xs = s.coords_1d();
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> sx, sy;
  for (auto i : order) {
    sx.push_back(xs[i]);
    sy.push_back(s.values[i]);
  }
  const oracles::PeriodicCubicSpline spline(sx, sy, res.grid.origin, res.grid.period);
  double max_err = 0.0, max_ref = 0.0;
  for (std::size_t g = 0; g < res.x.size(); ++g) {
    max_err = std::max(max_err, std::abs(res.values[g] - spline.eval(res.x[g])));
    max_ref = std::max(max_ref, std::abs(spline.eval(res.x[g])));
  }
  CHECK(max_err / max_ref < 0.05);
}

TEST_CASE("gradient flow fixes interpolating spectra and decreases residuals") {
  const auto s = example1_samples();
  const GammaKernel kernel = default_gamma_kernel();
  const auto grid = padded_freq_grid(s.domain, 512);

  SUBCASE("interpolating initialization is a fixed point") {
    const auto minres = fp_norm_minimize(s, kernel, 512);
    FlowConfig fc;
    fc.steps = 50;
    fc.record_stride = 0;
    const auto traj = simulate_gradient_flow(kernel, s, grid, fc, minres.spectrum);
    for (int j = 0; j <= grid.modes; ++j)
      CHECK(std::abs(traj.final_spectrum[j] - minres.spectrum[j]) <= 1e-12);
  }

  SUBCASE("residual sum of squares decreases monotonically from zero init") {
    FlowConfig fc;
    fc.steps = 5000;
    fc.record_stride = 1;
    const auto traj = simulate_gradient_flow(kernel, s, grid, fc);
    for (std::size_t i = 0; i + 1 < traj.records.size(); ++i) {
      if (traj.records[i].residual_rss < 1e-24) break;  // round-off floor
      CHECK(traj.records[i + 1].residual_rss <= traj.records[i].residual_rss);
    }
  }

  SUBCASE("low band halves its gap before the high band") {
    FlowConfig fc;
    fc.steps = 20000;
    fc.record_stride = 10;
    fc.residual_tol = 1e-12;
    const auto traj = simulate_gradient_flow(kernel, s, grid, fc);
    const auto& final = traj.final_spectrum;
    auto band_gap = [&](const std::vector<std::complex<double>>& amp, double lo,
                        double hi) {
      double acc = 0.0;
      for (int j = 1; j <= grid.modes; ++j) {
        const double xi = grid.xi(j);
        if (xi >= lo && xi < hi) acc += std::norm(amp[j] - final[j]);
      }
      return acc;
    };
    const double low0 = band_gap(traj.spectra.front(), 0.0, 2.0);
    const double high0 = band_gap(traj.spectra.front(), 2.0, 8.0);
    long low_pass = -1, high_pass = -1;
    for (std::size_t r = 0; r < traj.spectra.size(); ++r) {
      if (low_pass < 0 && band_gap(traj.spectra[r], 0.0, 2.0) <= 0.5 * low0)
        low_pass = traj.records[r].iteration;
      if (high_pass < 0 && band_gap(traj.spectra[r], 2.0, 8.0) <= 0.5 * high0)
        high_pass = traj.records[r].iteration;
    }
    REQUIRE(low_pass >= 0);
    REQUIRE(high_pass >= 0);
    CHECK(low_pass <= high_pass);
  }
}

TEST_CASE("flow rejects unstable steps and aborts on sustained growth") {
  const auto s = example1_samples();
  const GammaKernel kernel(0.0, 1.0, 1, 2.0, 2.0);
  const auto grid = padded_freq_grid(s.domain, 256);
  const auto gam = gamma_on_grid(kernel, grid);
  const double gmax = gam[1];

  FlowConfig fc;
  fc.dt = 2.1 / gmax;
  CHECK_THROWS(simulate_gradient_flow(kernel, s, grid, fc));

  // Passes the dt * Gamma_max precondition but exceeds the kernel-matrix
  // stability bound, so the residual grows until the abort triggers.
  fc.dt = 1.9 / gmax;
  fc.steps = 100000;
  fc.record_stride = 0;
  CHECK_THROWS_WITH_AS(simulate_gradient_flow(kernel, s, grid, fc),
                       doctest::Contains("100 consecutive steps"),
                       std::runtime_error);
}

TEST_CASE("flow long-time limit matches the FP-norm minimizer") {
  const auto s = example1_samples();
  const GammaKernel kernel = default_gamma_kernel();
  const auto grid = padded_freq_grid(s.domain, 1024);
  const auto minres = fp_norm_minimize(s, kernel, 1024);
  FlowConfig fc;
  fc.steps = 200000;
  fc.record_stride = 1000;
  fc.residual_tol = 1e-11;
  const auto traj = simulate_gradient_flow(kernel, s, grid, fc);
  const auto flow_vals = eval_spectrum(grid, traj.final_spectrum, minres.x);
  double gap = 0.0;
  for (std::size_t g = 0; g < minres.x.size(); ++g)
    gap = std::max(gap, std::abs(flow_vals[g] - minres.values[g]));
  CHECK(gap <= 1e-3);
}

TEST_CASE("dyadic bands and band_convergence bookkeeping") {
  const auto bands = dyadic_bands(0.5, 5);
  REQUIRE(bands.size() == 5);
  CHECK(bands[0].lo == 0.5);
  CHECK(bands[0].hi == 1.0);
  CHECK(bands[4].lo == 8.0);
  CHECK(bands[4].hi == 16.0);

  TrainingTrace trace;
  for (double x : linspace(-1, 1, 200)) trace.eval_grid.push_back(pt(x));
  std::vector<double> target(200);
  for (std::size_t i = 0; i < 200; ++i)
    target[i] = std::sin(2.0 * kPi * trace.eval_grid[i][0]);

  SUBCASE("snapshot equal to the target passes every band immediately") {
    trace.snapshot_iterations = {0, 10};
    trace.snapshot_values = {target, target};
    const auto rep = band_convergence(trace, target, bands, 0.5);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (rep.excluded[b]) continue;
      CHECK(rep.first_passage[b] == 0);
      for (double e : rep.relative_error[b]) CHECK(e == 0.0);
    }
  }

  SUBCASE("zero-energy bands are flagged and excluded") {
    trace.snapshot_iterations = {0};
    trace.snapshot_values = {std::vector<double>(200, 0.0)};
    const std::vector<double> zero_target(200, 0.0);
    const auto rep = band_convergence(trace, zero_target, bands, 0.5);
    for (std::size_t b = 0; b < bands.size(); ++b) CHECK(rep.excluded[b]);
  }

  SUBCASE("band validation") {
    std::vector<Band> bad = {{1.0, 1.0}};
    trace.snapshot_iterations = {0};
    trace.snapshot_values = {target};
    CHECK_THROWS(band_convergence(trace, target, bad, 0.5));
    std::vector<Band> overlap = {{0.5, 2.0}, {1.0, 4.0}};
    CHECK_THROWS(band_convergence(trace, target, overlap, 0.5));
  }
}

TEST_CASE("spectrum_csv lists xi, re, im, power") {
  const Spectrum s = nudft({0.0, 0.5}, {1.0, -1.0}, {0.5, 1.0});
  const auto csv = spectrum_csv(s);
  CHECK(csv.find("xi,re,im,power") != std::string::npos);
}

TEST_CASE("band reports export to JSON") {
  TrainingTrace trace;
  for (double x : linspace(-1, 1, 100)) trace.eval_grid.push_back(pt(x));
  std::vector<double> target(100);
  for (std::size_t i = 0; i < 100; ++i)
    target[i] = std::sin(kPi * trace.eval_grid[i][0]);
  trace.snapshot_iterations = {0};
  trace.snapshot_values = {std::vector<double>(100, 0.0)};
  const auto rep = band_convergence(trace, target, dyadic_bands(0.5, 3), 0.5);
  const auto j = band_report_json(rep);
  CHECK(j.find("first_passage") != std::string::npos);
  CHECK(j.find("relative_error") != std::string::npos);
}
