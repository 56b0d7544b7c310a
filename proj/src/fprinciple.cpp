#include "pdebias/fprinciple.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pdebias/io.hpp"

namespace pdebias {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Spectrum nudft(const std::vector<double>& points, const std::vector<double>& values,
               const std::vector<double>& freqs) {
  if (points.size() != values.size())
    throw std::invalid_argument("nudft: |points| != |values|");
  const double inv_n = 1.0 / static_cast<double>(points.size());
  Spectrum s;
  s.xi = freqs;
  s.amp.resize(freqs.size());
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    double re = 0.0, im = 0.0;
    const double w = -kTwoPi * freqs[j];
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double phase = w * points[i];
      re += values[i] * std::cos(phase);
      im += values[i] * std::sin(phase);
    }
    s.amp[j] = std::complex<double>(re * inv_n, im * inv_n);
  }
  return s;
}

Spectrum2D nudft_2d(const std::vector<Point>& points, const std::vector<double>& values,
                    const std::vector<Point>& freqs) {
  if (points.size() != values.size())
    throw std::invalid_argument("nudft_2d: |points| != |values|");
  const double inv_n = 1.0 / static_cast<double>(points.size());
  Spectrum2D s;
  s.xi = freqs;
  s.amp.resize(freqs.size());
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double phase =
          -kTwoPi * (freqs[j][0] * points[i][0] + freqs[j][1] * points[i][1]);
      re += values[i] * std::cos(phase);
      im += values[i] * std::sin(phase);
    }
    s.amp[j] = std::complex<double>(re * inv_n, im * inv_n);
  }
  return s;
}

GammaKernel::GammaKernel(double coef_a, double coef_b, int dim)
    : GammaKernel(coef_a, coef_b, dim, dim + 3.0, dim + 1.0) {}

GammaKernel::GammaKernel(double coef_a, double coef_b, int dim, double p, double q)
    : a_(coef_a), b_(coef_b), dim_(dim), p_(p), q_(q) {
  if (a_ < 0.0 || b_ < 0.0 || (a_ == 0.0 && b_ == 0.0))
    throw std::invalid_argument("GammaKernel: A, B must be >= 0 and not both 0");
  if (dim != 1 && dim != 2) throw std::invalid_argument("GammaKernel: dim must be 1 or 2");
  if (p_ <= 0.0 || q_ <= 0.0)
    throw std::invalid_argument("GammaKernel: exponents must be positive");
}

GammaKernel GammaKernel::from_network(const NetworkParams& init) {
  double a = 0.0, b = 0.0;
  for (int k = 0; k < init.width; ++k) {
    const double nw2 = init.w[k][0] * init.w[k][0] + init.w[k][1] * init.w[k][1];
    const double c2 = init.c[k] * init.c[k];
    a += nw2 + c2;
    b += nw2 * c2;
  }
  const double inv_m = 1.0 / static_cast<double>(init.width);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return GammaKernel(a * inv_m, 4.0 * pi2 * b * inv_m, init.dim);
}

double GammaKernel::operator()(double xi_norm) const {
  if (!(xi_norm > 0.0))
    throw std::invalid_argument("Gamma is undefined at xi = 0");
  return a_ / std::pow(xi_norm, p_) + b_ / std::pow(xi_norm, q_);
}

double gamma_value(const GammaKernel& kernel, double xi_norm) {
  return kernel(xi_norm);
}

PeriodicFreqGrid padded_freq_grid(const Domain& domain, int n_grid) {
  if (domain.dim() != 1)
    throw std::invalid_argument("padded_freq_grid: 1D domains only");
  if (n_grid < 64 || (n_grid & (n_grid - 1)) != 0)
    throw std::invalid_argument("padded_freq_grid: n_grid must be a power of two >= 64");
  const double len = domain.length(0);
  PeriodicFreqGrid g;
  g.period = 1.25 * len;
  g.origin = domain.axis(0).lo - 0.125 * len;
  g.modes = n_grid / 2 - 1;
  return g;
}

std::vector<double> gamma_on_grid(const GammaKernel& kernel,
                                  const PeriodicFreqGrid& grid) {
  std::vector<double> g(grid.modes + 1);
  for (int j = 1; j <= grid.modes; ++j) g[j] = kernel(grid.xi(j));
  g[0] = g.size() > 1 ? g[1] : 0.0;  // zero mode carries Gamma(xi_min)
  return g;
}

std::vector<double> eval_spectrum(const PeriodicFreqGrid& grid,
                                  const std::vector<std::complex<double>>& amp,
                                  const std::vector<double>& x) {
  if (static_cast<int>(amp.size()) != grid.modes + 1)
    throw std::invalid_argument("eval_spectrum: spectrum size does not match grid");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = amp[0].real();
    for (int j = 1; j <= grid.modes; ++j) {
      const double phase = kTwoPi * grid.xi(j) * x[i];
      v += 2.0 * (amp[j].real() * std::cos(phase) - amp[j].imag() * std::sin(phase));
    }
    out[i] = v;
  }
  return out;
}

namespace {

// K(y) = g0 + 2 sum_j Gamma_j cos(2 pi xi_j y), the inverse transform of
// Gamma on the grid modes.
double kernel_at(const std::vector<double>& gam, const PeriodicFreqGrid& grid,
                 double y) {
  double v = gam[0];
  for (int j = 1; j <= grid.modes; ++j)
    v += 2.0 * gam[j] * std::cos(kTwoPi * grid.xi(j) * y);
  return v;
}

FpMinResult fp_minimize_impl(const SampleSet& samples,
                             const std::vector<double>& gam, int n_grid,
                             const PeriodicFreqGrid& grid) {
  if (samples.domain.dim() != 1)
    throw std::invalid_argument("fp_norm_minimize: 1D sample sets only");
  const std::size_t n = samples.size();
  const auto xs = samples.coords_1d();

  Eigen::MatrixXd K(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = kernel_at(gam, grid, xs[i] - xs[j]);
      K(i, j) = v;
      K(j, i) = v;
    }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::runtime_error(
        "fp_norm_minimize: singular interpolation matrix (duplicate points?)");
  Eigen::VectorXd f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = samples.values[i];
  Eigen::VectorXd lam = ldlt.solve(f);

  FpMinResult res;
  res.grid = grid;
  res.lambda.assign(lam.data(), lam.data() + n);

  // Spectrum of the minimizer: a_j = Gamma_j sum_i lambda_i e^{-2 pi i xi_j x_i}.
  res.spectrum.resize(grid.modes + 1);
  for (int j = 0; j <= grid.modes; ++j) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = -kTwoPi * grid.xi(j) * xs[i];
      re += lam[i] * std::cos(phase);
      im += lam[i] * std::sin(phase);
    }
    res.spectrum[j] = gam[j] * std::complex<double>(re, im);
  }

  res.x.resize(n_grid);
  for (int g = 0; g < n_grid; ++g)
    res.x[g] = grid.origin + g * grid.period / n_grid;
  res.values = eval_spectrum(grid, res.spectrum, res.x);
  res.fp_norm = fp_norm(res.spectrum, gam);
  return res;
}

}  // namespace

double fp_norm(const std::vector<std::complex<double>>& amp,
               const std::vector<double>& gamma_values) {
  if (amp.size() != gamma_values.size())
    throw std::invalid_argument("fp_norm: size mismatch");
  double acc = std::norm(amp[0]) / gamma_values[0];
  for (std::size_t j = 1; j < amp.size(); ++j)
    acc += 2.0 * std::norm(amp[j]) / gamma_values[j];
  return acc;
}

FpMinResult fp_norm_minimize(const SampleSet& samples, const GammaKernel& kernel,
                             int n_grid) {
  const PeriodicFreqGrid grid = padded_freq_grid(samples.domain, n_grid);
  return fp_minimize_impl(samples, gamma_on_grid(kernel, grid), n_grid, grid);
}

FpMinResult fp_norm_minimize(const SampleSet& samples,
                             const std::vector<double>& gamma_values, int n_grid) {
  const PeriodicFreqGrid grid = padded_freq_grid(samples.domain, n_grid);
  if (static_cast<int>(gamma_values.size()) != grid.modes + 1)
    throw std::invalid_argument("fp_norm_minimize: gamma grid size must be modes + 1");
  for (double g : gamma_values)
    if (!(g > 0.0))
      throw std::invalid_argument("fp_norm_minimize: gamma values must be positive");
  return fp_minimize_impl(samples, gamma_values, n_grid, grid);
}

double default_flow_dt(const GammaKernel& kernel, const PeriodicFreqGrid& grid) {
  const auto gam = gamma_on_grid(kernel, grid);
  return 1.0 / kernel_at(gam, grid, 0.0);
}

FlowTrajectory simulate_gradient_flow(const GammaKernel& kernel,
                                      const SampleSet& samples,
                                      const PeriodicFreqGrid& grid,
                                      const FlowConfig& cfg,
                                      std::vector<std::complex<double>> initial) {
  if (samples.domain.dim() != 1)
    throw std::invalid_argument("simulate_gradient_flow: 1D sample sets only");
  const auto gam = gamma_on_grid(kernel, grid);
  const double dt = cfg.dt > 0.0 ? cfg.dt : default_flow_dt(kernel, grid);
  const double gamma_max = *std::max_element(gam.begin(), gam.end());
  if (!(dt * gamma_max < 2.0))
    throw std::invalid_argument("simulate_gradient_flow: dt * Gamma_max must be < 2");

  const std::size_t n = samples.size();
  const auto xs = samples.coords_1d();
  const int modes = grid.modes;

  std::vector<std::complex<double>> amp = std::move(initial);
  if (amp.empty()) amp.assign(modes + 1, {0.0, 0.0});
  if (static_cast<int>(amp.size()) != modes + 1)
    throw std::invalid_argument("simulate_gradient_flow: initial spectrum size");

  // Phase tables e^{+-2 pi i xi_j x_i}.
  std::vector<double> cos_tab(n * (modes + 1)), sin_tab(n * (modes + 1));
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j <= modes; ++j) {
      const double phase = kTwoPi * grid.xi(j) * xs[i];
      cos_tab[i * (modes + 1) + j] = std::cos(phase);
      sin_tab[i * (modes + 1) + j] = std::sin(phase);
    }

  FlowTrajectory traj;
  traj.grid = grid;
  std::vector<double> resid(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  int growth_run = 0;
  double prev_rss = std::numeric_limits<double>::infinity();

  long it = 0;
  for (; it < cfg.steps; ++it) {
    // h(x_i) from the truncated spectrum.
    double rss = 0.0, rmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* ct = cos_tab.data() + i * (modes + 1);
      const double* st = sin_tab.data() + i * (modes + 1);
      double h = amp[0].real();
      for (int j = 1; j <= modes; ++j)
        h += 2.0 * (amp[j].real() * ct[j] - amp[j].imag() * st[j]);
      resid[i] = h - samples.values[i];
      rss += resid[i] * resid[i];
      rmax = std::max(rmax, std::abs(resid[i]));
    }

    if (cfg.record_stride > 0 && it % cfg.record_stride == 0) {
      traj.records.push_back({it, rss, rmax});
      traj.spectra.push_back(amp);
    }
    if (cfg.residual_tol > 0.0 && rmax <= cfg.residual_tol) break;

    if (rss > prev_rss) {
      if (++growth_run >= 100)
        throw std::runtime_error(
            "simulate_gradient_flow: residual grew for 100 consecutive steps "
            "(iteration " +
            std::to_string(it) + ", rss " + fmt17(rss) + "); reduce dt");
    } else {
      growth_run = 0;
    }
    prev_rss = rss;

    // F[(h-f)rho](xi_j) = (1/n) sum_i r_i e^{-2 pi i xi_j x_i}.
    for (int j = 0; j <= modes; ++j) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        re += resid[i] * cos_tab[i * (modes + 1) + j];
        im -= resid[i] * sin_tab[i * (modes + 1) + j];
      }
      amp[j] -= dt * gam[j] * std::complex<double>(re * inv_n, im * inv_n);
    }
  }

  traj.iterations_run = it;
  traj.final_spectrum = std::move(amp);
  if (traj.records.empty() || traj.records.back().iteration != it) {
    double rss = 0.0, rmax = 0.0;
    const auto h = eval_spectrum(grid, traj.final_spectrum, xs);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = h[i] - samples.values[i];
      rss += r * r;
      rmax = std::max(rmax, std::abs(r));
    }
    traj.records.push_back({it, rss, rmax});
    traj.spectra.push_back(traj.final_spectrum);
  }
  return traj;
}

std::vector<Band> dyadic_bands(double xi0, int count) {
  std::vector<Band> bands;
  double lo = xi0;
  for (int i = 0; i < count; ++i) {
    bands.push_back({lo, 2.0 * lo});
    lo *= 2.0;
  }
  return bands;
}

BandReport band_convergence(const TrainingTrace& trace,
                            const std::vector<double>& target,
                            const std::vector<Band>& bands, double threshold) {
  if (trace.eval_grid.empty() || trace.snapshot_values.empty())
    throw std::invalid_argument("band_convergence: trace has no grid snapshots");
  if (target.size() != trace.eval_grid.size())
    throw std::invalid_argument("band_convergence: target size does not match grid");
  for (std::size_t b = 0; b < bands.size(); ++b) {
    if (!(bands[b].lo < bands[b].hi))
      throw std::invalid_argument("band_convergence: empty band");
    if (b + 1 < bands.size() && bands[b].hi > bands[b + 1].lo)
      throw std::invalid_argument("band_convergence: bands overlap or are unordered");
  }

  std::vector<double> gx(trace.eval_grid.size());
  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = trace.eval_grid[i][0];
  const double span = *std::max_element(gx.begin(), gx.end()) -
                      *std::min_element(gx.begin(), gx.end());
  const double dxi = 1.0 / span;

  // Frequency grid at the trace's natural resolution, covering all bands.
  std::vector<double> freqs;
  const double xi_max = bands.back().hi;
  for (double xi = dxi; xi < xi_max + 0.5 * dxi; xi += dxi) freqs.push_back(xi);

  std::vector<std::vector<std::size_t>> members(bands.size());
  for (std::size_t j = 0; j < freqs.size(); ++j)
    for (std::size_t b = 0; b < bands.size(); ++b)
      if (freqs[j] >= bands[b].lo && freqs[j] < bands[b].hi) members[b].push_back(j);

  const Spectrum target_spec = nudft(gx, target, freqs);
  std::vector<double> target_energy(bands.size(), 0.0);
  for (std::size_t b = 0; b < bands.size(); ++b)
    for (auto j : members[b]) target_energy[b] += std::norm(target_spec.amp[j]);

  BandReport report;
  report.bands = bands;
  report.threshold = threshold;
  report.snapshot_iterations = trace.snapshot_iterations;
  report.excluded.resize(bands.size());
  for (std::size_t b = 0; b < bands.size(); ++b)
    report.excluded[b] = members[b].empty() || target_energy[b] <= 0.0;
  report.relative_error.assign(bands.size(), {});
  report.first_passage.assign(bands.size(), -1);

  std::vector<double> diff(target.size());
  for (std::size_t s = 0; s < trace.snapshot_values.size(); ++s) {
    for (std::size_t i = 0; i < target.size(); ++i)
      diff[i] = trace.snapshot_values[s][i] - target[i];
    const Spectrum ds = nudft(gx, diff, freqs);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (report.excluded[b]) continue;
      double e = 0.0;
      for (auto j : members[b]) e += std::norm(ds.amp[j]);
      const double rel = e / target_energy[b];
      report.relative_error[b].push_back(rel);
      if (report.first_passage[b] < 0 && rel < threshold)
        report.first_passage[b] = trace.snapshot_iterations[s];
    }
  }
  return report;
}

std::string spectrum_json(const Spectrum& s) {
  nlohmann::json j;
  j["xi"] = s.xi;
  for (const auto& a : s.amp) {
    j["re"].push_back(a.real());
    j["im"].push_back(a.imag());
    j["power"].push_back(std::norm(a));
  }
  return j.dump(2);
}

std::string band_report_json(const BandReport& report) {
  nlohmann::json j;
  for (const auto& b : report.bands) j["bands"].push_back({b.lo, b.hi});
  j["threshold"] = report.threshold;
  j["excluded"] = std::vector<int>(report.excluded.begin(), report.excluded.end());
  j["snapshot_iterations"] = report.snapshot_iterations;
  j["relative_error"] = report.relative_error;
  j["first_passage"] = report.first_passage;
  return j.dump(2);
}

std::string spectrum_csv(const Spectrum& s) {
  std::ostringstream out;
  out << "xi,re,im,power\n";
  for (std::size_t j = 0; j < s.xi.size(); ++j)
    out << fmt17(s.xi[j]) << ',' << fmt17(s.amp[j].real()) << ','
        << fmt17(s.amp[j].imag()) << ',' << fmt17(std::norm(s.amp[j])) << '\n';
  return out.str();
}

}  // namespace pdebias
