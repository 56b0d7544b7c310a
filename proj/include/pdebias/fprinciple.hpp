#pragma once

#include <complex>
#include <string>
#include <vector>

#include "pdebias/domain.hpp"
#include "pdebias/network.hpp"

namespace pdebias {

/// Empirical-measure Fourier transform on a frequency grid:
/// F(xi) = (1/n) sum_i v_i exp(-2 pi i xi . x_i).
struct Spectrum {
  std::vector<double> xi;  // strictly increasing in |xi|
  std::vector<std::complex<double>> amp;
};

Spectrum nudft(const std::vector<double>& points, const std::vector<double>& values,
               const std::vector<double>& freqs);

struct Spectrum2D {
  std::vector<Point> xi;
  std::vector<std::complex<double>> amp;
};

Spectrum2D nudft_2d(const std::vector<Point>& points, const std::vector<double>& values,
                    const std::vector<Point>& freqs);

/// Convergence-rate kernel Gamma(xi) = A/|xi|^p + B/|xi|^q with defaults
/// p = d+3, q = d+1. Strictly decreasing in |xi|; undefined at xi = 0.
class GammaKernel {
 public:
  GammaKernel(double coef_a, double coef_b, int dim);
  GammaKernel(double coef_a, double coef_b, int dim, double p, double q);

  /// A = (1/m) sum_j (|w_j|^2 + c_j^2), B = 4 pi^2 (1/m) sum_j |w_j|^2 c_j^2,
  /// computed from the network's initial parameters.
  static GammaKernel from_network(const NetworkParams& init);

  double operator()(double xi_norm) const;
  double coef_a() const { return a_; }
  double coef_b() const { return b_; }
  int dim() const { return dim_; }
  double exp_p() const { return p_; }
  double exp_q() const { return q_; }

 private:
  double a_, b_;
  int dim_;
  double p_, q_;
};

double gamma_value(const GammaKernel& kernel, double xi_norm);

/// Uniform periodic frequency grid xi_j = j / period, j = 0..modes. The zero
/// mode is carried with weight Gamma(xi_1) wherever Gamma(0) would be needed.
struct PeriodicFreqGrid {
  double origin = 0.0;
  double period = 1.0;
  int modes = 0;  // positive modes; conjugate pairs are implicit

  double xi(int j) const { return j / period; }
};

/// Grid covering the 1D domain extended by 25% padding; modes = n_grid/2 - 1.
PeriodicFreqGrid padded_freq_grid(const Domain& domain, int n_grid);

/// Gamma sampled on the grid, entry j = Gamma(xi_j); entry 0 = Gamma(xi_1).
std::vector<double> gamma_on_grid(const GammaKernel& kernel,
                                  const PeriodicFreqGrid& grid);

/// h(x) = Re a_0 + 2 sum_{j>=1} Re( a_j exp(2 pi i xi_j x) ).
std::vector<double> eval_spectrum(const PeriodicFreqGrid& grid,
                                  const std::vector<std::complex<double>>& amp,
                                  const std::vector<double>& x);

struct FpMinResult {
  PeriodicFreqGrid grid;
  std::vector<double> x;            // the n_grid periodic grid points
  std::vector<double> values;       // h on those points
  std::vector<double> lambda;       // kernel interpolation weights
  std::vector<std::complex<double>> spectrum;  // j = 0..modes
  double fp_norm = 0.0;
};

/// Minimizes sum_xi Gamma(xi)^-1 |h^(xi)|^2 subject to h(x_i) = f(x_i) via the
/// kernel representation h = sum_i lambda_i K(x - x_i), K = inverse transform
/// of Gamma on the grid. n_grid must be a power of two >= 64.
FpMinResult fp_norm_minimize(const SampleSet& samples, const GammaKernel& kernel,
                             int n_grid);
FpMinResult fp_norm_minimize(const SampleSet& samples,
                             const std::vector<double>& gamma_values, int n_grid);

/// FP-norm of a spectrum under the given per-mode Gamma values.
double fp_norm(const std::vector<std::complex<double>>& amp,
               const std::vector<double>& gamma_values);

struct FlowConfig {
  double dt = 0.0;           // 0 selects 1 / K(0)
  long steps = 200'000;
  long record_stride = 100;
  double residual_tol = 0.0;  // early stop on max_i |h(x_i) - f_i|; 0 disables
};

struct FlowRecord {
  long iteration;
  double residual_rss;
  double residual_max;
};

struct FlowTrajectory {
  PeriodicFreqGrid grid;
  std::vector<FlowRecord> records;
  std::vector<std::vector<std::complex<double>>> spectra;  // at recorded steps
  std::vector<std::complex<double>> final_spectrum;
  long iterations_run = 0;
};

/// Explicit-Euler integration of d/dt F[h](xi) = -Gamma(xi) F[(h-f)rho](xi)
/// on the grid modes. Requires dt * Gamma_max < 2; aborts if the residual
/// grows for 100 consecutive steps.
FlowTrajectory simulate_gradient_flow(const GammaKernel& kernel,
                                      const SampleSet& samples,
                                      const PeriodicFreqGrid& grid,
                                      const FlowConfig& cfg,
                                      std::vector<std::complex<double>> initial = {});

double default_flow_dt(const GammaKernel& kernel, const PeriodicFreqGrid& grid);

struct Band {
  double lo, hi;  // [lo, hi) in |xi|
};

std::vector<Band> dyadic_bands(double xi0, int count);

struct BandReport {
  std::vector<Band> bands;
  std::vector<bool> excluded;  // true if the target has no energy in the band
  std::vector<long> snapshot_iterations;
  std::vector<std::vector<double>> relative_error;  // [band][snapshot]
  std::vector<long> first_passage;                  // -1 if never below threshold
  double threshold = 0.5;
};

/// Per snapshot, spectrum of (snapshot - target) on the trace grid; band
/// energies relative to the target's band energy; first iteration below the
/// threshold.
BandReport band_convergence(const TrainingTrace& trace,
                            const std::vector<double>& target,
                            const std::vector<Band>& bands, double threshold = 0.5);

std::string spectrum_csv(const Spectrum& s);
std::string spectrum_json(const Spectrum& s);
std::string band_report_json(const BandReport& report);

}  // namespace pdebias
