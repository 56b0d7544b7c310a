#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdebias/domain.hpp"
#include "pdebias/fprinciple.hpp"

namespace pdebias {

enum class Method { RG, DNN, Limit, FPMin, FlowSim };

std::string to_string(Method m);

/// Flat, hashable run description. Every output file embeds the resolved
/// key=value lines and their FNV-1a hash.
struct ExperimentConfig {
  Method method = Method::RG;

  std::string basis = "sine1d";    // rg: sine1d|hat1d|tensor_sine_2d|bilinear_fem_2d
  std::string activation = "sin";  // dnn: sin|relu
  std::vector<int> m_list = {50};  // per-axis counts for 2D bases

  std::string sample_preset;  // example1|example2|example3, or empty
  std::string samples_csv;    // used when no preset is given
  std::uint64_t sample_seed = 2;
  int sample_n = 10;

  std::string loss = "strong";  // strong|variational|fit
  double beta = 10.0;
  double eta = 1e-4;
  double loss_target = 1e-4;
  long max_iterations = 2'000'000;
  double init_scale = 1.0;
  std::uint64_t init_seed = 0;
  bool init_zero_output = false;  // zero the output layer after drawing w, b
  long snapshot_stride = 100;

  int modes_2d = 200;  // Green-series truncation for 2D limit references
  int fp_grid = 1024;
  double gamma_a = -1.0;  // < 0 selects the default network-derived kernel
  double gamma_b = -1.0;
  double gamma_p = 0.0;  // 0 selects the default exponents d+3, d+1
  double gamma_q = 0.0;
  double flow_dt = 0.0;  // 0 selects 1/K(0)
  long flow_steps = 200'000;
  double flow_residual_tol = 1e-10;

  int grid_1d = 1000;
  int grid_2d = 101;
  std::string out_dir = "out";

  void validate() const;        // throws with the offending field path
  std::string canonical() const;
  std::string hash() const;
};

/// Presets mirroring the three experiments; example3 yields one config per
/// basis (or per activation for DNN runs).
std::vector<ExperimentConfig> example1_configs(Method method);
std::vector<ExperimentConfig> example2_configs(Method method);
std::vector<ExperimentConfig> example3_configs(Method method);

/// Gamma kernel of the default width-500 sin network initialization.
GammaKernel default_gamma_kernel(std::uint64_t seed = 0, int dim = 1);

struct RunOutputs {
  std::vector<std::string> solution_files;
  std::string reference_file;
  std::string metrics_file;
  std::string log_file;
  std::string samples_file;
};

/// Executes the configured runs and writes solution CSVs, descriptor JSONs,
/// metric JSONs, traces, and a run log under out_dir.
RunOutputs run(const ExperimentConfig& config);

struct ComparisonReport {
  double l2 = 0.0;    // distance to the reference
  double linf = 0.0;
  double hf_fraction_run = 0.0;  // spectral energy above the cutoff
  double hf_fraction_ref = 0.0;
  double derivative_tv_run = 0.0;
  double derivative_tv_ref = 0.0;
  double boundary_violation_run = 0.0;
  double hf_cutoff = 10.0;
};

/// A solution CSV as written by run().
struct SolutionFile {
  std::string config_hash;
  std::string kind;
  int dim = 1;
  std::vector<double> bounds;  // lo, hi per axis
  std::vector<Point> grid;
  std::vector<double> values;
};

SolutionFile read_solution_csv(const std::string& path);

/// Metrics of `run_csv` against `reference_csv` on their (matching) grid.
/// Refuses mixed config hashes unless `force`.
ComparisonReport compare(const std::string& run_csv, const std::string& reference_csv,
                         double hf_cutoff = 10.0, bool force = false);

ComparisonReport compute_metrics(const std::vector<Point>& grid,
                                 const std::vector<double>& run_values,
                                 const std::vector<double>& ref_values, int dim,
                                 const std::vector<double>& bounds,
                                 double hf_cutoff = 10.0);

std::string report_json(const ComparisonReport& report);

/// 1D slice of a 2D solution along `axis` ('x' or 'y') with the other
/// coordinate held at `level`, interpolated on the stored grid.
void export_profile(const std::string& solution_csv, char axis, double level,
                    const std::string& out_csv);

}  // namespace pdebias
