#include "pdebias/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pdebias/io.hpp"
#include "pdebias/limit.hpp"
#include "pdebias/network.hpp"
#include "pdebias/rg.hpp"

namespace fs = std::filesystem;

namespace pdebias {

std::string to_string(Method m) {
  switch (m) {
    case Method::RG: return "rg";
    case Method::DNN: return "dnn";
    case Method::Limit: return "limit";
    case Method::FPMin: return "fpmin";
    case Method::FlowSim: return "flow";
  }
  return "?";
}

namespace {

[[noreturn]] void cfg_error(const std::string& field, const std::string& what) {
  throw std::invalid_argument("config." + field + ": " + what);
}

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

int basis_dim(const std::string& basis) {
  if (basis == "sine1d" || basis == "hat1d") return 1;
  if (basis == "tensor_sine_2d" || basis == "bilinear_fem_2d") return 2;
  cfg_error("basis", "unknown basis '" + basis + "'");
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (m_list.empty()) cfg_error("m_list", "needs at least one entry");
  for (int m : m_list)
    if (m < 1) cfg_error("m_list", "entries must be >= 1");
  if (grid_1d < 2) cfg_error("grid_1d", "needs >= 2 points");
  if (grid_2d < 2) cfg_error("grid_2d", "needs >= 2 points");
  if (!sample_preset.empty() && sample_preset != "example1" &&
      sample_preset != "example2" && sample_preset != "example3")
    cfg_error("sample_preset", "unknown preset '" + sample_preset + "'");
  if (sample_n < 1) cfg_error("sample_n", "needs >= 1");

  switch (method) {
    case Method::RG:
      basis_dim(basis);
      break;
    case Method::DNN: {
      if (activation != "sin" && activation != "relu")
        cfg_error("activation", "unknown activation '" + activation + "'");
      if (loss != "strong" && loss != "variational" && loss != "fit")
        cfg_error("loss", "unknown loss '" + loss + "'");
      if (activation == "relu" && loss == "strong")
        cfg_error("loss", "ReLU has no usable second derivative; use the "
                          "variational loss");
      if (!(eta > 0.0)) cfg_error("eta", "must be > 0");
      if (!(loss_target > 0.0)) cfg_error("loss_target", "must be > 0");
      if (max_iterations < 0) cfg_error("max_iterations", "must be >= 0");
      if (!(init_scale >= 0.0)) cfg_error("init_scale", "must be >= 0");
      if (snapshot_stride < 0) cfg_error("snapshot_stride", "must be >= 0");
      break;
    }
    case Method::Limit:
      if (modes_2d < 1) cfg_error("modes_2d", "needs >= 1");
      break;
    case Method::FPMin:
    case Method::FlowSim: {
      if (!is_pow2(fp_grid) || fp_grid < 64)
        cfg_error("fp_grid", "must be a power of two >= 64");
      const bool have_a = gamma_a >= 0.0, have_b = gamma_b >= 0.0;
      if (have_a != have_b) cfg_error("gamma_a", "set both gamma_a and gamma_b");
      if (have_a && gamma_a == 0.0 && gamma_b == 0.0)
        cfg_error("gamma_a", "gamma_a and gamma_b cannot both be 0");
      if ((gamma_p > 0.0) != (gamma_q > 0.0))
        cfg_error("gamma_p", "set both gamma_p and gamma_q");
      if (flow_dt < 0.0) cfg_error("flow_dt", "must be >= 0");
      if (flow_steps < 1) cfg_error("flow_steps", "needs >= 1");
      break;
    }
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream s;
  s << "method=" << to_string(method) << '\n'
    << "basis=" << basis << '\n'
    << "activation=" << activation << '\n'
    << "m_list=" << join_ints(m_list) << '\n'
    << "sample_preset=" << sample_preset << '\n'
    << "samples_csv=" << samples_csv << '\n'
    << "sample_seed=" << sample_seed << '\n'
    << "sample_n=" << sample_n << '\n'
    << "loss=" << loss << '\n'
    << "beta=" << fmt17(beta) << '\n'
    << "eta=" << fmt17(eta) << '\n'
    << "loss_target=" << fmt17(loss_target) << '\n'
    << "max_iterations=" << max_iterations << '\n'
    << "init_scale=" << fmt17(init_scale) << '\n'
    << "init_seed=" << init_seed << '\n'
    << "init_zero_output=" << (init_zero_output ? 1 : 0) << '\n'
    << "snapshot_stride=" << snapshot_stride << '\n'
    << "modes_2d=" << modes_2d << '\n'
    << "fp_grid=" << fp_grid << '\n'
    << "gamma_a=" << fmt17(gamma_a) << '\n'
    << "gamma_b=" << fmt17(gamma_b) << '\n'
    << "gamma_p=" << fmt17(gamma_p) << '\n'
    << "gamma_q=" << fmt17(gamma_q) << '\n'
    << "flow_dt=" << fmt17(flow_dt) << '\n'
    << "flow_steps=" << flow_steps << '\n'
    << "flow_residual_tol=" << fmt17(flow_residual_tol) << '\n'
    << "grid_1d=" << grid_1d << '\n'
    << "grid_2d=" << grid_2d << '\n';
  return s.str();
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(canonical())); }

GammaKernel default_gamma_kernel(std::uint64_t seed, int dim) {
  return GammaKernel::from_network(init_network(500, dim, Activation::Sin, seed, 1.0));
}

namespace {

SampleSet resolve_samples(const ExperimentConfig& cfg) {
  if (cfg.sample_preset == "example1") return example1_samples();
  if (cfg.sample_preset == "example2")
    return example2_samples(cfg.sample_seed, cfg.sample_n);
  if (cfg.sample_preset == "example3") return example3_samples();
  if (!cfg.samples_csv.empty()) return load_samples_csv(cfg.samples_csv);
  // Fall back to random points on the method's natural default domain.
  const int dim = cfg.method == Method::RG ? basis_dim(cfg.basis) : 1;
  const Domain dom =
      dim == 1 ? Domain::interval(-1.0, 1.0) : Domain::box(0.0, 1.0, 0.0, 1.0);
  auto pts = random_sample_points(cfg.sample_n, dom, cfg.sample_seed);
  const SourceFn src = dim == 1 ? source_1d(&default_source_1d)
                                : source_2d(&default_source_2d);
  return make_sample_set(dom, std::move(pts), src);
}

std::vector<Point> eval_grid_for(const Domain& dom, const ExperimentConfig& cfg) {
  std::vector<Point> grid;
  if (dom.dim() == 1) {
    for (double x : linspace(dom.axis(0).lo, dom.axis(0).hi, cfg.grid_1d))
      grid.push_back(pt(x));
    return grid;
  }
  const auto xs = linspace(dom.axis(0).lo, dom.axis(0).hi, cfg.grid_2d);
  const auto ys = linspace(dom.axis(1).lo, dom.axis(1).hi, cfg.grid_2d);
  for (double x : xs)
    for (double y : ys) grid.push_back(pt(x, y));
  return grid;
}

class RunWriter {
 public:
  RunWriter(const ExperimentConfig& cfg, const Domain& dom)
      : cfg_(cfg), dom_(dom), hash_(cfg.hash()) {
    fs::create_directories(cfg.out_dir);
  }

  std::string path(const std::string& name) const {
    return (fs::path(cfg_.out_dir) / name).string();
  }

  void metadata(std::ostream& out, const std::string& kind,
                const std::string& label) const {
    out << "# config_hash: " << hash_ << '\n';
    std::istringstream lines(cfg_.canonical());
    std::string line;
    while (std::getline(lines, line)) out << "# config: " << line << '\n';
    out << "# kind: " << kind << '\n';
    out << "# label: " << label << '\n';
    out << "# dim: " << dom_.dim() << '\n';
    out << "# domain:";
    for (int i = 0; i < dom_.dim(); ++i)
      out << ' ' << fmt17(dom_.axis(i).lo) << ' ' << fmt17(dom_.axis(i).hi);
    out << '\n';
  }

  std::string write_solution(const std::string& name, const std::string& kind,
                             const std::vector<Point>& grid,
                             const std::vector<double>& values) const {
    const std::string file = path(name + ".csv");
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file);
    metadata(out, kind, name);
    out << (dom_.dim() == 1 ? "x,u" : "x,y,u") << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << fmt17(grid[i][0]);
      if (dom_.dim() == 2) out << ',' << fmt17(grid[i][1]);
      out << ',' << fmt17(values[i]) << '\n';
    }
    return file;
  }

  void write_text(const std::string& name, const std::string& body) const {
    std::ofstream out(path(name));
    out << body;
  }

  // Injects the config fingerprint into a JSON document before writing.
  void write_json(const std::string& name, const std::string& body) const {
    auto j = nlohmann::json::parse(body);
    j["config_hash"] = hash_;
    j["config"] = cfg_.canonical();
    std::ofstream out(path(name));
    out << j.dump(2) << '\n';
  }

  const std::string& hash() const { return hash_; }

 private:
  const ExperimentConfig& cfg_;
  Domain dom_;
  std::string hash_;
};

BasisFamily make_basis(const std::string& name, const Domain& dom, int m) {
  if (name == "sine1d") return BasisFamily::sine1d(dom, m);
  if (name == "hat1d") return BasisFamily::hat1d(dom, m);
  if (name == "tensor_sine_2d") return BasisFamily::tensor_sine_2d(dom, m, m);
  if (name == "bilinear_fem_2d") return BasisFamily::bilinear_fem_2d(dom, m, m);
  cfg_error("basis", "unknown basis '" + name + "'");
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

GammaKernel kernel_from_config(const ExperimentConfig& cfg) {
  if (cfg.gamma_a < 0.0) return default_gamma_kernel(cfg.init_seed);
  if (cfg.gamma_p > 0.0)
    return GammaKernel(cfg.gamma_a, cfg.gamma_b, 1, cfg.gamma_p, cfg.gamma_q);
  return GammaKernel(cfg.gamma_a, cfg.gamma_b, 1);
}

/// Reference solution (exact limit) on the evaluation grid.
std::vector<double> reference_values(const SampleSet& samples,
                                     const std::vector<Point>& grid, int modes_2d) {
  if (samples.domain.dim() == 1) {
    const LimitSolution1D u(samples);
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = u.eval(grid[i][0]);
    return vals;
  }
  const GreenSeries2D series(samples, modes_2d, modes_2d);
  return eval_green_2d(series, grid);
}

}  // namespace

RunOutputs run(const ExperimentConfig& cfg) {
  cfg.validate();
  const SampleSet samples = resolve_samples(cfg);
  const Domain& dom = samples.domain;

  if (cfg.method == Method::RG && basis_dim(cfg.basis) != dom.dim())
    cfg_error("basis", "basis dimension does not match the sample domain");
  if ((cfg.method == Method::FPMin || cfg.method == Method::FlowSim) && dom.dim() != 1)
    cfg_error("method", "fpmin/flow support 1D sample sets only");

  RunWriter writer(cfg, dom);
  RunOutputs outputs;
  std::ostringstream log;
  log << timestamp_utc() << " start method=" << to_string(cfg.method)
      << " hash=" << writer.hash() << '\n';

  outputs.samples_file = writer.path("samples.csv");
  save_samples_csv(samples, outputs.samples_file);
  {
    std::ifstream in(outputs.samples_file);
    std::stringstream body;
    body << in.rdbuf();
    in.close();
    std::ofstream out(outputs.samples_file);
    out << "# config_hash: " << writer.hash() << '\n' << body.str();
  }

  const std::vector<Point> grid = eval_grid_for(dom, cfg);
  nlohmann::json metrics;
  metrics["config_hash"] = writer.hash();

  auto bounds_of = [&dom]() {
    std::vector<double> b;
    for (int i = 0; i < dom.dim(); ++i) {
      b.push_back(dom.axis(i).lo);
      b.push_back(dom.axis(i).hi);
    }
    return b;
  };

  switch (cfg.method) {
    case Method::Limit: {
      const auto vals = reference_values(samples, grid, cfg.modes_2d);
      outputs.solution_files.push_back(
          writer.write_solution("limit", "limit", grid, vals));
      if (dom.dim() == 1)
        writer.write_json("limit.json", limit_json(LimitSolution1D(samples)));
      else
        writer.write_json("limit.json",
                          limit_json(GreenSeries2D(samples, cfg.modes_2d, cfg.modes_2d)));
      break;
    }

    case Method::RG: {
      const auto ref = reference_values(samples, grid, cfg.modes_2d);
      outputs.reference_file = writer.write_solution("limit", "limit", grid, ref);
      for (int m : cfg.m_list) {
        const BasisFamily basis = make_basis(cfg.basis, dom, m);
        const RgSolution sol = solve_rg(basis, samples);
        const auto vals = eval_rg(sol, grid);
        const std::string label = "rg_" + cfg.basis + "_m" + std::to_string(m);
        outputs.solution_files.push_back(
            writer.write_solution(label, "rg", grid, vals));
        writer.write_json(label + ".json", solution_json(sol));
        const auto rep = compute_metrics(grid, vals, ref, dom.dim(), bounds_of());
        metrics["runs"][label] = nlohmann::json::parse(report_json(rep));
        log << timestamp_utc() << " solved " << label << '\n';
      }
      break;
    }

    case Method::DNN: {
      const auto ref = reference_values(samples, grid, cfg.modes_2d);
      outputs.reference_file = writer.write_solution("limit", "limit", grid, ref);
      const Activation act =
          cfg.activation == "sin" ? Activation::Sin : Activation::ReLU;
      TrainConfig tc;
      tc.loss = cfg.loss == "strong"        ? LossKind::Strong
                : cfg.loss == "variational" ? LossKind::Variational
                                            : LossKind::Fit;
      tc.beta = cfg.beta;
      tc.learning_rate = cfg.eta;
      tc.loss_target = cfg.loss_target;
      tc.max_iterations = cfg.max_iterations;
      tc.boundary_points = tc.loss == LossKind::Fit
                               ? std::vector<Point>{}
                               : dom.boundary_points(32);
      tc.snapshot_stride = cfg.snapshot_stride;
      tc.seed = cfg.init_seed;
      if (cfg.snapshot_stride > 0) tc.eval_grid = grid;

      for (int m : cfg.m_list) {
        NetworkParams p0 = init_network(m, dom.dim(), act, cfg.init_seed,
                                        cfg.init_scale);
        if (cfg.init_zero_output)
          for (auto& c : p0.c) c = 0.0;
        const TrainResult result = train(std::move(p0), samples, tc);
        std::vector<double> vals(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
          vals[i] = forward(result.params, grid[i]);
        const std::string label = "dnn_" + cfg.activation + "_m" + std::to_string(m);
        outputs.solution_files.push_back(
            writer.write_solution(label, "dnn", grid, vals));
        writer.write_json(label + "_checkpoint.json", network_json(result.params));

        std::ostringstream trace;
        writer.metadata(trace, "trace", label);
        trace << "iteration,loss\n";
        for (std::size_t i = 0; i < result.trace.losses.size(); ++i)
          trace << i << ',' << fmt17(result.trace.losses[i]) << '\n';
        writer.write_text(label + "_trace.csv", trace.str());

        if (!result.trace.snapshot_iterations.empty() && !tc.eval_grid.empty()) {
          nlohmann::json snap;
          snap["iterations"] = result.trace.snapshot_iterations;
          snap["values"] = result.trace.snapshot_values;
          writer.write_json(label + "_snapshots.json", snap.dump());
        }
        const auto rep = compute_metrics(grid, vals, ref, dom.dim(), bounds_of());
        metrics["runs"][label] = nlohmann::json::parse(report_json(rep));
        log << timestamp_utc() << " trained " << label << " iterations "
            << result.trace.final_iteration << " final loss "
            << fmt17(result.trace.losses.back()) << '\n';
      }
      break;
    }

    case Method::FPMin: {
      const GammaKernel kernel = kernel_from_config(cfg);
      const FpMinResult res = fp_norm_minimize(samples, kernel, cfg.fp_grid);
      std::vector<Point> gx;
      for (double x : res.x) gx.push_back(pt(x));
      const std::string file = writer.path("fpmin.csv");
      std::ofstream out(file);
      writer.metadata(out, "fpmin", "fpmin");
      out << "x,u\n";
      for (std::size_t i = 0; i < res.x.size(); ++i)
        out << fmt17(res.x[i]) << ',' << fmt17(res.values[i]) << '\n';
      outputs.solution_files.push_back(file);

      nlohmann::json j;
      j["kind"] = "fpmin";
      j["gamma"] = {{"a", kernel.coef_a()},
                    {"b", kernel.coef_b()},
                    {"p", kernel.exp_p()},
                    {"q", kernel.exp_q()}};
      j["lambda"] = res.lambda;
      j["fp_norm"] = res.fp_norm;
      Spectrum mspec;
      for (int jm = 0; jm <= res.grid.modes; ++jm) {
        mspec.xi.push_back(res.grid.xi(jm));
        mspec.amp.push_back(res.spectrum[jm]);
      }
      std::ostringstream scsv;
      writer.metadata(scsv, "fpmin_spectrum", "fpmin_spectrum");
      scsv << spectrum_csv(mspec);
      writer.write_text("fpmin_spectrum.csv", scsv.str());
      writer.write_json("fpmin.json", j.dump(2));
      break;
    }

    case Method::FlowSim: {
      const GammaKernel kernel = kernel_from_config(cfg);
      const PeriodicFreqGrid fgrid = padded_freq_grid(dom, cfg.fp_grid);
      FlowConfig fc;
      fc.dt = cfg.flow_dt;
      fc.steps = cfg.flow_steps;
      fc.record_stride = cfg.snapshot_stride > 0 ? cfg.snapshot_stride : 100;
      fc.residual_tol = cfg.flow_residual_tol;
      const FlowTrajectory traj = simulate_gradient_flow(kernel, samples, fgrid, fc);

      std::ostringstream tcsv;
      writer.metadata(tcsv, "flow_trace", "flow");
      tcsv << "iteration,residual_rss,residual_max\n";
      for (const auto& r : traj.records)
        tcsv << r.iteration << ',' << fmt17(r.residual_rss) << ','
             << fmt17(r.residual_max) << '\n';
      writer.write_text("flow_trace.csv", tcsv.str());

      std::vector<double> x(cfg.fp_grid);
      for (int g = 0; g < cfg.fp_grid; ++g)
        x[g] = fgrid.origin + g * fgrid.period / cfg.fp_grid;
      const auto vals = eval_spectrum(fgrid, traj.final_spectrum, x);
      const std::string file = writer.path("flow.csv");
      std::ofstream out(file);
      writer.metadata(out, "flow", "flow");
      out << "x,u\n";
      for (std::size_t i = 0; i < x.size(); ++i)
        out << fmt17(x[i]) << ',' << fmt17(vals[i]) << '\n';
      outputs.solution_files.push_back(file);
      log << timestamp_utc() << " flow ran " << traj.iterations_run << " steps\n";
      break;
    }
  }

  if (metrics.contains("runs")) {
    outputs.metrics_file = writer.path("metrics.json");
    std::ofstream mout(outputs.metrics_file);
    mout << metrics.dump(2) << '\n';
  }
  log << timestamp_utc() << " done\n";
  outputs.log_file = writer.path("run.log");
  writer.write_text("run.log", log.str());
  return outputs;
}

// ---------------------------------------------------------------------------
// Metrics and file comparison
// ---------------------------------------------------------------------------

namespace {

double trapezoid_l2(const std::vector<Point>& grid, const std::vector<double>& diff,
                    int dim) {
  if (dim == 1) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double h = grid[i + 1][0] - grid[i][0];
      acc += 0.5 * h * (diff[i] * diff[i] + diff[i + 1] * diff[i + 1]);
    }
    return std::sqrt(acc);
  }
  // Uniform tensor grid, row-major with x outer.
  std::size_t g2 = 1;
  while (g2 < grid.size() && grid[g2][0] == grid[0][0]) ++g2;
  const std::size_t g1 = grid.size() / g2;
  const double hx = g1 > 1 ? grid[g2][0] - grid[0][0] : 1.0;
  const double hy = g2 > 1 ? grid[1][1] - grid[0][1] : 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < g1; ++i)
    for (std::size_t j = 0; j < g2; ++j) {
      double w = hx * hy;
      if (i == 0 || i == g1 - 1) w *= 0.5;
      if (j == 0 || j == g2 - 1) w *= 0.5;
      const double d = diff[i * g2 + j];
      acc += w * d * d;
    }
  return std::sqrt(acc);
}

double hf_energy_fraction(const std::vector<Point>& grid,
                          const std::vector<double>& values, int dim, double cutoff) {
  if (dim == 1) {
    std::vector<double> xs(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) xs[i] = grid[i][0];
    const double span = xs.back() - xs.front();
    const int jmax = static_cast<int>((grid.size() - 1) / 2);
    std::vector<double> freqs;
    for (int j = 1; j <= jmax; ++j) freqs.push_back(j / span);
    const Spectrum s = nudft(xs, values, freqs);
    double total = 0.0, high = 0.0;
    for (std::size_t j = 0; j < freqs.size(); ++j) {
      const double e = std::norm(s.amp[j]);
      total += e;
      if (freqs[j] > cutoff) high += e;
    }
    return total > 0.0 ? high / total : 0.0;
  }
  // 2D: radial cutoff on a truncated frequency lattice.
  std::size_t g2 = 1;
  while (g2 < grid.size() && grid[g2][0] == grid[0][0]) ++g2;
  const std::size_t g1 = grid.size() / g2;
  const double sx = grid[(g1 - 1) * g2][0] - grid[0][0];
  const double sy = grid[g2 - 1][1] - grid[0][1];
  const int jmax = std::min<int>(25, static_cast<int>((std::min(g1, g2) - 1) / 2));
  std::vector<Point> freqs;
  for (int j = 0; j <= jmax; ++j)
    for (int k = 0; k <= jmax; ++k) {
      if (j == 0 && k == 0) continue;
      freqs.push_back(pt(j / sx, k / sy));
    }
  const Spectrum2D s = nudft_2d(grid, values, freqs);
  double total = 0.0, high = 0.0;
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    const double e = std::norm(s.amp[j]);
    total += e;
    if (std::hypot(freqs[j][0], freqs[j][1]) > cutoff) high += e;
  }
  return total > 0.0 ? high / total : 0.0;
}

double derivative_tv(const std::vector<Point>& grid, const std::vector<double>& values,
                     int dim) {
  if (dim == 1) {
    std::vector<double> d(values.size() - 1);
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
      d[i] = (values[i + 1] - values[i]) / (grid[i + 1][0] - grid[i][0]);
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) tv += std::abs(d[i + 1] - d[i]);
    return tv;
  }
  std::size_t g2 = 1;
  while (g2 < grid.size() && grid[g2][0] == grid[0][0]) ++g2;
  const std::size_t g1 = grid.size() / g2;
  const double hx = grid[g2][0] - grid[0][0];
  const double hy = grid[1][1] - grid[0][1];
  double tv = 0.0;
  for (std::size_t i = 0; i < g1; ++i)  // y-direction within each row
    for (std::size_t j = 0; j + 2 < g2; ++j) {
      const double d0 = (values[i * g2 + j + 1] - values[i * g2 + j]) / hy;
      const double d1 = (values[i * g2 + j + 2] - values[i * g2 + j + 1]) / hy;
      tv += std::abs(d1 - d0);
    }
  for (std::size_t j = 0; j < g2; ++j)  // x-direction within each column
    for (std::size_t i = 0; i + 2 < g1; ++i) {
      const double d0 = (values[(i + 1) * g2 + j] - values[i * g2 + j]) / hx;
      const double d1 = (values[(i + 2) * g2 + j] - values[(i + 1) * g2 + j]) / hx;
      tv += std::abs(d1 - d0);
    }
  return tv;
}

double boundary_violation(const std::vector<Point>& grid,
                          const std::vector<double>& values, int dim,
                          const std::vector<double>& bounds) {
  double v = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool on_bnd = grid[i][0] == bounds[0] || grid[i][0] == bounds[1];
    if (dim == 2) on_bnd = on_bnd || grid[i][1] == bounds[2] || grid[i][1] == bounds[3];
    if (on_bnd) v = std::max(v, std::abs(values[i]));
  }
  return v;
}

}  // namespace

ComparisonReport compute_metrics(const std::vector<Point>& grid,
                                 const std::vector<double>& run_values,
                                 const std::vector<double>& ref_values, int dim,
                                 const std::vector<double>& bounds, double hf_cutoff) {
  if (grid.size() != run_values.size() || grid.size() != ref_values.size())
    throw std::invalid_argument("compute_metrics: size mismatch");
  ComparisonReport rep;
  rep.hf_cutoff = hf_cutoff;
  std::vector<double> diff(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) diff[i] = run_values[i] - ref_values[i];
  rep.l2 = trapezoid_l2(grid, diff, dim);
  for (double d : diff) rep.linf = std::max(rep.linf, std::abs(d));
  rep.hf_fraction_run = hf_energy_fraction(grid, run_values, dim, hf_cutoff);
  rep.hf_fraction_ref = hf_energy_fraction(grid, ref_values, dim, hf_cutoff);
  rep.derivative_tv_run = derivative_tv(grid, run_values, dim);
  rep.derivative_tv_ref = derivative_tv(grid, ref_values, dim);
  rep.boundary_violation_run = boundary_violation(grid, run_values, dim, bounds);
  return rep;
}

std::string report_json(const ComparisonReport& rep) {
  nlohmann::json j;
  j["l2"] = rep.l2;
  j["linf"] = rep.linf;
  j["hf_cutoff"] = rep.hf_cutoff;
  j["hf_fraction_run"] = rep.hf_fraction_run;
  j["hf_fraction_ref"] = rep.hf_fraction_ref;
  j["derivative_tv_run"] = rep.derivative_tv_run;
  j["derivative_tv_ref"] = rep.derivative_tv_ref;
  j["boundary_violation_run"] = rep.boundary_violation_run;
  return j.dump(2);
}

SolutionFile read_solution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  SolutionFile f;
  std::string line;
  bool have_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto parse_tag = [&](const std::string& tag) -> std::string {
        const std::string prefix = "# " + tag + ":";
        if (line.rfind(prefix, 0) == 0) {
          std::string v = line.substr(prefix.size());
          const auto b = v.find_first_not_of(' ');
          return b == std::string::npos ? "" : v.substr(b);
        }
        return "";
      };
      if (auto v = parse_tag("config_hash"); !v.empty()) f.config_hash = v;
      if (auto v = parse_tag("kind"); !v.empty()) f.kind = v;
      if (auto v = parse_tag("dim"); !v.empty()) f.dim = std::stoi(v);
      if (auto v = parse_tag("domain"); !v.empty()) {
        std::stringstream ss(v);
        double b;
        f.bounds.clear();
        while (ss >> b) f.bounds.push_back(b);
      }
      continue;
    }
    if (!have_header) {
      have_header = true;  // x,u or x,y,u
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != f.dim + 1)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": wrong column count");
    f.grid.push_back(f.dim == 1 ? pt(row[0]) : pt(row[0], row[1]));
    f.values.push_back(row.back());
  }
  if (f.grid.empty()) throw std::runtime_error(path + ": no data rows");
  return f;
}

ComparisonReport compare(const std::string& run_csv, const std::string& reference_csv,
                         double hf_cutoff, bool force) {
  const SolutionFile a = read_solution_csv(run_csv);
  const SolutionFile b = read_solution_csv(reference_csv);
  if (!force && a.config_hash != b.config_hash)
    throw std::runtime_error("compare: config hash mismatch (" + a.config_hash +
                             " vs " + b.config_hash + "); pass force to override");
  if (a.dim != b.dim || a.grid.size() != b.grid.size())
    throw std::runtime_error("compare: evaluation grids do not match");
  for (std::size_t i = 0; i < a.grid.size(); ++i)
    if (a.grid[i] != b.grid[i])
      throw std::runtime_error("compare: evaluation grids do not match");
  return compute_metrics(a.grid, a.values, b.values, a.dim, a.bounds, hf_cutoff);
}

void export_profile(const std::string& solution_csv, char axis, double level,
                    const std::string& out_csv) {
  const SolutionFile f = read_solution_csv(solution_csv);
  if (f.dim != 2) throw std::runtime_error("export_profile: needs a 2D solution");
  std::size_t g2 = 1;
  while (g2 < f.grid.size() && f.grid[g2][0] == f.grid[0][0]) ++g2;
  const std::size_t g1 = f.grid.size() / g2;
  std::vector<double> xs(g1), ys(g2);
  for (std::size_t i = 0; i < g1; ++i) xs[i] = f.grid[i * g2][0];
  for (std::size_t j = 0; j < g2; ++j) ys[j] = f.grid[j][1];

  // Profile runs along `axis`; `level` pins the other coordinate.
  const std::vector<double>& run_coords = axis == 'x' ? xs : ys;
  const std::vector<double>& pin_coords = axis == 'x' ? ys : xs;
  if (level < pin_coords.front() || level > pin_coords.back())
    throw std::runtime_error("export_profile: level outside the domain");
  std::size_t j1 = 0;
  while (j1 + 1 < pin_coords.size() && pin_coords[j1 + 1] <= level) ++j1;
  const std::size_t j2 = std::min(j1 + 1, pin_coords.size() - 1);
  const double t = pin_coords[j2] == pin_coords[j1]
                       ? 0.0
                       : (level - pin_coords[j1]) / (pin_coords[j2] - pin_coords[j1]);

  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error("cannot write " + out_csv);
  out << "# config_hash: " << f.config_hash << '\n';
  out << "# kind: profile\n";
  out << "# profile_axis: " << axis << '\n';
  out << "# profile_level: " << fmt17(level) << '\n';
  out << "# dim: 1\n";
  out << (axis == 'x' ? "x,u" : "y,u") << '\n';
  for (std::size_t i = 0; i < run_coords.size(); ++i) {
    const double v1 = axis == 'x' ? f.values[i * g2 + j1] : f.values[j1 * g2 + i];
    const double v2 = axis == 'x' ? f.values[i * g2 + j2] : f.values[j2 * g2 + i];
    out << fmt17(run_coords[i]) << ',' << fmt17((1.0 - t) * v1 + t * v2) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

std::vector<ExperimentConfig> example1_configs(Method method) {
  ExperimentConfig cfg;
  cfg.sample_preset = "example1";
  cfg.m_list = {5, 10, 50, 500};
  if (method == Method::RG) {
    cfg.method = Method::RG;
    cfg.basis = "sine1d";
    cfg.out_dir = "example1_rg";
  } else {
    cfg.method = Method::DNN;
    cfg.activation = "sin";
    cfg.loss = "strong";
    cfg.snapshot_stride = 0;
    cfg.out_dir = "example1_dnn";
  }
  return {cfg};
}

std::vector<ExperimentConfig> example2_configs(Method method) {
  ExperimentConfig cfg;
  cfg.sample_preset = "example2";
  cfg.sample_seed = 2;
  cfg.sample_n = 10;
  cfg.m_list = {5, 10, 50, 500};
  if (method == Method::RG) {
    cfg.method = Method::RG;
    cfg.basis = "hat1d";
    cfg.out_dir = "example2_fem";
  } else {
    cfg.method = Method::DNN;
    cfg.activation = "relu";
    cfg.loss = "variational";
    cfg.snapshot_stride = 0;
    cfg.out_dir = "example2_dnn";
  }
  return {cfg};
}

std::vector<ExperimentConfig> example3_configs(Method method) {
  std::vector<ExperimentConfig> out;
  ExperimentConfig cfg;
  cfg.sample_preset = "example3";
  cfg.m_list = {5, 50, 100, 200};
  cfg.modes_2d = 200;
  if (method == Method::RG) {
    cfg.method = Method::RG;
    cfg.basis = "tensor_sine_2d";
    cfg.out_dir = "example3_spectral";
    out.push_back(cfg);
    cfg.basis = "bilinear_fem_2d";
    cfg.out_dir = "example3_fem";
    out.push_back(cfg);
  } else {
    cfg.method = Method::DNN;
    cfg.snapshot_stride = 0;
    cfg.activation = "sin";
    cfg.loss = "strong";
    cfg.out_dir = "example3_dnn_sin";
    out.push_back(cfg);
    cfg.activation = "relu";
    cfg.loss = "variational";
    cfg.out_dir = "example3_dnn_relu";
    out.push_back(cfg);
  }
  return out;
}

}  // namespace pdebias
