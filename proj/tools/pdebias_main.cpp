#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdebias/experiment.hpp"
#include "pdebias/io.hpp"

namespace {

using pdebias::ExperimentConfig;
using pdebias::Method;

std::string g_config_file;

// Flat key=value config file; command-line flags take precedence. Unknown
// keys fail fast.
void load_config_file(CLI::App* cmd, ExperimentConfig& cfg) {
  if (g_config_file.empty()) return;
  std::ifstream in(g_config_file);
  if (!in) throw std::runtime_error("cannot open config file " + g_config_file);

  const auto overridden = [cmd](const std::string& key) {
    std::string opt = "--" + key;
    for (auto& c : opt)
      if (c == '_') c = '-';
    const CLI::Option* o = cmd->get_option_no_throw(opt);
    return o != nullptr && o->count() > 0;
  };
  const auto parse_m_list = [](const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
    return out;
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(g_config_file + ":" + std::to_string(lineno) +
                               ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (overridden(key)) continue;
    if (key == "basis") cfg.basis = val;
    else if (key == "activation") cfg.activation = val;
    else if (key == "m_list") cfg.m_list = parse_m_list(val);
    else if (key == "sample_preset") cfg.sample_preset = val;
    else if (key == "samples_csv") cfg.samples_csv = val;
    else if (key == "sample_seed") cfg.sample_seed = std::stoull(val);
    else if (key == "sample_n") cfg.sample_n = std::stoi(val);
    else if (key == "loss") cfg.loss = val;
    else if (key == "beta") cfg.beta = std::stod(val);
    else if (key == "eta") cfg.eta = std::stod(val);
    else if (key == "loss_target") cfg.loss_target = std::stod(val);
    else if (key == "max_iterations") cfg.max_iterations = std::stol(val);
    else if (key == "init_scale") cfg.init_scale = std::stod(val);
    else if (key == "init_seed") cfg.init_seed = std::stoull(val);
    else if (key == "init_zero_output")
      cfg.init_zero_output = val == "1" || val == "true";
    else if (key == "snapshot_stride") cfg.snapshot_stride = std::stol(val);
    else if (key == "modes_2d") cfg.modes_2d = std::stoi(val);
    else if (key == "fp_grid") cfg.fp_grid = std::stoi(val);
    else if (key == "gamma_a") cfg.gamma_a = std::stod(val);
    else if (key == "gamma_b") cfg.gamma_b = std::stod(val);
    else if (key == "gamma_p") cfg.gamma_p = std::stod(val);
    else if (key == "gamma_q") cfg.gamma_q = std::stod(val);
    else if (key == "flow_dt") cfg.flow_dt = std::stod(val);
    else if (key == "flow_steps") cfg.flow_steps = std::stol(val);
    else if (key == "flow_residual_tol") cfg.flow_residual_tol = std::stod(val);
    else if (key == "grid_1d") cfg.grid_1d = std::stoi(val);
    else if (key == "grid_2d") cfg.grid_2d = std::stoi(val);
    else if (key == "out") cfg.out_dir = val;
    else
      throw std::runtime_error(g_config_file + ":" + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
  }
}

void add_common_flags(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--config", g_config_file,
                  "flat key=value config file (flags override)");

  cmd->add_option("--m-list", cfg.m_list, "basis / neuron counts (per axis in 2D)");
  cmd->add_option("--sample-preset", cfg.sample_preset,
                  "example1|example2|example3");
  cmd->add_option("--samples-csv", cfg.samples_csv, "sample CSV path");
  cmd->add_option("--sample-seed", cfg.sample_seed, "seed for random sample points");
  cmd->add_option("--sample-n", cfg.sample_n, "random sample count");
  cmd->add_option("--grid-1d", cfg.grid_1d, "1D evaluation grid size");
  cmd->add_option("--grid-2d", cfg.grid_2d, "2D evaluation grid size per axis");
  cmd->add_option("--out", cfg.out_dir, "output directory");
}

void add_dnn_flags(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--activation", cfg.activation, "sin|relu");
  cmd->add_option("--loss", cfg.loss, "strong|variational|fit");
  cmd->add_option("--beta", cfg.beta, "boundary penalty weight");
  cmd->add_option("--eta", cfg.eta, "learning rate");
  cmd->add_option("--loss-target", cfg.loss_target, "stopping loss");
  cmd->add_option("--max-iterations", cfg.max_iterations, "iteration budget");
  cmd->add_option("--init-scale", cfg.init_scale, "initialization scale");
  cmd->add_option("--init-seed", cfg.init_seed, "initialization seed");
  cmd->add_flag("--init-zero-output", cfg.init_zero_output,
                "zero the output layer after drawing w, b");
  cmd->add_option("--snapshot-stride", cfg.snapshot_stride,
                  "snapshot every k iterations (0 = off)");
}

void add_fp_flags(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--fp-grid", cfg.fp_grid, "periodic grid size (power of two)");
  cmd->add_option("--gamma-a", cfg.gamma_a, "Gamma kernel coefficient A");
  cmd->add_option("--gamma-b", cfg.gamma_b, "Gamma kernel coefficient B");
  cmd->add_option("--gamma-p", cfg.gamma_p, "Gamma exponent p (0 = d+3)");
  cmd->add_option("--gamma-q", cfg.gamma_q, "Gamma exponent q (0 = d+1)");
  cmd->add_option("--init-seed", cfg.init_seed, "seed of the default kernel network");
}

int run_and_report(const std::vector<ExperimentConfig>& configs,
                   bool profiles_at_half = false) {
  for (const auto& cfg : configs) {
    const auto out = pdebias::run(cfg);
    std::cout << "wrote " << out.solution_files.size() << " solution file(s) to "
              << cfg.out_dir << " (config " << cfg.hash() << ")\n";
    if (profiles_at_half) {
      for (const auto& file : out.solution_files) {
        const std::string profile = file.substr(0, file.size() - 4) + "_y0.5.csv";
        pdebias::export_profile(file, 'x', 0.5, profile);
        std::cout << "wrote " << profile << '\n';
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampled-Poisson solver lab: Ritz-Galerkin vs shallow networks"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string cmp_run, cmp_ref, profile_in, profile_out;
  double hf_cutoff = 10.0, profile_level = 0.5;
  bool force = false;
  std::string profile_axis = "x";
  std::string ex_method = "rg";

  auto* rg = app.add_subcommand("rg", "Ritz-Galerkin solve");
  add_common_flags(rg, cfg);
  rg->add_option("--basis", cfg.basis,
                 "sine1d|hat1d|tensor_sine_2d|bilinear_fem_2d");
  rg->add_option("--modes-2d", cfg.modes_2d, "Green-series reference truncation");

  auto* dnn = app.add_subcommand("dnn", "network training solve");
  add_common_flags(dnn, cfg);
  add_dnn_flags(dnn, cfg);
  dnn->add_option("--modes-2d", cfg.modes_2d, "Green-series reference truncation");

  auto* limit = app.add_subcommand("limit", "exact Dirac-limit solution");
  add_common_flags(limit, cfg);
  limit->add_option("--modes-2d", cfg.modes_2d, "Green-series truncation");

  auto* fpmin = app.add_subcommand("fpmin", "constrained FP-norm minimizer");
  add_common_flags(fpmin, cfg);
  add_fp_flags(fpmin, cfg);

  auto* flow = app.add_subcommand("flow", "frequency-domain gradient flow");
  add_common_flags(flow, cfg);
  add_fp_flags(flow, cfg);
  flow->add_option("--flow-dt", cfg.flow_dt, "Euler step (0 = auto)");
  flow->add_option("--flow-steps", cfg.flow_steps, "step budget");
  flow->add_option("--flow-residual-tol", cfg.flow_residual_tol,
                   "early-stop residual (0 = off)");
  flow->add_option("--snapshot-stride", cfg.snapshot_stride, "record stride");

  auto* ex1 = app.add_subcommand("example1", "5-point 1D experiment presets");
  ex1->add_option("--method", ex_method, "rg|dnn");
  ex1->add_option("--m-list", cfg.m_list, "override preset m list");
  ex1->add_option("--out", cfg.out_dir, "override output directory");

  auto* ex2 = app.add_subcommand("example2", "10 random points, FEM + ReLU presets");
  ex2->add_option("--method", ex_method, "rg|dnn");
  ex2->add_option("--m-list", cfg.m_list, "override preset m list");
  ex2->add_option("--out", cfg.out_dir, "override output directory");

  auto* ex3 = app.add_subcommand("example3", "2D 25-point experiment presets");
  ex3->add_option("--method", ex_method, "rg|dnn");
  ex3->add_option("--m-list", cfg.m_list, "override preset m list");

  auto* cmp = app.add_subcommand("compare", "metrics of a run against a reference");
  cmp->add_option("run", cmp_run, "run solution CSV")->required();
  cmp->add_option("reference", cmp_ref, "reference solution CSV")->required();
  cmp->add_option("--hf-cutoff", hf_cutoff, "high-frequency cutoff |xi|");
  cmp->add_flag("--force", force, "allow mixed config hashes");

  auto* prof = app.add_subcommand("profile", "1D slice of a 2D solution");
  prof->add_option("solution", profile_in, "2D solution CSV")->required();
  prof->add_option("output", profile_out, "output CSV")->required();
  prof->add_option("--axis", profile_axis, "x|y (direction the profile runs along)");
  prof->add_option("--level", profile_level, "pinned coordinate value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rg->parsed()) {
      cfg.method = Method::RG;
      load_config_file(rg, cfg);
      return run_and_report({cfg});
    }
    if (dnn->parsed()) {
      cfg.method = Method::DNN;
      load_config_file(dnn, cfg);
      return run_and_report({cfg});
    }
    if (limit->parsed()) {
      cfg.method = Method::Limit;
      load_config_file(limit, cfg);
      return run_and_report({cfg});
    }
    if (fpmin->parsed()) {
      cfg.method = Method::FPMin;
      load_config_file(fpmin, cfg);
      return run_and_report({cfg});
    }
    if (flow->parsed()) {
      cfg.method = Method::FlowSim;
      load_config_file(flow, cfg);
      return run_and_report({cfg});
    }

    const auto apply_overrides = [&](std::vector<ExperimentConfig> configs,
                                     CLI::App* cmd) {
      const auto given = [cmd](const std::string& name) {
        const CLI::Option* o = cmd->get_option_no_throw(name);
        return o != nullptr && o->count() > 0;
      };
      for (auto& c : configs) {
        if (given("--m-list")) c.m_list = cfg.m_list;
        if (given("--out")) c.out_dir = cfg.out_dir;
      }
      return configs;
    };
    const Method method = ex_method == "dnn" ? Method::DNN : Method::RG;
    if (ex1->parsed())
      return run_and_report(apply_overrides(pdebias::example1_configs(method), ex1));
    if (ex2->parsed())
      return run_and_report(apply_overrides(pdebias::example2_configs(method), ex2));
    if (ex3->parsed())
      return run_and_report(apply_overrides(pdebias::example3_configs(method), ex3),
                            method == Method::RG);

    if (cmp->parsed()) {
      const auto rep = pdebias::compare(cmp_run, cmp_ref, hf_cutoff, force);
      std::cout << pdebias::report_json(rep) << '\n';
      return 0;
    }
    if (prof->parsed()) {
      pdebias::export_profile(profile_in, profile_axis.empty() ? 'x' : profile_axis[0],
                              profile_level, profile_out);
      std::cout << "wrote " << profile_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
