#include "pdebias/network.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "pdebias/rng.hpp"

namespace pdebias {

std::string to_string(Activation a) {
  return a == Activation::Sin ? "sin" : "relu";
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::Strong: return "strong";
    case LossKind::Variational: return "variational";
    case LossKind::Fit: return "fit";
  }
  return "?";
}

NetworkParams init_network(int m, int d, Activation activation, std::uint64_t seed,
                           double scale) {
  if (m < 1) throw std::invalid_argument("init_network: m must be >= 1");
  if (d != 1 && d != 2) throw std::invalid_argument("init_network: d must be 1 or 2");
  CounterRng rng(seed);
  NetworkParams p;
  p.activation = activation;
  p.width = m;
  p.dim = d;
  p.w.resize(m, Point{0.0, 0.0});
  p.b.resize(m);
  p.c.resize(m);
  const double c_scale = scale / std::sqrt(static_cast<double>(m));
  for (int k = 0; k < m; ++k) {
    for (int a = 0; a < d; ++a) p.w[k][a] = rng.normal(scale);
    p.b[k] = rng.normal(scale);
    p.c[k] = rng.normal(c_scale);
  }
  return p;
}

namespace {

inline double act(Activation a, double z) {
  return a == Activation::Sin ? std::sin(z) : (z > 0.0 ? z : 0.0);
}
inline double act1(Activation a, double z) {
  return a == Activation::Sin ? std::cos(z) : (z > 0.0 ? 1.0 : 0.0);
}

void require_sin(const NetworkParams& p, const char* what) {
  if (p.activation != Activation::Sin)
    throw std::invalid_argument(std::string(what) +
                                ": ReLU second derivatives vanish almost everywhere; "
                                "use the variational loss");
}

void check_config(const NetworkParams& p, const SampleSet& samples,
                  const TrainConfig& cfg) {
  if (p.dim != samples.domain.dim())
    throw std::invalid_argument("network dimension does not match sample domain");
  if (!(cfg.learning_rate >= 0.0))
    throw std::invalid_argument("learning rate must be non-negative");
  if (!(cfg.loss_target > 0.0)) throw std::invalid_argument("loss target must be > 0");
  for (const auto& y : cfg.boundary_points)
    if (!samples.domain.on_boundary(y))
      throw std::invalid_argument("boundary point does not lie on the domain boundary");
  if (cfg.loss == LossKind::Strong) require_sin(p, "loss_strong");
}

}  // namespace

double forward(const NetworkParams& p, const Point& x) {
  double u = 0.0;
  for (int k = 0; k < p.width; ++k) {
    const double z = p.w[k][0] * x[0] + p.w[k][1] * x[1] + p.b[k];
    u += p.c[k] * act(p.activation, z);
  }
  return u;
}

Point gradient_x(const NetworkParams& p, const Point& x) {
  Point g{0.0, 0.0};
  for (int k = 0; k < p.width; ++k) {
    const double z = p.w[k][0] * x[0] + p.w[k][1] * x[1] + p.b[k];
    const double cs = p.c[k] * act1(p.activation, z);
    g[0] += cs * p.w[k][0];
    g[1] += cs * p.w[k][1];
  }
  if (p.dim == 1) g[1] = 0.0;
  return g;
}

double laplacian(const NetworkParams& p, const Point& x) {
  require_sin(p, "laplacian");
  double lap = 0.0;
  for (int k = 0; k < p.width; ++k) {
    const double z = p.w[k][0] * x[0] + p.w[k][1] * x[1] + p.b[k];
    const double nw2 = p.w[k][0] * p.w[k][0] + p.w[k][1] * p.w[k][1];
    lap += p.c[k] * (-std::sin(z)) * nw2;
  }
  return lap;
}

namespace {

double boundary_term(const NetworkParams& p, const TrainConfig& cfg) {
  if (cfg.boundary_points.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& y : cfg.boundary_points) {
    const double u = forward(p, y);
    acc += u * u;
  }
  return cfg.beta * acc / static_cast<double>(cfg.boundary_points.size());
}

}  // namespace

double loss_strong(const NetworkParams& p, const SampleSet& samples,
                   const TrainConfig& cfg) {
  require_sin(p, "loss_strong");
  const double n = static_cast<double>(samples.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double r = laplacian(p, samples.points[i]) + samples.values[i];
    acc += r * r;
  }
  return acc / n + boundary_term(p, cfg);
}

double loss_variational(const NetworkParams& p, const SampleSet& samples,
                        const TrainConfig& cfg) {
  const double n = static_cast<double>(samples.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Point g = gradient_x(p, samples.points[i]);
    const double u = forward(p, samples.points[i]);
    acc += 0.5 * (g[0] * g[0] + g[1] * g[1]) - samples.values[i] * u;
  }
  return acc / n + boundary_term(p, cfg);
}

double loss_fit(const NetworkParams& p, const SampleSet& samples,
                const TrainConfig& cfg) {
  const double n = static_cast<double>(samples.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double r = forward(p, samples.points[i]) - samples.values[i];
    acc += r * r;
  }
  return acc / n + boundary_term(p, cfg);
}

double loss_value(const NetworkParams& p, const SampleSet& samples,
                  const TrainConfig& cfg) {
  switch (cfg.loss) {
    case LossKind::Strong: return loss_strong(p, samples, cfg);
    case LossKind::Variational: return loss_variational(p, samples, cfg);
    case LossKind::Fit: return loss_fit(p, samples, cfg);
  }
  return 0.0;
}

double loss_and_gradients(const NetworkParams& p, const SampleSet& samples,
                          const TrainConfig& cfg, LossGradients& out) {
  check_config(p, samples, cfg);
  const int m = p.width;
  const bool sin_act = p.activation == Activation::Sin;
  out.w.assign(m, Point{0.0, 0.0});
  out.b.assign(m, 0.0);
  out.c.assign(m, 0.0);

  std::vector<double> s(m), s1(m);  // sigma(z_k) and sigma'(z_k) at the current point
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  double loss = 0.0;

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x0 = samples.points[i][0], x1 = samples.points[i][1];
    const double fi = samples.values[i];
    double u = 0.0, g0 = 0.0, g1 = 0.0, lap = 0.0;
    for (int k = 0; k < m; ++k) {
      const double z = p.w[k][0] * x0 + p.w[k][1] * x1 + p.b[k];
      if (sin_act) {
        s[k] = std::sin(z);
        s1[k] = std::cos(z);
      } else {
        s[k] = z > 0.0 ? z : 0.0;
        s1[k] = z > 0.0 ? 1.0 : 0.0;
      }
      const double cs1 = p.c[k] * s1[k];
      u += p.c[k] * s[k];
      g0 += cs1 * p.w[k][0];
      g1 += cs1 * p.w[k][1];
      if (cfg.loss == LossKind::Strong) {
        const double nw2 = p.w[k][0] * p.w[k][0] + p.w[k][1] * p.w[k][1];
        lap += p.c[k] * (-s[k]) * nw2;
      }
    }

    switch (cfg.loss) {
      case LossKind::Strong: {
        const double r = lap + fi;
        loss += inv_n * r * r;
        const double coef = 2.0 * inv_n * r;
        for (int k = 0; k < m; ++k) {
          const double w0 = p.w[k][0], w1 = p.w[k][1];
          const double nw2 = w0 * w0 + w1 * w1;
          out.c[k] += coef * (-s[k]) * nw2;
          const double cb = coef * p.c[k];
          out.b[k] += cb * (-s1[k]) * nw2;
          out.w[k][0] += cb * ((-s1[k]) * x0 * nw2 + (-s[k]) * 2.0 * w0);
          out.w[k][1] += cb * ((-s1[k]) * x1 * nw2 + (-s[k]) * 2.0 * w1);
        }
        break;
      }
      case LossKind::Variational: {
        loss += inv_n * (0.5 * (g0 * g0 + g1 * g1) - fi * u);
        for (int k = 0; k < m; ++k) {
          const double w0 = p.w[k][0], w1 = p.w[k][1];
          const double dotgw = g0 * w0 + g1 * w1;
          const double sig2 = sin_act ? -s[k] : 0.0;  // sigma''(z_k)
          out.c[k] += inv_n * (s1[k] * dotgw - fi * s[k]);
          out.b[k] += inv_n * p.c[k] * (sig2 * dotgw - fi * s1[k]);
          out.w[k][0] +=
              inv_n * p.c[k] * (sig2 * x0 * dotgw + s1[k] * g0 - fi * s1[k] * x0);
          out.w[k][1] +=
              inv_n * p.c[k] * (sig2 * x1 * dotgw + s1[k] * g1 - fi * s1[k] * x1);
        }
        break;
      }
      case LossKind::Fit: {
        const double r = u - fi;
        loss += inv_n * r * r;
        const double coef = 2.0 * inv_n * r;
        for (int k = 0; k < m; ++k) {
          out.c[k] += coef * s[k];
          const double cb = coef * p.c[k] * s1[k];
          out.b[k] += cb;
          out.w[k][0] += cb * x0;
          out.w[k][1] += cb * x1;
        }
        break;
      }
    }
  }

  if (!cfg.boundary_points.empty()) {
    const double inv_nb = 1.0 / static_cast<double>(cfg.boundary_points.size());
    for (const auto& y : cfg.boundary_points) {
      double u = 0.0;
      for (int k = 0; k < m; ++k) {
        const double z = p.w[k][0] * y[0] + p.w[k][1] * y[1] + p.b[k];
        if (sin_act) {
          s[k] = std::sin(z);
          s1[k] = std::cos(z);
        } else {
          s[k] = z > 0.0 ? z : 0.0;
          s1[k] = z > 0.0 ? 1.0 : 0.0;
        }
        u += p.c[k] * s[k];
      }
      loss += cfg.beta * inv_nb * u * u;
      const double coef = 2.0 * cfg.beta * inv_nb * u;
      for (int k = 0; k < m; ++k) {
        out.c[k] += coef * s[k];
        const double cb = coef * p.c[k] * s1[k];
        out.b[k] += cb;
        out.w[k][0] += cb * y[0];
        out.w[k][1] += cb * y[1];
      }
    }
  }

  if (p.dim == 1)
    for (int k = 0; k < m; ++k) out.w[k][1] = 0.0;
  return loss;
}

LossGradients loss_gradients(const NetworkParams& p, const SampleSet& samples,
                             const TrainConfig& cfg) {
  LossGradients g;
  loss_and_gradients(p, samples, cfg, g);
  return g;
}

namespace {

void record_snapshot(TrainingTrace& trace, long it, const NetworkParams& p) {
  trace.snapshot_iterations.push_back(it);
  trace.snapshot_params.push_back(p);
  if (!trace.eval_grid.empty()) {
    std::vector<double> vals(trace.eval_grid.size());
    for (std::size_t i = 0; i < trace.eval_grid.size(); ++i)
      vals[i] = forward(p, trace.eval_grid[i]);
    trace.snapshot_values.push_back(std::move(vals));
  }
}

}  // namespace

TrainResult train(NetworkParams p, const SampleSet& samples, const TrainConfig& cfg) {
  check_config(p, samples, cfg);
  TrainingTrace trace;
  trace.eval_grid = cfg.eval_grid;
  LossGradients g;

  for (long it = 0;; ++it) {
    const double loss = loss_and_gradients(p, samples, cfg, g);
    if (!std::isfinite(loss))
      throw std::runtime_error("training diverged at iteration " + std::to_string(it));
    trace.losses.push_back(loss);
    const bool done = loss <= cfg.loss_target || it >= cfg.max_iterations;
    if (cfg.snapshot_stride > 0 && (it % cfg.snapshot_stride == 0 || done))
      if (trace.snapshot_iterations.empty() || trace.snapshot_iterations.back() != it)
        record_snapshot(trace, it, p);
    if (done) {
      trace.final_iteration = it;
      break;
    }
    const double eta = cfg.learning_rate;
    for (int k = 0; k < p.width; ++k) {
      p.w[k][0] -= eta * g.w[k][0];
      p.w[k][1] -= eta * g.w[k][1];
      p.b[k] -= eta * g.b[k];
      p.c[k] -= eta * g.c[k];
    }
  }
  return TrainResult{std::move(p), std::move(trace)};
}

std::string network_json(const NetworkParams& p) {
  nlohmann::json j;
  j["kind"] = "dnn";
  j["activation"] = to_string(p.activation);
  j["m"] = p.width;
  j["d"] = p.dim;
  auto& w = j["w"] = nlohmann::json::array();
  for (int k = 0; k < p.width; ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int a = 0; a < p.dim; ++a) row.push_back(p.w[k][a]);
    w.push_back(row);
  }
  j["b"] = p.b;
  j["c"] = p.c;
  return j.dump(2);
}

NetworkParams network_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  NetworkParams p;
  const std::string act = j.at("activation");
  if (act == "sin")
    p.activation = Activation::Sin;
  else if (act == "relu")
    p.activation = Activation::ReLU;
  else
    throw std::runtime_error("unknown activation '" + act + "'");
  p.width = j.at("m");
  p.dim = j.at("d");
  p.w.assign(p.width, Point{0.0, 0.0});
  for (int k = 0; k < p.width; ++k)
    for (int a = 0; a < p.dim; ++a) p.w[k][a] = j.at("w")[k][a];
  p.b = j.at("b").get<std::vector<double>>();
  p.c = j.at("c").get<std::vector<double>>();
  if (static_cast<int>(p.b.size()) != p.width ||
      static_cast<int>(p.c.size()) != p.width)
    throw std::runtime_error("checkpoint array sizes do not match m");
  return p;
}

}  // namespace pdebias
