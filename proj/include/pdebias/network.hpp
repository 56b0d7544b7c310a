#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdebias/domain.hpp"

namespace pdebias {

enum class Activation { Sin, ReLU };

std::string to_string(Activation a);

/// One-hidden-layer network u(x) = sum_k c_k sigma(w_k . x + b_k).
struct NetworkParams {
  Activation activation = Activation::Sin;
  int width = 0;
  int dim = 1;
  std::vector<Point> w;  // w[k][1] is 0 when dim == 1
  std::vector<double> b;
  std::vector<double> c;
};

enum class LossKind { Strong, Variational, Fit };

std::string to_string(LossKind k);

struct TrainConfig {
  LossKind loss = LossKind::Strong;
  double beta = 10.0;
  double learning_rate = 1e-4;
  double loss_target = 1e-4;
  long max_iterations = 2'000'000;
  std::vector<Point> boundary_points;
  long snapshot_stride = 100;  // 0 disables periodic snapshots
  std::uint64_t seed = 0;
  std::vector<Point> eval_grid;  // snapshot grid; may be empty
};

struct TrainingTrace {
  std::vector<double> losses;  // one entry per evaluated iteration
  std::vector<long> snapshot_iterations;
  std::vector<NetworkParams> snapshot_params;
  std::vector<std::vector<double>> snapshot_values;
  std::vector<Point> eval_grid;
  long final_iteration = 0;
};

struct LossGradients {
  std::vector<Point> w;
  std::vector<double> b;
  std::vector<double> c;
};

/// w_k, b_k ~ N(0, scale^2) and c_k ~ N(0, (scale/sqrt(m))^2), drawn from the
/// counter RNG in the order w_k[0..d-1], b_k, c_k for k = 0..m-1.
NetworkParams init_network(int m, int d, Activation activation, std::uint64_t seed,
                           double scale = 1.0);

double forward(const NetworkParams& p, const Point& x);
Point gradient_x(const NetworkParams& p, const Point& x);
/// Sin only; ReLU is rejected (its second derivative vanishes a.e.).
double laplacian(const NetworkParams& p, const Point& x);

double loss_strong(const NetworkParams& p, const SampleSet& samples,
                   const TrainConfig& cfg);
double loss_variational(const NetworkParams& p, const SampleSet& samples,
                        const TrainConfig& cfg);
double loss_fit(const NetworkParams& p, const SampleSet& samples,
                const TrainConfig& cfg);
double loss_value(const NetworkParams& p, const SampleSet& samples,
                  const TrainConfig& cfg);

LossGradients loss_gradients(const NetworkParams& p, const SampleSet& samples,
                             const TrainConfig& cfg);
/// Fused loss + gradient evaluation used by the training loop.
double loss_and_gradients(const NetworkParams& p, const SampleSet& samples,
                          const TrainConfig& cfg, LossGradients& out);

struct TrainResult {
  NetworkParams params;
  TrainingTrace trace;
};

/// Full-batch gradient descent until loss <= target or the iteration budget
/// is exhausted. Throws if the loss becomes non-finite (the message carries
/// the iteration).
TrainResult train(NetworkParams p, const SampleSet& samples, const TrainConfig& cfg);

/// Parameter checkpoint (activation, m, d, arrays).
std::string network_json(const NetworkParams& p);
NetworkParams network_from_json(const std::string& text);

}  // namespace pdebias
