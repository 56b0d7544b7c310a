#include "pdebias/limit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace pdebias {

namespace {
constexpr double kPi = std::numbers::pi;
}

LimitSolution1D::LimitSolution1D(const SampleSet& samples) {
  if (samples.domain.dim() != 1)
    throw std::invalid_argument("limit_solution_1d needs a 1D sample set");
  const double a = samples.domain.axis(0).lo;
  const double b = samples.domain.axis(0).hi;
  const std::size_t n = samples.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return samples.points[i][0] < samples.points[j][0];
  });

  breaks_.resize(n + 2);
  breaks_.front() = a;
  breaks_.back() = b;
  for (std::size_t r = 0; r < n; ++r) breaks_[r + 1] = samples.points[order[r]][0];

  // u(x) = G (x - a) - sum_{x_i <= x} w_i f_i (x - x_i),
  // G = sum_i w_i f_i (b - x_i) / (b - a).
  double g = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    g += samples.weights[i] * samples.values[i] * (b - samples.points[i][0]);
  g /= (b - a);

  slopes_.resize(n + 1);
  start_values_.resize(n + 1);
  double slope = g;
  double value = 0.0;
  for (std::size_t piece = 0; piece <= n; ++piece) {
    slopes_[piece] = slope;
    start_values_[piece] = value;
    value += slope * (breaks_[piece + 1] - breaks_[piece]);
    if (piece < n) {
      const std::size_t i = order[piece];
      slope -= samples.weights[i] * samples.values[i];
    }
  }
}

double LimitSolution1D::eval(double x) const {
  const double a = breaks_.front();
  const double b = breaks_.back();
  if (x < a || x > b)
    throw std::invalid_argument("eval_limit_1d: point outside the domain");
  if (x == a || x == b) return 0.0;
  // Kinks belong to the right piece (H(0) = 1); the value is continuous.
  const auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, x);
  const std::size_t piece = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  return start_values_[piece] + slopes_[piece] * (x - breaks_[piece]);
}

LimitSolution1D limit_solution_1d(const SampleSet& samples) {
  return LimitSolution1D(samples);
}

std::vector<double> eval_limit_1d(const LimitSolution1D& u,
                                  const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = u.eval(grid[i]);
  return out;
}

GreenSeries2D::GreenSeries2D(const SampleSet& samples, int kmax, int lmax)
    : domain_(samples.domain), kmax_(kmax), lmax_(lmax) {
  if (samples.domain.dim() != 2)
    throw std::invalid_argument("green_series_2d needs a 2D sample set");
  if (kmax < 1 || lmax < 1)
    throw std::invalid_argument("green_series_2d needs K, L >= 1");
  const double ax = domain_.axis(0).lo, ay = domain_.axis(1).lo;
  const double lx = domain_.length(0), ly = domain_.length(1);
  coeff_.assign(static_cast<std::size_t>(kmax) * lmax, 0.0);

  std::vector<double> sx(kmax), sy(lmax);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double wf = samples.weights[i] * samples.values[i];
    if (wf == 0.0) continue;
    const double xs = samples.points[i][0] - ax;
    const double ys = samples.points[i][1] - ay;
    for (int k = 1; k <= kmax; ++k) sx[k - 1] = std::sin(k * kPi * xs / lx);
    for (int l = 1; l <= lmax; ++l) sy[l - 1] = std::sin(l * kPi * ys / ly);
    for (int k = 1; k <= kmax; ++k) {
      const double pk = k * kPi / lx;
      double* row = coeff_.data() + static_cast<std::size_t>(k - 1) * lmax;
      for (int l = 1; l <= lmax; ++l) {
        const double ql = l * kPi / ly;
        row[l - 1] += 4.0 * wf * sx[k - 1] * sy[l - 1] / (lx * ly * (pk * pk + ql * ql));
      }
    }
  }
}

double GreenSeries2D::eval(double x, double y) const {
  const double tx = (x - domain_.axis(0).lo) / domain_.length(0);
  const double ty = (y - domain_.axis(1).lo) / domain_.length(1);
  if (tx < 0.0 || tx > 1.0 || ty < 0.0 || ty > 1.0)
    throw std::invalid_argument("eval_green_2d: point outside the closed box");
  if (tx == 0.0 || tx == 1.0 || ty == 0.0 || ty == 1.0) return 0.0;
  std::vector<double> sx(kmax_), sy(lmax_);
  for (int k = 1; k <= kmax_; ++k) sx[k - 1] = std::sin(k * kPi * tx);
  for (int l = 1; l <= lmax_; ++l) sy[l - 1] = std::sin(l * kPi * ty);
  double u = 0.0;
  for (int k = 0; k < kmax_; ++k) {
    const double* row = coeff_.data() + static_cast<std::size_t>(k) * lmax_;
    double acc = 0.0;
    for (int l = 0; l < lmax_; ++l) acc += row[l] * sy[l];
    u += sx[k] * acc;
  }
  return u;
}

GreenSeries2D green_series_2d(const SampleSet& samples, int kmax, int lmax) {
  return GreenSeries2D(samples, kmax, lmax);
}

std::vector<double> eval_green_2d(const GreenSeries2D& series,
                                  const std::vector<Point>& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out[i] = series.eval(grid[i][0], grid[i][1]);
  return out;
}

std::string limit_json(const LimitSolution1D& u) {
  nlohmann::json j;
  j["kind"] = "limit";
  j["form"] = "piecewise_linear";
  j["breakpoints"] = u.breakpoints();
  j["slopes"] = u.slopes();
  return j.dump(2);
}

std::string limit_json(const GreenSeries2D& series) {
  nlohmann::json j;
  j["kind"] = "limit";
  j["form"] = "green_series";
  j["kmax"] = series.kmax();
  j["lmax"] = series.lmax();
  const Domain& dom = series.domain();
  for (int i = 0; i < 2; ++i) {
    j["domain"]["bounds"].push_back(dom.axis(i).lo);
    j["domain"]["bounds"].push_back(dom.axis(i).hi);
  }
  j["coefficients"] = series.coefficients();
  return j.dump(2);
}

}  // namespace pdebias
