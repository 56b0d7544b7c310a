#pragma once

#include <string>
#include <vector>

#include "pdebias/domain.hpp"

namespace pdebias {

/// Exact 1D limit of the sampled Ritz-Galerkin problem: the piecewise linear
/// function with kinks (slope jumps of -w_i f(x_i)) at the sample points and
/// zero boundary values.
class LimitSolution1D {
 public:
  explicit LimitSolution1D(const SampleSet& samples);

  double eval(double x) const;

  /// Sorted breakpoints a = t_0 < x_(1) < ... < x_(n) < t_{n+1} = b.
  const std::vector<double>& breakpoints() const { return breaks_; }
  /// Slope of each of the n+1 linear pieces.
  const std::vector<double>& slopes() const { return slopes_; }
  double domain_lo() const { return breaks_.front(); }
  double domain_hi() const { return breaks_.back(); }

 private:
  std::vector<double> breaks_;
  std::vector<double> slopes_;
  std::vector<double> start_values_;  // value at the left end of each piece
};

LimitSolution1D limit_solution_1d(const SampleSet& samples);
std::vector<double> eval_limit_1d(const LimitSolution1D& u, const std::vector<double>& grid);

/// Truncated eigenfunction expansion of the rectangle Green's function
/// applied to the empirical source, K*L retained modes.
class GreenSeries2D {
 public:
  GreenSeries2D(const SampleSet& samples, int kmax, int lmax);

  double eval(double x, double y) const;

  int kmax() const { return kmax_; }
  int lmax() const { return lmax_; }
  const Domain& domain() const { return domain_; }
  /// Aggregated coefficient of sin(p_k x~) sin(q_l y~), row-major (k, l).
  const std::vector<double>& coefficients() const { return coeff_; }

 private:
  Domain domain_;
  int kmax_;
  int lmax_;
  std::vector<double> coeff_;
};

GreenSeries2D green_series_2d(const SampleSet& samples, int kmax, int lmax);
std::vector<double> eval_green_2d(const GreenSeries2D& series,
                                  const std::vector<Point>& grid);

std::string limit_json(const LimitSolution1D& u);
std::string limit_json(const GreenSeries2D& series);

}  // namespace pdebias
