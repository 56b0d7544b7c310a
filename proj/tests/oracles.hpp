#pragma once

// Test-only reference implementations, independent of the library's
// production code paths.

#include <functional>
#include <vector>

namespace oracles {

/// Composite Gauss-Legendre quadrature (8 nodes per subinterval).
double quad_gl(const std::function<double(double)>& f, double a, double b,
               int subintervals);

/// Periodic piecewise-linear interpolant through (x_i, y_i) on a period P
/// starting at x0. Sample points must be strictly increasing within the
/// period.
class PeriodicLinearInterp {
 public:
  PeriodicLinearInterp(std::vector<double> x, std::vector<double> y, double x0,
                       double period);
  double eval(double x) const;

 private:
  std::vector<double> x_, y_;
  double x0_, period_;
};

/// Periodic natural cubic spline through (x_i, y_i) on a period P. Solves the
/// cyclic moment system directly.
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline(std::vector<double> x, std::vector<double> y, double x0,
                      double period);
  double eval(double x) const;

 private:
  std::vector<double> x_, y_, m_;  // moments (second derivatives) at knots
  double x0_, period_;
};

}  // namespace oracles
