#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pdebias {

/// A point in at most two dimensions; 1D code uses only the first entry.
using Point = std::array<double, 2>;

inline Point pt(double x) { return {x, 0.0}; }
inline Point pt(double x, double y) { return {x, y}; }

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Axis-aligned interval (1D) or box (2D) with Dirichlet boundary.
class Domain {
 public:
  static Domain interval(double a, double b);
  static Domain box(double ax, double bx, double ay, double by);

  int dim() const { return dim_; }
  const Interval& axis(int i) const { return axes_[i]; }
  double length(int i) const { return axes_[i].hi - axes_[i].lo; }

  bool strictly_inside(const Point& p) const;
  bool inside_closed(const Point& p) const;
  bool on_boundary(const Point& p) const;

  /// Fixed boundary sample: the two endpoints in 1D, `per_side` equispaced
  /// points on each of the four edges in 2D.
  std::vector<Point> boundary_points(int per_side = 32) const;

  bool operator==(const Domain& other) const;

 private:
  Domain(int dim, Interval x, Interval y);
  int dim_;
  std::array<Interval, 2> axes_;
};

/// The n sample locations and source values that constitute all available
/// information about the right-hand side.
struct SampleSet {
  Domain domain;
  std::vector<Point> points;
  std::vector<double> values;
  std::vector<double> weights;  // defaults to 1/n; quadrature rules may override

  std::size_t size() const { return points.size(); }
  double x(std::size_t i) const { return points[i][0]; }
  double y(std::size_t i) const { return points[i][1]; }

  /// 1D point coordinates as a flat vector.
  std::vector<double> coords_1d() const;
};

double default_source_1d(double x);
double default_source_2d(double x, double y);

using SourceFn = std::function<double(const Point&)>;

inline SourceFn source_1d(double (*f)(double)) {
  return [f](const Point& p) { return f(p[0]); };
}
inline SourceFn source_2d(double (*f)(double, double)) {
  return [f](const Point& p) { return f(p[0], p[1]); };
}

/// n distinct points, uniform on the open domain, reproducible from seed.
/// Draws closer than 1e-9 to an existing point are rejected and redrawn;
/// throws if the rejection loop exceeds 1000*n draws.
std::vector<Point> random_sample_points(std::size_t n, const Domain& domain,
                                        std::uint64_t seed);

SampleSet make_sample_set(const Domain& domain, std::vector<Point> points,
                          const SourceFn& source);
SampleSet make_sample_set(const Domain& domain, std::vector<Point> points,
                          std::vector<double> values);
SampleSet make_sample_set_1d(const Domain& domain, const std::vector<double>& xs,
                             const SourceFn& source);

/// CSV with mandatory metadata line `# domain: a b [a2 b2]` and header
/// `x,f` (1D) or `x,y,f` (2D). Parse errors carry the line number.
SampleSet load_samples_csv(const std::string& path);
void save_samples_csv(const SampleSet& samples, const std::string& path);

/// Experiment presets.
SampleSet example1_samples();
SampleSet example2_samples(std::uint64_t seed = 2, std::size_t n = 10);
SampleSet example3_samples();

}  // namespace pdebias
