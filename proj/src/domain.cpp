#include "pdebias/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pdebias/io.hpp"
#include "pdebias/rng.hpp"

namespace pdebias {

namespace {

constexpr double kMinPointSeparation = 1e-9;

double sq_dist(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

void check_points(const Domain& domain, const std::vector<Point>& points) {
  if (points.empty()) throw std::invalid_argument("sample set needs n >= 1 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!domain.strictly_inside(points[i]))
      throw std::invalid_argument("sample point " + std::to_string(i) +
                                  " is not strictly inside the domain");
    for (std::size_t j = 0; j < i; ++j)
      if (sq_dist(points[i], points[j]) < kMinPointSeparation * kMinPointSeparation)
        throw std::invalid_argument("sample points " + std::to_string(j) + " and " +
                                    std::to_string(i) + " coincide");
  }
}

}  // namespace

Domain::Domain(int dim, Interval x, Interval y) : dim_(dim), axes_{x, y} {
  if (dim != 1 && dim != 2) throw std::invalid_argument("domain dim must be 1 or 2");
  for (int i = 0; i < dim; ++i)
    if (!(axes_[i].lo < axes_[i].hi))
      throw std::invalid_argument("domain axis " + std::to_string(i) +
                                  " needs lo < hi");
}

Domain Domain::interval(double a, double b) { return Domain(1, {a, b}, {0.0, 1.0}); }

Domain Domain::box(double ax, double bx, double ay, double by) {
  return Domain(2, {ax, bx}, {ay, by});
}

bool Domain::strictly_inside(const Point& p) const {
  for (int i = 0; i < dim_; ++i)
    if (!(p[i] > axes_[i].lo && p[i] < axes_[i].hi)) return false;
  return true;
}

bool Domain::inside_closed(const Point& p) const {
  for (int i = 0; i < dim_; ++i)
    if (!(p[i] >= axes_[i].lo && p[i] <= axes_[i].hi)) return false;
  return true;
}

bool Domain::on_boundary(const Point& p) const {
  if (!inside_closed(p)) return false;
  for (int i = 0; i < dim_; ++i)
    if (p[i] == axes_[i].lo || p[i] == axes_[i].hi) return true;
  return false;
}

std::vector<Point> Domain::boundary_points(int per_side) const {
  std::vector<Point> pts;
  if (dim_ == 1) {
    pts.push_back(pt(axes_[0].lo));
    pts.push_back(pt(axes_[0].hi));
    return pts;
  }
  const auto xs = linspace(axes_[0].lo, axes_[0].hi, per_side);
  const auto ys = linspace(axes_[1].lo, axes_[1].hi, per_side);
  for (int i = 0; i < per_side; ++i) {
    pts.push_back(pt(xs[i], axes_[1].lo));
    pts.push_back(pt(xs[i], axes_[1].hi));
    pts.push_back(pt(axes_[0].lo, ys[i]));
    pts.push_back(pt(axes_[0].hi, ys[i]));
  }
  return pts;
}

bool Domain::operator==(const Domain& other) const {
  if (dim_ != other.dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (axes_[i].lo != other.axes_[i].lo || axes_[i].hi != other.axes_[i].hi)
      return false;
  return true;
}

std::vector<double> SampleSet::coords_1d() const {
  std::vector<double> xs(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) xs[i] = points[i][0];
  return xs;
}

double default_source_1d(double x) {
  return -(4.0 * x * x * x - 6.0 * x) * std::exp(-x * x);
}

double default_source_2d(double x, double y) {
  const double pi = std::numbers::pi;
  return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
}

std::vector<Point> random_sample_points(std::size_t n, const Domain& domain,
                                        std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_sample_points: n must be >= 1");
  CounterRng rng(seed);
  std::vector<Point> pts;
  pts.reserve(n);
  const std::size_t max_draws = 1000 * n;
  std::size_t draws = 0;
  while (pts.size() < n) {
    if (draws++ >= max_draws)
      throw std::runtime_error("random_sample_points: rejection loop exceeded " +
                               std::to_string(max_draws) + " draws");
    Point p{0.0, 0.0};
    for (int i = 0; i < domain.dim(); ++i)
      p[i] = rng.uniform(domain.axis(i).lo, domain.axis(i).hi);
    if (!domain.strictly_inside(p)) continue;
    bool clash = false;
    for (const auto& q : pts)
      if (sq_dist(p, q) < kMinPointSeparation * kMinPointSeparation) {
        clash = true;
        break;
      }
    if (!clash) pts.push_back(p);
  }
  return pts;
}

SampleSet make_sample_set(const Domain& domain, std::vector<Point> points,
                          const SourceFn& source) {
  check_points(domain, points);
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) values[i] = source(points[i]);
  return make_sample_set(domain, std::move(points), std::move(values));
}

SampleSet make_sample_set(const Domain& domain, std::vector<Point> points,
                          std::vector<double> values) {
  check_points(domain, points);
  if (values.size() != points.size())
    throw std::invalid_argument("make_sample_set: |values| != |points|");
  std::vector<double> weights(points.size(), 1.0 / static_cast<double>(points.size()));
  return SampleSet{domain, std::move(points), std::move(values), std::move(weights)};
}

SampleSet make_sample_set_1d(const Domain& domain, const std::vector<double>& xs,
                             const SourceFn& source) {
  std::vector<Point> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back(pt(x));
  return make_sample_set(domain, std::move(pts), source);
}

namespace {

[[noreturn]] void csv_error(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) csv_error(path, line, "trailing characters in '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    csv_error(path, line, "cannot parse number '" + s + "'");
  } catch (const std::out_of_range&) {
    csv_error(path, line, "number out of range '" + s + "'");
  }
}

}  // namespace

SampleSet load_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file " + path);

  bool have_domain = false;
  std::vector<double> bounds;
  bool have_header = false;
  int dim = 0;
  std::vector<Point> points;
  std::vector<double> values;
  std::vector<int> point_lines;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      const auto b = body.find_first_not_of(" \t");
      if (b != std::string::npos) body = body.substr(b);
      if (body.rfind("domain:", 0) == 0) {
        if (have_domain) csv_error(path, lineno, "duplicate domain line");
        std::stringstream ss(body.substr(7));
        double v;
        while (ss >> v) bounds.push_back(v);
        if (bounds.size() != 2 && bounds.size() != 4)
          csv_error(path, lineno, "domain line needs 2 or 4 numbers");
        have_domain = true;
      }
      continue;
    }
    if (!have_header) {
      const auto cols = split_csv(line);
      if (cols.size() == 2 && cols[0] == "x" && cols[1] == "f")
        dim = 1;
      else if (cols.size() == 3 && cols[0] == "x" && cols[1] == "y" && cols[2] == "f")
        dim = 2;
      else
        csv_error(path, lineno, "expected header 'x,f' or 'x,y,f'");
      have_header = true;
      continue;
    }
    const auto cols = split_csv(line);
    if (static_cast<int>(cols.size()) != dim + 1)
      csv_error(path, lineno, "expected " + std::to_string(dim + 1) + " columns, got " +
                                  std::to_string(cols.size()));
    Point p{0.0, 0.0};
    for (int i = 0; i < dim; ++i) p[i] = parse_double(cols[i], path, lineno);
    points.push_back(p);
    values.push_back(parse_double(cols[dim], path, lineno));
    point_lines.push_back(lineno);
  }
  if (!have_domain) throw std::runtime_error(path + ": missing '# domain: ...' line");
  if (!have_header) throw std::runtime_error(path + ": missing header row");
  if ((dim == 1) != (bounds.size() == 2))
    throw std::runtime_error(path + ": domain metadata does not match header dimension");
  if (points.empty()) throw std::runtime_error(path + ": no sample rows");

  const Domain domain = dim == 1 ? Domain::interval(bounds[0], bounds[1])
                                 : Domain::box(bounds[0], bounds[1], bounds[2], bounds[3]);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!domain.strictly_inside(points[i]))
      csv_error(path, point_lines[i], "point is not strictly inside the domain");
    for (std::size_t j = 0; j < i; ++j)
      if (sq_dist(points[i], points[j]) < kMinPointSeparation * kMinPointSeparation)
        csv_error(path, point_lines[i],
                  "duplicate point (first seen on line " +
                      std::to_string(point_lines[j]) + ")");
  }
  return make_sample_set(domain, std::move(points), std::move(values));
}

void save_samples_csv(const SampleSet& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sample file " + path);
  out << "# domain:";
  for (int i = 0; i < samples.domain.dim(); ++i)
    out << ' ' << fmt17(samples.domain.axis(i).lo) << ' '
        << fmt17(samples.domain.axis(i).hi);
  out << '\n';
  out << (samples.domain.dim() == 1 ? "x,f" : "x,y,f") << '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << fmt17(samples.points[i][0]);
    if (samples.domain.dim() == 2) out << ',' << fmt17(samples.points[i][1]);
    out << ',' << fmt17(samples.values[i]) << '\n';
  }
}

SampleSet example1_samples() {
  return make_sample_set_1d(Domain::interval(-1.0, 1.0),
                            {-0.8, -0.4, 0.0, 0.4, 0.8},
                            source_1d(&default_source_1d));
}

SampleSet example2_samples(std::uint64_t seed, std::size_t n) {
  const Domain domain = Domain::interval(-1.0, 1.0);
  auto pts = random_sample_points(n, domain, seed);
  return make_sample_set(domain, std::move(pts), source_1d(&default_source_1d));
}

SampleSet example3_samples() {
  const Domain domain = Domain::box(0.0, 1.0, 0.0, 1.0);
  const std::vector<double> axis = {0.1, 0.25, 0.5, 0.8, 0.9};
  std::vector<Point> pts;
  for (double x : axis)
    for (double y : axis) pts.push_back(pt(x, y));
  return make_sample_set(domain, std::move(pts), source_2d(&default_source_2d));
}

}  // namespace pdebias
