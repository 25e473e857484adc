#include "sqlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sqlab/error.hpp"

namespace sqlab {

double distance(const Point& a, const Point& b, int dim) {
  if (dim == 1) return std::abs(a[0] - b[0]);
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

GridSpec::GridSpec(int dim, double half_width, int points)
    : dim_(dim), half_width_(half_width), points_(points), center_((points - 1) / 2) {
  spacing_ = 2.0 * half_width / (points - 1);
  size_ = dim == 1 ? static_cast<std::size_t>(points)
                   : static_cast<std::size_t>(points) * static_cast<std::size_t>(points);

  std::vector<double> axis(points, spacing_);
  axis.front() *= 0.5;
  axis.back() *= 0.5;
  auto w = std::make_shared<std::vector<double>>(size_);
  if (dim == 1) {
    *w = axis;
  } else {
    for (int i = 0; i < points; ++i)
      for (int j = 0; j < points; ++j) (*w)[static_cast<std::size_t>(i) * points + j] = axis[i] * axis[j];
  }
  weights_ = std::move(w);
}

GridSpec GridSpec::general(int dim, double half_width, int points) {
  if (dim != 1 && dim != 2) throw InvalidArgument("grid dim must be 1 or 2");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw InvalidArgument("grid half width must be positive and finite");
  if (points < 3 || points % 2 == 0) throw InvalidArgument("grid points per axis must be odd and >= 3");
  return GridSpec(dim, half_width, points);
}

GridSpec GridSpec::spatial(int dim, double half_width, int points) {
  if (points < 33) throw InvalidArgument("spatial grid needs at least 33 points per axis");
  return general(dim, half_width, points);
}

GridSpec GridSpec::kernel(int dim, int points) {
  const int min_points = dim == 1 ? 33 : 17;
  if (points < min_points)
    throw InvalidArgument("kernel resolution too small (need >= 33 in 1D, >= 17 in 2D)");
  return general(dim, 1.0, points);
}

double GridSpec::volume() const { return std::pow(2.0 * half_width_, dim_); }

Point GridSpec::node(std::size_t index) const {
  const auto mi = multi_index(index);
  return {coordinate(mi[0]), dim_ == 2 ? coordinate(mi[1]) : 0.0};
}

std::array<int, 2> GridSpec::multi_index(std::size_t index) const {
  if (dim_ == 1) return {static_cast<int>(index), 0};
  return {static_cast<int>(index / points_), static_cast<int>(index % points_)};
}

std::size_t GridSpec::flat_index(int i0, int i1) const {
  if (dim_ == 1) return static_cast<std::size_t>(i0);
  return static_cast<std::size_t>(i0) * points_ + static_cast<std::size_t>(i1);
}

bool GridSpec::contains(const Point& x) const {
  const double lim = half_width_ * (1.0 + 1e-12);
  for (int a = 0; a < dim_; ++a)
    if (!(std::abs(x[a]) <= lim)) return false;
  return true;
}

bool GridSpec::operator==(const GridSpec& other) const {
  return dim_ == other.dim_ && half_width_ == other.half_width_ && points_ == other.points_;
}

SampledField::SampledField(GridSpec grid, std::vector<double> values, double exterior)
    : grid_(std::move(grid)), values_(std::move(values)), exterior_(exterior) {
  if (values_.size() != grid_.size()) throw InvalidArgument("field value count does not match grid");
  if (!std::isfinite(exterior_)) throw InvalidArgument("field exterior value must be finite");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("field values must be finite");
}

SampledField SampledField::constant(const GridSpec& grid, double value) {
  return SampledField(grid, std::vector<double>(grid.size(), value), value);
}

SampledField SampledField::from_function(const GridSpec& grid,
                                         const std::function<double(const Point&)>& fn) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.node(i));
  return SampledField(grid, std::move(v));
}

SampledField SampledField::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return SampledField(grid_, std::move(v), exterior_ * c);
}

SampledField SampledField::plus(const SampledField& other) const {
  if (!(grid_ == other.grid_)) throw InvalidArgument("fields live on different grids");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
  return SampledField(grid_, std::move(v), exterior_ + other.exterior_);
}

SampledField SampledField::times(const SampledField& other) const {
  if (!(grid_ == other.grid_)) throw InvalidArgument("fields live on different grids");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= other.values_[i];
  return SampledField(grid_, std::move(v), exterior_ * other.exterior_);
}

SampledField SampledField::shifted(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x += c;
  return SampledField(grid_, std::move(v), exterior_ + c);
}

double SampledField::sup_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

TimeLadder TimeLadder::make(const GridSpec& grid, double t_min, double t_max, int levels) {
  if (levels < 8) throw InvalidArgument("time ladder needs at least 8 levels");
  if (!(t_min > 0.0) || !(t_max > t_min)) throw InvalidArgument("time ladder needs 0 < t_min < t_max");
  if (t_min < grid.spacing() * (1.0 - 1e-12))
    throw InvalidArgument("time ladder t_min must not be finer than the grid spacing");
  if (t_max > 2.0 * grid.half_width() * (1.0 + 1e-12))
    throw InvalidArgument("time ladder t_max must not exceed 2L");

  TimeLadder ladder;
  const double h = std::log(t_max / t_min) / (levels - 1);
  ladder.nodes_.resize(levels);
  ladder.log_weights_.assign(levels, h);
  for (int k = 0; k < levels; ++k) ladder.nodes_[k] = t_min * std::exp(h * k);
  ladder.nodes_.front() = t_min;
  ladder.nodes_.back() = t_max;
  ladder.log_weights_.front() *= 0.5;
  ladder.log_weights_.back() *= 0.5;
  return ladder;
}

bool TimeLadder::operator==(const TimeLadder& other) const { return nodes_ == other.nodes_; }

double integrate(const SampledField& f) {
  const auto q = f.grid().weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += q[i] * f[i];
  return sum;
}

namespace {

// Cell index and fractional offset along one axis; false when outside.
bool locate(const GridSpec& g, double x, int& k, double& s) {
  const double lim = g.half_width() * (1.0 + 1e-12);
  if (!(std::abs(x) <= lim)) return false;
  double pos = x / g.spacing() + (g.points() - 1) / 2;
  // Snap to a node when rounding lands next to it, so node queries are exact.
  const double near = std::round(pos);
  if (std::abs(pos - near) < 1e-12) pos = near;
  k = static_cast<int>(std::floor(pos));
  k = std::clamp(k, 0, g.points() - 2);
  s = std::clamp(pos - k, 0.0, 1.0);
  return true;
}

}  // namespace

double interpolate(const SampledField& f, const Point& x) {
  const GridSpec& g = f.grid();
  int k0 = 0;
  double s0 = 0.0;
  if (!locate(g, x[0], k0, s0)) return f.exterior();
  if (g.dim() == 1) {
    const double a = f[k0];
    const double b = f[k0 + 1];
    if (s0 == 0.0) return a;
    return a + s0 * (b - a);
  }
  int k1 = 0;
  double s1 = 0.0;
  if (!locate(g, x[1], k1, s1)) return f.exterior();
  const double f00 = f[g.flat_index(k0, k1)];
  const double f01 = f[g.flat_index(k0, k1 + 1)];
  const double f10 = f[g.flat_index(k0 + 1, k1)];
  const double f11 = f[g.flat_index(k0 + 1, k1 + 1)];
  const double lo = f00 + s1 * (f01 - f00);
  const double hi = f10 + s1 * (f11 - f10);
  return lo + s0 * (hi - lo);
}

double convolve_scaled(const SampledField& f, const SampledField& phi, double t, const Point& y) {
  const GridSpec& kg = phi.grid();
  if (kg.dim() != f.grid().dim()) throw InvalidArgument("kernel and field dimensions differ");
  const auto q = kg.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < kg.size(); ++i) {
    const double v = phi[i];
    if (!std::isfinite(v)) throw InvalidArgument("kernel values must be finite");
    if (v == 0.0) continue;
    const Point u = kg.node(i);
    const Point z{y[0] - t * u[0], y[1] - t * u[1]};
    sum += q[i] * v * interpolate(f, z);
  }
  return sum;
}

void write_field_csv(std::ostream& out, const SampledField& f) {
  const GridSpec& g = f.grid();
  out << (g.dim() == 1 ? "x1,value\n" : "x1,x2,value\n");
  char buf[96];
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point x = g.node(i);
    if (g.dim() == 1)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[0], f[i]);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0], x[1], f[i]);
    out << buf;
  }
  if (!out) throw IoError("failed to write field CSV");
}

SampledField read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty field CSV");
  int dim = 0;
  if (line == "x1,value")
    dim = 1;
  else if (line == "x1,x2,value")
    dim = 2;
  else
    throw IoError("unrecognized field CSV header: " + line);

  std::vector<double> values;
  double max_coord = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    if (static_cast<int>(cols.size()) != dim + 1) throw IoError("malformed field CSV row: " + line);
    for (int a = 0; a < dim; ++a) max_coord = std::max(max_coord, std::abs(cols[a]));
    values.push_back(cols[dim]);
  }
  const auto n = values.size();
  int points = dim == 1 ? static_cast<int>(n) : static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (dim == 2 && static_cast<std::size_t>(points) * points != n) throw IoError("2D field CSV is not square");
  return SampledField(GridSpec::general(dim, max_coord, points), std::move(values));
}

}  // namespace sqlab
