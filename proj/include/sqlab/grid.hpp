#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace sqlab {

// A point of R^dim; the second coordinate is ignored (and kept at 0) in 1D.
using Point = std::array<double, 2>;

double distance(const Point& a, const Point& b, int dim);

/**
 * Uniform tensor grid over the box [-L, L]^dim with N nodes per axis.
 *
 * N is odd so the origin is a node, and node coordinates are computed as
 * (k - (N-1)/2) * spacing, which makes the node set exactly symmetric.
 * Flat indices are row-major: the first coordinate varies slowest.
 */
class GridSpec {
 public:
  // Spatial grid: dim in {1,2}, L > 0, N odd and >= 33.
  static GridSpec spatial(int dim, double half_width, int points);
  // Kernel grid on [-1,1]^dim: m odd, >= 33 in 1D and >= 17 in 2D.
  static GridSpec kernel(int dim, int points);
  // Basic validation only (dim in {1,2}, L > 0, N odd and >= 3).
  static GridSpec general(int dim, double half_width, int points);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int points() const { return points_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return size_; }
  double volume() const;

  double coordinate(int k) const { return (k - center_) * spacing_; }
  Point node(std::size_t index) const;
  std::array<int, 2> multi_index(std::size_t index) const;
  std::size_t flat_index(int i0, int i1 = 0) const;

  // Closed-box membership (with a relative tolerance of 1e-12).
  bool contains(const Point& x) const;

  // Product-trapezoid quadrature weights, one per node.
  std::span<const double> weights() const { return *weights_; }

  bool operator==(const GridSpec& other) const;

 private:
  GridSpec(int dim, double half_width, int points);

  int dim_ = 1;
  double half_width_ = 1.0;
  int points_ = 0;
  int center_ = 0;
  double spacing_ = 0.0;
  std::size_t size_ = 0;
  std::shared_ptr<const std::vector<double>> weights_;
};

/**
 * Real samples on a GridSpec, one value per node in row-major order.
 *
 * `exterior` is the value taken outside the box: 0 for the compactly
 * supported fields (the default), c for constant fields so that they stay
 * constant on the whole space. Pointwise maps propagate it.
 */
class SampledField {
 public:
  SampledField(GridSpec grid, std::vector<double> values, double exterior = 0.0);
  static SampledField constant(const GridSpec& grid, double value);
  static SampledField from_function(const GridSpec& grid,
                                    const std::function<double(const Point&)>& fn);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double exterior() const { return exterior_; }
  std::size_t size() const { return values_.size(); }

  SampledField scaled(double c) const;
  // Pointwise maps; both fields must share the grid.
  SampledField plus(const SampledField& other) const;
  SampledField times(const SampledField& other) const;
  SampledField shifted(double c) const;

  double sup_abs() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
  double exterior_ = 0.0;
};

/// Geometric ladder of scales t_k between t_min and t_max.
class TimeLadder {
 public:
  // Requires t_min >= spacing of `grid`, t_max <= 2L, t_min < t_max, levels >= 8.
  static TimeLadder make(const GridSpec& grid, double t_min, double t_max, int levels);

  double t_min() const { return nodes_.front(); }
  double t_max() const { return nodes_.back(); }
  int levels() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  // Trapezoid weights in log t, i.e. the discrete dt/t.
  std::span<const double> log_weights() const { return log_weights_; }

  bool operator==(const TimeLadder& other) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> log_weights_;
};

/// Sum of q_i f_i in index order.
double integrate(const SampledField& f);

/// Multilinear interpolation; f.exterior() outside the closed box.
double interpolate(const SampledField& f, const Point& x);

/**
 * Quadrature approximation of (f * phi_t)(y) = int phi(u) f(y - t u) du,
 * summed over the kernel grid of `phi` in index order.
 * Throws InvalidArgument on non-finite kernel values.
 */
double convolve_scaled(const SampledField& f, const SampledField& phi, double t, const Point& y);

// Field CSV: header `x1[,x2],value`, one row per node, %.17g decimals.
void write_field_csv(std::ostream& out, const SampledField& f);
SampledField read_field_csv(std::istream& in);

}  // namespace sqlab
