#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlab/grid.hpp"

namespace sqlab {

enum class WeightKind { kConstant, kPower, kPiecewiseConstant };

/**
 * Analytic weight description.
 *   constant:            w = level
 *   power:               w = scale * |x - center|^gamma
 *   piecewise_constant:  w = levels[i] on the i-th interval of x1 cut by `breaks`
 */
struct WeightSpec {
  WeightKind kind = WeightKind::kConstant;
  double level = 1.0;
  double gamma = 0.0;
  Point center{0.0, 0.0};
  double scale = 1.0;
  std::vector<double> breaks;  // increasing
  std::vector<double> levels;  // breaks.size() + 1 entries

  static WeightSpec constant(double c);
  static WeightSpec power(double gamma, Point center = {0.0, 0.0}, double scale = 1.0);
  static WeightSpec piecewise(std::vector<double> breaks, std::vector<double> levels);

  void validate() const;
  // Power kind: gamma in (-n, n(p-1)). Constant and piecewise kinds are always admissible.
  bool admissible(int dim, double p) const;
  std::string describe() const;

  // Values of w^sigma at the grid nodes. A power weight whose center sits on
  // a node gets the exact cell average of |x - center|^(gamma sigma) there.
  std::vector<double> sample(const GridSpec& grid, double sigma = 1.0) const;

  nlohmann::json to_json() const;
  static WeightSpec from_json(const nlohmann::json& j);
};

// nu = w^(1 - p'), the dual weight. Errors for piecewise weights with nonpositive pieces.
WeightSpec dual_weight(const WeightSpec& w, double p);

struct Ball {
  Point center{0.0, 0.0};
  double radius = 1.0;

  Ball scaled(double factor) const { return {center, radius * factor}; }
  bool inside(const GridSpec& grid) const;
};

/// Quadrature restricted to a ball: interior nodes keep q_i, nodes on the sphere get q_i/2.
struct BallMask {
  std::vector<std::uint32_t> nodes;  // ascending
  std::vector<double> weights;
  double volume() const;  // sum of weights, the discrete |B|
};
BallMask ball_mask(const GridSpec& grid, const Ball& ball);

class BallFamily {
 public:
  // Radii r0 * 2^j (j = 0..j_max) crossed with centers on spacing * Z^n, keeping
  // the balls contained in the box. k_max is the longest enlargement chain
  // (2B, ..., 2^(k_max+1) B) that chain checks may ask for.
  static BallFamily dyadic(const GridSpec& grid, double r0, int j_max, double spacing, int k_max);
  static BallFamily listed(const GridSpec& grid, std::vector<Ball> balls, int k_max = 0);
  // The members at `keep` (in that order); `tag` is appended to the id.
  BallFamily restrict(const std::vector<std::size_t>& keep, const std::string& tag) const;

  const std::vector<Ball>& balls() const { return balls_; }
  std::size_t size() const { return balls_.size(); }
  const Ball& operator[](std::size_t i) const { return balls_[i]; }
  const BallMask& mask(std::size_t i) const { return masks_[i]; }
  const GridSpec& grid() const { return grid_; }
  int k_max() const { return k_max_; }
  const std::string& id() const { return id_; }

  // Index of the ball with this center and radius, or -1.
  int find(const Ball& b) const;
  // Balls B for which 2^j B is in the family for every j = 1..k+1.
  std::vector<std::size_t> chain_roots(int k) const;

 private:
  BallFamily(GridSpec grid, std::vector<Ball> balls, int k_max, std::string id);

  GridSpec grid_;
  std::vector<Ball> balls_;
  std::vector<BallMask> masks_;
  int k_max_ = 0;
  std::string id_;
};

// w(B) on the grid quadrature restricted to B.
double weighted_measure(const GridSpec& grid, const WeightSpec& w, const Ball& ball);

struct ApReport {
  double p = 2.0;
  std::vector<double> per_ball;
  double supremum = 0.0;
  std::size_t argmax = 0;
  bool overflow = false;    // a quadrature left the float range
  bool admissible = true;   // power exponent inside (-n, n(p-1))
  std::string family_id;
};
ApReport ap_characteristic(const WeightSpec& w, double p, const BallFamily& balls);

struct RhReport {
  double r = 2.0;
  std::vector<double> per_ball;
  double supremum = 0.0;
  bool overflow = false;
};
RhReport rh_report(const WeightSpec& w, double r, const BallFamily& balls);
double rh_constant(const WeightSpec& w, double r, const BallFamily& balls);

struct DoublingEntry {
  std::size_t ball = 0;
  double factor = 2.0;
  double ratio = 0.0;       // w(lambda B) / w(B)
  double normalized = 0.0;  // ratio / lambda^(n p)
};
struct DoublingReport {
  std::vector<DoublingEntry> entries;
  double max_ratio = 0.0;
  double max_normalized = 0.0;  // the empirical doubling constant C
};
DoublingReport doubling_report(const WeightSpec& w, double p, const BallFamily& balls,
                               const std::vector<double>& factors);

/// One checked inequality lhs <= rhs (+ tolerance).
struct InequalityReport {
  std::string digest;  // case description
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  std::string constant_provenance;  // "explicit" or "empirical-family-max"
  double ratio = 0.0;               // lhs / rhs (0 when both vanish)
  double slack = 0.0;               // rhs - lhs
  bool pass = false;
};
InequalityReport make_inequality(std::string digest, double lhs, double rhs, double constant,
                                 std::string provenance, double tolerance);

// w(E)/w(B) <= C_rh(B) (|E|/|B|)^((r-1)/r), E given as node indices inside B.
std::vector<InequalityReport> subset_ratio_check(const GridSpec& grid, const WeightSpec& w, double r,
                                                 const Ball& ball,
                                                 const std::vector<std::vector<std::uint32_t>>& subsets);

}  // namespace sqlab
