#include "sqlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <tuple>

#include "sqlab/error.hpp"

namespace sqlab {

namespace {

// Average of |x|^a over the cell [-h/2, h/2]^dim; +inf when not integrable.
double singular_cell_average(int dim, double h, double a) {
  if (a <= -static_cast<double>(dim)) return INFINITY;
  const double half = 0.5 * h;
  if (dim == 1) return std::pow(half, a) / (a + 1.0);
  // Polar coordinates over one of the eight triangles of the square.
  const int steps = 2000;
  const double top = std::numbers::pi / 4.0;
  const double dt = top / steps;
  double integral = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    integral += w * std::pow(1.0 / std::cos(i * dt), a + 2.0);
  }
  integral *= dt / 3.0;
  return 8.0 / (h * h) * std::pow(half, a + 2.0) / (a + 2.0) * integral;
}

std::string kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::kConstant:
      return "constant";
    case WeightKind::kPower:
      return "power";
    case WeightKind::kPiecewiseConstant:
      return "piecewise_constant";
  }
  return "?";
}

double sum_over(const BallMask& m, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < m.nodes.size(); ++k) s += m.weights[k] * v[m.nodes[k]];
  return s;
}

}  // namespace

WeightSpec WeightSpec::constant(double c) {
  WeightSpec w;
  w.kind = WeightKind::kConstant;
  w.level = c;
  w.validate();
  return w;
}

WeightSpec WeightSpec::power(double gamma, Point center, double scale) {
  WeightSpec w;
  w.kind = WeightKind::kPower;
  w.gamma = gamma;
  w.center = center;
  w.scale = scale;
  w.validate();
  return w;
}

WeightSpec WeightSpec::piecewise(std::vector<double> breaks, std::vector<double> levels) {
  WeightSpec w;
  w.kind = WeightKind::kPiecewiseConstant;
  w.breaks = std::move(breaks);
  w.levels = std::move(levels);
  w.validate();
  return w;
}

void WeightSpec::validate() const {
  switch (kind) {
    case WeightKind::kConstant:
      if (!(level > 0.0) || !std::isfinite(level)) throw InvalidArgument("constant weight level must be positive");
      break;
    case WeightKind::kPower:
      if (!std::isfinite(gamma)) throw InvalidArgument("power weight exponent must be finite");
      if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("power weight scale must be positive");
      if (!std::isfinite(center[0]) || !std::isfinite(center[1]))
        throw InvalidArgument("power weight center must be finite");
      break;
    case WeightKind::kPiecewiseConstant:
      if (levels.size() != breaks.size() + 1)
        throw InvalidArgument("piecewise weight needs one more level than breaks");
      if (!std::is_sorted(breaks.begin(), breaks.end()) ||
          std::adjacent_find(breaks.begin(), breaks.end()) != breaks.end())
        throw InvalidArgument("piecewise weight breaks must be strictly increasing");
      for (double v : levels)
        if (!std::isfinite(v)) throw InvalidArgument("piecewise weight levels must be finite");
      break;
  }
}

bool WeightSpec::admissible(int dim, double p) const {
  if (kind != WeightKind::kPower) return true;
  return gamma > -dim && gamma < dim * (p - 1.0);
}

std::string WeightSpec::describe() const { return to_json().dump(); }

std::vector<double> WeightSpec::sample(const GridSpec& grid, double sigma) const {
  std::vector<double> v(grid.size());
  const double h = grid.spacing();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.node(i);
    switch (kind) {
      case WeightKind::kConstant:
        v[i] = std::pow(level, sigma);
        break;
      case WeightKind::kPiecewiseConstant: {
        const auto k = std::upper_bound(breaks.begin(), breaks.end(), x[0]) - breaks.begin();
        const double lv = levels[static_cast<std::size_t>(k)];
        if (!(lv > 0.0)) throw InvalidArgument("piecewise weight must be positive where it is sampled");
        v[i] = std::pow(lv, sigma);
        break;
      }
      case WeightKind::kPower: {
        const double r = distance(x, center, grid.dim());
        const double a = gamma * sigma;
        const double s = std::pow(scale, sigma);
        v[i] = r < 1e-9 * h ? s * singular_cell_average(grid.dim(), h, a) : s * std::pow(r, a);
        break;
      }
    }
  }
  return v;
}

nlohmann::json WeightSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_name(kind);
  switch (kind) {
    case WeightKind::kConstant:
      j["level"] = level;
      break;
    case WeightKind::kPower:
      j["gamma"] = gamma;
      j["center"] = {center[0], center[1]};
      j["scale"] = scale;
      break;
    case WeightKind::kPiecewiseConstant:
      j["breaks"] = breaks;
      j["levels"] = levels;
      break;
  }
  return j;
}

WeightSpec WeightSpec::from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return constant(j.value("level", 1.0));
    if (kind == "power") {
      Point c{0.0, 0.0};
      if (j.contains("center")) {
        const auto& arr = j.at("center");
        if (!arr.is_array() || arr.empty() || arr.size() > 2) throw ConfigError("weight center must list 1 or 2 coordinates");
        for (std::size_t a = 0; a < arr.size(); ++a) c[a] = arr[a].get<double>();
      }
      return power(j.at("gamma").get<double>(), c, j.value("scale", 1.0));
    }
    if (kind == "piecewise_constant")
      return piecewise(j.at("breaks").get<std::vector<double>>(), j.at("levels").get<std::vector<double>>());
    throw ConfigError("unknown weight kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed weight spec: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid weight spec: ") + e.what());
  }
}

WeightSpec dual_weight(const WeightSpec& w, double p) {
  if (!(p > 1.0)) throw InvalidArgument("dual weight needs p > 1");
  const double e = 1.0 - p / (p - 1.0);  // 1 - p'
  switch (w.kind) {
    case WeightKind::kConstant:
      return WeightSpec::constant(std::pow(w.level, e));
    case WeightKind::kPower:
      return WeightSpec::power(w.gamma * e, w.center, std::pow(w.scale, e));
    case WeightKind::kPiecewiseConstant: {
      std::vector<double> lv(w.levels);
      for (double& v : lv) {
        if (!(v > 0.0)) throw InvalidArgument("dual weight of a piecewise weight with a nonpositive piece");
        v = std::pow(v, e);
      }
      return WeightSpec::piecewise(w.breaks, std::move(lv));
    }
  }
  throw InvalidArgument("unknown weight kind");
}

bool Ball::inside(const GridSpec& grid) const {
  if (!(radius > 0.0)) return false;
  const double lim = grid.half_width() * (1.0 + 1e-12);
  for (int a = 0; a < grid.dim(); ++a)
    if (std::abs(center[a]) + radius > lim) return false;
  return true;
}

double BallMask::volume() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

BallMask ball_mask(const GridSpec& grid, const Ball& ball) {
  if (!ball.inside(grid)) throw InvalidArgument("ball is not contained in the grid box");
  const double h = grid.spacing();
  const int c = (grid.points() - 1) / 2;
  const double tol = 1e-12 * std::max(ball.radius, h);
  std::array<int, 2> lo{0, 0}, hi{0, 0};
  for (int a = 0; a < grid.dim(); ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((ball.center[a] - ball.radius) / h)) + c - 1);
    hi[a] = std::min(grid.points() - 1, static_cast<int>(std::ceil((ball.center[a] + ball.radius) / h)) + c + 1);
  }
  const auto q = grid.weights();
  BallMask m;
  auto visit = [&](std::size_t idx) {
    const double d = distance(grid.node(idx), ball.center, grid.dim());
    if (d < ball.radius - tol) {
      m.nodes.push_back(static_cast<std::uint32_t>(idx));
      m.weights.push_back(q[idx]);
    } else if (d <= ball.radius + tol) {
      m.nodes.push_back(static_cast<std::uint32_t>(idx));
      m.weights.push_back(0.5 * q[idx]);
    }
  };
  if (grid.dim() == 1) {
    for (int i = lo[0]; i <= hi[0]; ++i) visit(grid.flat_index(i, 0));
  } else {
    for (int i = lo[0]; i <= hi[0]; ++i)
      for (int j = lo[1]; j <= hi[1]; ++j) visit(grid.flat_index(i, j));
  }
  if (m.nodes.empty()) throw InvalidArgument("ball contains no grid node");
  return m;
}

BallFamily::BallFamily(GridSpec grid, std::vector<Ball> balls, int k_max, std::string id)
    : grid_(std::move(grid)), balls_(std::move(balls)), k_max_(k_max), id_(std::move(id)) {
  if (balls_.empty()) throw InvalidArgument("ball family is empty");
  masks_.reserve(balls_.size());
  for (const auto& b : balls_) masks_.push_back(ball_mask(grid_, b));
}

BallFamily BallFamily::dyadic(const GridSpec& grid, double r0, int j_max, double spacing, int k_max) {
  if (!(r0 > 0.0) || j_max < 0 || !(spacing > 0.0) || k_max < 0)
    throw InvalidArgument("dyadic ball family needs r0 > 0, j_max >= 0, spacing > 0, k_max >= 0");
  const double L = grid.half_width();
  const int kc = static_cast<int>(std::floor(L / spacing * (1.0 + 1e-12)));
  std::vector<double> axis;
  for (int k = -kc; k <= kc; ++k) axis.push_back(k * spacing);
  std::vector<Ball> balls;
  for (int j = 0; j <= j_max; ++j) {
    const double r = std::ldexp(r0, j);
    for (double x0 : axis) {
      if (grid.dim() == 1) {
        Ball b{{x0, 0.0}, r};
        if (b.inside(grid)) balls.push_back(b);
      } else {
        for (double x1 : axis) {
          Ball b{{x0, x1}, r};
          if (b.inside(grid)) balls.push_back(b);
        }
      }
    }
  }
  char id[160];
  std::snprintf(id, sizeof id, "dyadic(r0=%.17g,j_max=%d,spacing=%.17g,k_max=%d)", r0, j_max, spacing, k_max);
  return BallFamily(grid, std::move(balls), k_max, id);
}

BallFamily BallFamily::listed(const GridSpec& grid, std::vector<Ball> balls, int k_max) {
  std::string id = "listed(";
  char buf[96];
  for (std::size_t i = 0; i < balls.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s[%.17g,%.17g;%.17g]", i ? "," : "", balls[i].center[0], balls[i].center[1],
                  balls[i].radius);
    id += buf;
  }
  id += ")";
  return BallFamily(grid, std::move(balls), k_max, id);
}

BallFamily BallFamily::restrict(const std::vector<std::size_t>& keep, const std::string& tag) const {
  std::vector<Ball> balls;
  balls.reserve(keep.size());
  for (std::size_t i : keep) balls.push_back(balls_.at(i));
  return BallFamily(grid_, std::move(balls), k_max_, id_ + "|" + tag);
}

int BallFamily::find(const Ball& b) const {
  for (std::size_t i = 0; i < balls_.size(); ++i)
    if (balls_[i].center == b.center && balls_[i].radius == b.radius) return static_cast<int>(i);
  return -1;
}

std::vector<std::size_t> BallFamily::chain_roots(int k) const {
  std::map<std::tuple<double, double, double>, std::size_t> index;
  for (std::size_t i = 0; i < balls_.size(); ++i)
    index.emplace(std::make_tuple(balls_[i].center[0], balls_[i].center[1], balls_[i].radius), i);
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    bool ok = true;
    for (int j = 1; j <= k + 1 && ok; ++j)
      ok = index.count(std::make_tuple(balls_[i].center[0], balls_[i].center[1], std::ldexp(balls_[i].radius, j))) > 0;
    if (ok) roots.push_back(i);
  }
  return roots;
}

double weighted_measure(const GridSpec& grid, const WeightSpec& w, const Ball& ball) {
  return sum_over(ball_mask(grid, ball), w.sample(grid));
}

ApReport ap_characteristic(const WeightSpec& w, double p, const BallFamily& balls) {
  if (!(p > 1.0)) throw InvalidArgument("A_p characteristic needs p > 1");
  const GridSpec& g = balls.grid();
  const auto wv = w.sample(g, 1.0);
  const auto vv = w.sample(g, -1.0 / (p - 1.0));
  ApReport rep;
  rep.p = p;
  rep.family_id = balls.id();
  rep.admissible = w.admissible(g.dim(), p);
  rep.per_ball.resize(balls.size());
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const auto& m = balls.mask(i);
    const double vol = m.volume();
    const double aw = sum_over(m, wv) / vol;
    const double av = sum_over(m, vv) / vol;
    const double prod = aw * std::pow(av, p - 1.0);
    if (!std::isfinite(prod)) rep.overflow = true;
    rep.per_ball[i] = prod;
    if (i == 0 || prod > rep.supremum) {
      rep.supremum = prod;
      rep.argmax = i;
    }
  }
  return rep;
}

RhReport rh_report(const WeightSpec& w, double r, const BallFamily& balls) {
  if (!(r > 1.0)) throw InvalidArgument("reverse Hölder exponent must exceed 1");
  const GridSpec& g = balls.grid();
  const auto wv = w.sample(g, 1.0);
  const auto wr = w.sample(g, r);
  RhReport rep;
  rep.r = r;
  rep.per_ball.resize(balls.size());
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const auto& m = balls.mask(i);
    const double vol = m.volume();
    const double q = std::pow(sum_over(m, wr) / vol, 1.0 / r) / (sum_over(m, wv) / vol);
    if (!std::isfinite(q)) rep.overflow = true;
    rep.per_ball[i] = q;
    rep.supremum = i == 0 ? q : std::max(rep.supremum, q);
  }
  return rep;
}

double rh_constant(const WeightSpec& w, double r, const BallFamily& balls) { return rh_report(w, r, balls).supremum; }

DoublingReport doubling_report(const WeightSpec& w, double p, const BallFamily& balls,
                               const std::vector<double>& factors) {
  const GridSpec& g = balls.grid();
  const auto wv = w.sample(g);
  DoublingReport rep;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const double wb = sum_over(balls.mask(i), wv);
    for (double lam : factors) {
      if (!(lam > 1.0)) throw InvalidArgument("doubling factors must exceed 1");
      const Ball big = balls[i].scaled(lam);
      if (!big.inside(g)) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "enlarged ball %zu (center %.6g, radius %.6g) leaves the box", i,
                      big.center[0], big.radius);
        throw InvalidArgument(msg);
      }
      const double ratio = sum_over(ball_mask(g, big), wv) / wb;
      const double norm = ratio / std::pow(lam, g.dim() * p);
      rep.entries.push_back({i, lam, ratio, norm});
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      rep.max_normalized = std::max(rep.max_normalized, norm);
    }
  }
  return rep;
}

InequalityReport make_inequality(std::string digest, double lhs, double rhs, double constant,
                                 std::string provenance, double tolerance) {
  InequalityReport r;
  r.digest = std::move(digest);
  r.lhs = lhs;
  r.rhs = rhs;
  r.constant = constant;
  r.constant_provenance = std::move(provenance);
  r.slack = rhs - lhs;
  r.ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
  r.pass = std::isfinite(lhs) && std::isfinite(rhs) && r.slack >= -tolerance;
  return r;
}

std::vector<InequalityReport> subset_ratio_check(const GridSpec& grid, const WeightSpec& w, double r,
                                                 const Ball& ball,
                                                 const std::vector<std::vector<std::uint32_t>>& subsets) {
  if (!(r > 1.0)) throw InvalidArgument("reverse Hölder exponent must exceed 1");
  const BallMask m = ball_mask(grid, ball);
  const auto wv = w.sample(grid, 1.0);
  const auto wr = w.sample(grid, r);
  const double vol = m.volume();
  const double wb = sum_over(m, wv);
  const double crh = std::pow(sum_over(m, wr) / vol, 1.0 / r) / (wb / vol);

  std::vector<InequalityReport> out;
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    double we = 0.0, ve = 0.0;
    for (std::uint32_t node : subsets[s]) {
      const auto it = std::lower_bound(m.nodes.begin(), m.nodes.end(), node);
      if (it == m.nodes.end() || *it != node) throw InvalidArgument("subset node lies outside the ball");
      const double q = m.weights[static_cast<std::size_t>(it - m.nodes.begin())];
      we += q * wv[node];
      ve += q;
    }
    char digest[160];
    std::snprintf(digest, sizeof digest, "subset %zu of B(%.6g,%.6g; %.6g), |E|/|B|=%.6g", s, ball.center[0],
                  ball.center[1], ball.radius, ve / vol);
    out.push_back(make_inequality(digest, we / wb, crh * std::pow(ve / vol, (r - 1.0) / r), crh, "explicit", 1e-10));
  }
  return out;
}

}  // namespace sqlab
