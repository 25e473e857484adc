#include "sqlab/spaces.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "sqlab/error.hpp"

namespace sqlab {

namespace {

void require_same_grid(const SampledField& f, const BallFamily& balls) {
  if (!(f.grid() == balls.grid())) throw InvalidArgument("field and ball family live on different grids");
}

double masked_sum(const BallMask& m, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t k = 0; k < m.nodes.size(); ++k) s += m.weights[k] * v[m.nodes[k]];
  return s;
}

void take_max(NormReport& r) {
  for (std::size_t i = 0; i < r.per_ball.size(); ++i) {
    if (i == 0 || r.per_ball[i] > r.value) {
      r.value = r.per_ball[i];
      r.achieving_ball = i;
    }
  }
}

}  // namespace

void MorreyParams::validate() const {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("Morrey exponent p must lie in [1, inf)");
  if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidArgument("Morrey parameter kappa must lie in (0, 1)");
}

nlohmann::json NormReport::to_json() const {
  return {{"value", value}, {"achieving_ball", achieving_ball}, {"per_ball", per_ball}, {"family_id", family_id}};
}

double lebesgue_norm(const SampledField& f, double p, const WeightSpec& w) {
  if (!(p >= 1.0)) throw InvalidArgument("Lebesgue exponent must be >= 1");
  const auto wv = w.sample(f.grid());
  const auto q = f.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += q[i] * std::pow(std::abs(f[i]), p) * wv[i];
  return std::pow(s, 1.0 / p);
}

NormReport morrey_norm(const SampledField& f, const MorreyParams& mp, const WeightSpec& w, const BallFamily& balls) {
  mp.validate();
  require_same_grid(f, balls);
  const auto wv = w.sample(f.grid());
  std::vector<double> fw(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fw[i] = std::pow(std::abs(f[i]), mp.p) * wv[i];
  NormReport r;
  r.family_id = balls.id();
  r.per_ball.resize(balls.size());
  for (std::size_t b = 0; b < balls.size(); ++b) {
    const double wb = masked_sum(balls.mask(b), wv);
    if (!(wb > 0.0)) throw InvalidArgument("weight has zero mass on a family ball");
    r.per_ball[b] = std::pow(std::pow(wb, -mp.kappa) * masked_sum(balls.mask(b), fw), 1.0 / mp.p);
  }
  take_max(r);
  return r;
}

double ball_average(const SampledField& b, const BallMask& mask) { return masked_sum(mask, b.values()) / mask.volume(); }

double ball_average(const SampledField& b, const Ball& ball) { return ball_average(b, ball_mask(b.grid(), ball)); }

namespace {

double oscillation(const SampledField& b, const BallMask& m, double p) {
  const double avg = ball_average(b, m);
  double s = 0.0;
  for (std::size_t k = 0; k < m.nodes.size(); ++k) s += m.weights[k] * std::pow(std::abs(b[m.nodes[k]] - avg), p);
  return std::pow(s / m.volume(), 1.0 / p);
}

}  // namespace

NormReport bmo_norm(const SampledField& b, const BallFamily& balls) {
  require_same_grid(b, balls);
  NormReport r;
  r.family_id = balls.id();
  r.per_ball.resize(balls.size());
  for (std::size_t i = 0; i < balls.size(); ++i) r.per_ball[i] = oscillation(b, balls.mask(i), 1.0);
  take_max(r);
  return r;
}

double bmo_oscillation_p(const SampledField& b, const Ball& ball, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("oscillation exponent must be >= 1");
  return oscillation(b, ball_mask(b.grid(), ball), p);
}

SampledField weighted_maximal(const SampledField& f, const WeightSpec& w, const BallFamily& balls) {
  require_same_grid(f, balls);
  const auto wv = w.sample(f.grid());
  std::vector<double> fw(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fw[i] = std::abs(f[i]) * wv[i];
  const double unset = -std::numeric_limits<double>::infinity();
  std::vector<double> out(f.size(), unset);
  for (std::size_t b = 0; b < balls.size(); ++b) {
    const auto& m = balls.mask(b);
    const double avg = masked_sum(m, fw) / masked_sum(m, wv);
    for (std::uint32_t node : m.nodes) out[node] = std::max(out[node], avg);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == unset) {
      const Point x = f.grid().node(i);
      char msg[200];
      std::snprintf(msg, sizeof msg,
                    "node (%.6g, %.6g) lies in no family ball; use a family whose balls cover the grid", x[0], x[1]);
      throw InvalidArgument(msg);
    }
  }
  return SampledField(f.grid(), std::move(out));
}

}  // namespace sqlab
