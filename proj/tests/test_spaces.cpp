#include <cmath>
#include <random>

#include "doctest.h"
#include "sqlab/error.hpp"
#include "sqlab/families.hpp"
#include "sqlab/spaces.hpp"

using namespace sqlab;

namespace {

const GridSpec g257 = GridSpec::spatial(1, 4.0, 257);

// Jump functions take the midpoint value on the jump node, so the trapezoid
// quadrature integrates them exactly.
SampledField indicator(const GridSpec& g, double lo, double hi, double edge = 0.5) {
  return function_from_json({{"kind", "indicator"}, {"lo", lo}, {"hi", hi}, {"edge", edge}}).sample(g);
}
SampledField step(const GridSpec& g) {
  return SampledField::from_function(g, [](const Point& x) { return x[0] > 0 ? 1.0 : (x[0] == 0 ? 0.5 : 0.0); });
}

SampledField random_field(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(g.size());
  for (double& x : v) x = 2.0 * unit_uniform(rng) - 1.0;
  return SampledField(g, std::move(v));
}

BallFamily dyadic(const GridSpec& g) { return BallFamily::dyadic(g, g.spacing(), 6, 0.25, 0); }

}  // namespace

TEST_CASE("lebesgue norm examples") {
  const auto one = WeightSpec::constant(1.0);
  CHECK(lebesgue_norm(SampledField::constant(g257, 0.0), 2.0, one) == 0.0);
  // |f|^2 halves the end value again, so the end nodes cost h/2; refine until that is below tolerance.
  const auto fine = GridSpec::spatial(1, 4.0, 2049);
  CHECK(std::abs(lebesgue_norm(indicator(fine, -1.0, 1.0), 2.0, one) - std::sqrt(2.0)) <= 1e-3);
  CHECK(std::abs(lebesgue_norm(indicator(g257, -1.0, 1.0), 1.0, one) - 2.0) <= 1e-12);
  const auto r = random_field(g257, 7);
  const auto w = WeightSpec::power(0.5);
  CHECK(lebesgue_norm(r.scaled(-3.0), 3.0, w) == doctest::Approx(3.0 * lebesgue_norm(r, 3.0, w)).epsilon(1e-14));
  const auto s = random_field(g257, 8);
  for (double p : {1.0, 2.0, 3.5})
    CHECK(lebesgue_norm(r.plus(s), p, w) <= lebesgue_norm(r, p, w) + lebesgue_norm(s, p, w) + 1e-10);
}

TEST_CASE("Morrey norm examples") {
  const auto one = WeightSpec::constant(1.0);
  const auto fam = BallFamily::listed(g257, {Ball{{0, 0}, 0.5}, Ball{{0, 0}, 1.0}, Ball{{0, 0}, 2.0}});
  // Ball sums are trapezoid sums over the closed ball, so the closed indicator is exact on B(0,1).
  const auto f = indicator(g257, -1.0, 1.0, 1.0);
  const auto rep = morrey_norm(f, {1.0, 0.5}, one, fam);
  CHECK(std::abs(rep.value - std::sqrt(2.0)) <= 1e-3);
  CHECK(rep.achieving_ball == 1);
  REQUIRE(rep.per_ball.size() == 3);
  CHECK(std::abs(rep.per_ball[0] - 1.0) <= 1e-3);
  CHECK(std::abs(rep.per_ball[2] - 1.0) <= g257.spacing());  // end nodes are interior to B(0,2)
  CHECK(rep.family_id == fam.id());

  CHECK(morrey_norm(SampledField::constant(g257, 0.0), {2.0, 0.5}, one, fam).value == 0.0);

  const auto dy = dyadic(g257);
  const auto w = WeightSpec::power(0.5);
  const auto r = random_field(g257, 11);
  const auto s = random_field(g257, 12);
  for (MorreyParams mp : {MorreyParams{2.0, 0.5}, MorreyParams{3.0, 0.25}}) {
    const auto a = morrey_norm(r, mp, w, dy);
    CHECK(morrey_norm(r.scaled(2.0), mp, w, dy).value == doctest::Approx(2.0 * a.value).epsilon(1e-12));
    CHECK(morrey_norm(r.plus(s), mp, w, dy).value <= a.value + morrey_norm(s, mp, w, dy).value + 1e-10);
    for (double v : a.per_ball) CHECK(v <= a.value);
    CHECK(a.per_ball[a.achieving_ball] == a.value);
  }
  CHECK_THROWS_AS((MorreyParams{2.0, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((MorreyParams{0.5, 0.5}).validate(), InvalidArgument);
}

TEST_CASE("ball averages") {
  CHECK(ball_average(SampledField::constant(g257, 7.0), Ball{{0.5, 0}, 1.0}) == doctest::Approx(7.0).epsilon(1e-15));
  const auto x = SampledField::from_function(g257, [](const Point& p) { return p[0]; });
  CHECK(std::abs(ball_average(x, Ball{{0, 0}, 1.5})) <= 1e-10);
  CHECK(std::abs(ball_average(step(g257), Ball{{0, 0}, 1.0}) - 0.5) <= 1e-3);
}

TEST_CASE("BMO norm and oscillation examples") {
  const auto dy = dyadic(g257);
  CHECK(bmo_norm(SampledField::constant(g257, 3.0), dy).value == 0.0);
  const auto b = step(g257);
  const auto rep = bmo_norm(b, dy);
  CHECK(std::abs(rep.value - 0.5) <= 2e-2);
  CHECK(std::abs(bmo_norm(b.shifted(4.25), dy).value - rep.value) <= 1e-12);

  const auto fine = GridSpec::spatial(1, 2.0, 1025);
  const Ball unit{{0, 0}, 1.0};
  CHECK(bmo_oscillation_p(SampledField::constant(fine, -2.0), unit, 2.0) == 0.0);
  CHECK(std::abs(bmo_oscillation_p(step(fine), unit, 2.0) - 0.5) <= 1e-3);

  // p = 1 is the integrand of the BMO norm on that ball.
  const auto r = random_field(g257, 21);
  const int k = dy.find(Ball{{0.25, 0}, 0.5});
  REQUIRE(k >= 0);
  CHECK(bmo_oscillation_p(r, dy[k], 1.0) == doctest::Approx(bmo_norm(r, dy).per_ball[k]).epsilon(1e-13));
  double prev = 0.0;
  for (double p : {1.0, 1.5, 2.0, 4.0, 8.0}) {
    const double v = bmo_oscillation_p(r, dy[k], p);
    CHECK(v >= prev - 1e-10);
    prev = v;
  }
}

TEST_CASE("weighted maximal examples") {
  const auto dy = dyadic(g257);
  const auto one = WeightSpec::constant(1.0);
  const auto c = weighted_maximal(SampledField::constant(g257, -1.5), WeightSpec::power(0.5), dy);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c[i] - 1.5) <= 1e-10);

  REQUIRE(dy.find(Ball{{0, 0}, 0.25}) >= 0);
  const auto f = indicator(g257, -0.25, 0.25);
  const auto m = weighted_maximal(f, one, dy);
  CHECK(std::abs(m[128] - 1.0) <= 1e-6);

  const auto r = random_field(g257, 31);
  const auto w = WeightSpec::power(0.5);
  const auto mr = weighted_maximal(r, w, dy);
  const auto wv = w.sample(g257);
  for (std::size_t b = 0; b < dy.size(); b += 7) {
    const auto& mask = dy.mask(b);
    double num = 0, den = 0;
    for (std::size_t k = 0; k < mask.nodes.size(); ++k) {
      num += mask.weights[k] * std::abs(r[mask.nodes[k]]) * wv[mask.nodes[k]];
      den += mask.weights[k] * wv[mask.nodes[k]];
    }
    for (auto node : mask.nodes) CHECK(mr[node] >= num / den - 1e-12);
  }

  const auto sparse = BallFamily::listed(g257, {Ball{{0, 0}, 1.0}});
  CHECK_THROWS_AS(weighted_maximal(r, one, sparse), InvalidArgument);
}

TEST_CASE("norm report json") {
  const auto dy = dyadic(g257);
  const auto j = bmo_norm(step(g257), dy).to_json();
  CHECK(j.contains("value"));
  CHECK(j.contains("achieving_ball"));
  CHECK(j["per_ball"].size() == dy.size());
}
