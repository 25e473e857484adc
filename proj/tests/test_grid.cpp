#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sqlab/error.hpp"
#include "sqlab/grid.hpp"

using namespace sqlab;

TEST_CASE("grid construction and quadrature weights") {
  const auto g = GridSpec::spatial(1, 4.0, 257);
  CHECK(g.spacing() == doctest::Approx(1.0 / 32).epsilon(1e-15));
  CHECK(g.node(128)[0] == 0.0);
  CHECK(g.node(0)[0] == -4.0);
  CHECK(g.node(256)[0] == 4.0);
  double sum = 0.0;
  for (double q : g.weights()) sum += q;
  CHECK(std::abs(sum - 8.0) <= 8.0 * 1e-12);

  const auto g2 = GridSpec::spatial(2, 1.0, 33);
  double s2 = 0.0;
  for (double q : g2.weights()) s2 += q;
  CHECK(std::abs(s2 - 4.0) <= 4.0 * 1e-12);
  CHECK(g2.flat_index(1, 2) == 33 + 2);

  CHECK_THROWS_AS(GridSpec::spatial(1, 1.0, 64), InvalidArgument);
  CHECK_THROWS_AS(GridSpec::spatial(1, 1.0, 31), InvalidArgument);
  CHECK_THROWS_AS(GridSpec::spatial(3, 1.0, 33), InvalidArgument);
  CHECK_THROWS_AS(GridSpec::spatial(1, -1.0, 33), InvalidArgument);
}

TEST_CASE("integrate examples") {
  const auto g = GridSpec::spatial(1, 1.0, 257);
  CHECK(integrate(SampledField::constant(g, 0.0)) == 0.0);
  CHECK(integrate(SampledField::constant(g, 1.0)) == doctest::Approx(2.0).epsilon(1e-12));
  const auto sq = SampledField::from_function(g, [](const Point& x) { return x[0] * x[0]; });
  CHECK(std::abs(integrate(sq) - 2.0 / 3.0) <= 1e-4);
  const auto pos = SampledField::from_function(g, [](const Point& x) { return std::exp(x[0]); });
  CHECK(integrate(pos) >= 0.0);
}

TEST_CASE("interpolate examples") {
  const auto g = GridSpec::spatial(1, 1.0, 65);
  const auto c = SampledField::constant(g, 3.0);
  CHECK(interpolate(c, {0.3123, 0.0}) == 3.0);
  const auto lin = SampledField::from_function(g, [](const Point& x) { return x[0]; });
  const double h = g.spacing();
  CHECK(interpolate(lin, {h / 2, 0.0}) == h / 2);
  CHECK(interpolate(lin, {1.5, 0.0}) == 0.0);
  CHECK(interpolate(lin, {-1.0001, 0.0}) == 0.0);
  // Constant fields keep their value outside the box.
  CHECK(interpolate(c, {7.0, 0.0}) == 3.0);
  CHECK(interpolate(c.scaled(2.0), {7.0, 0.0}) == 6.0);
  CHECK(interpolate(lin.times(c), {7.0, 0.0}) == 0.0);

  const auto g2 = GridSpec::spatial(2, 1.0, 33);
  const auto bil = SampledField::from_function(g2, [](const Point& x) { return 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]; });
  const Point p{0.1234, -0.4321};
  CHECK(interpolate(bil, p) == doctest::Approx(1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1]).epsilon(1e-14));
}

TEST_CASE("convolve_scaled examples") {
  const auto kg = GridSpec::kernel(1, 129);
  const auto phi = SampledField::from_function(kg, [](const Point& u) {
    const double a = std::abs(u[0]);
    const double s = u[0] > 0 ? 1.0 : (u[0] < 0 ? -1.0 : 0.0);
    return -s * std::min(a, 1.0 - a);
  });
  const auto g = GridSpec::spatial(1, 1.0, 257);
  const auto f = SampledField::from_function(g, [](const Point& x) { return x[0]; });
  CHECK(std::abs(convolve_scaled(f, phi, 1.0, {0.0, 0.0}) - 0.25) <= 1e-3);

  const auto one = SampledField::constant(g, 1.0);
  CHECK(std::abs(convolve_scaled(one, phi, 0.5, {0.1, 0.0})) <= 1e-10);

  const auto g4 = GridSpec::spatial(1, 4.0, 257);
  const auto h = SampledField::from_function(g4, [](const Point& x) { return std::sin(3 * x[0]) * std::exp(-x[0] * x[0]); });
  const double base = convolve_scaled(h, phi, 0.7, {0.3, 0.0});
  CHECK(convolve_scaled(h.scaled(4.0), phi, 0.7, {0.3, 0.0}) == 4.0 * base);

  auto bad = std::vector<double>(kg.size(), 0.0);
  bad[3] = NAN;
  CHECK_THROWS_AS(SampledField(kg, bad), InvalidArgument);
}

TEST_CASE("time ladder") {
  const auto g = GridSpec::spatial(1, 4.0, 257);
  const auto lad = TimeLadder::make(g, g.spacing(), 2.0, 24);
  CHECK(lad.levels() == 24);
  CHECK(lad.t_min() == g.spacing());
  CHECK(lad.t_max() == 2.0);
  for (int k = 1; k < lad.levels(); ++k) CHECK(lad.nodes()[k] > lad.nodes()[k - 1]);
  double s = 0.0;
  for (double w : lad.log_weights()) s += w;
  CHECK(s == doctest::Approx(std::log(2.0 / g.spacing())).epsilon(1e-13));
  CHECK_THROWS_AS(TimeLadder::make(g, g.spacing() / 2, 2.0, 24), InvalidArgument);
  CHECK_THROWS_AS(TimeLadder::make(g, g.spacing(), 9.0, 24), InvalidArgument);
  CHECK_THROWS_AS(TimeLadder::make(g, g.spacing(), 2.0, 7), InvalidArgument);
}

TEST_CASE("field csv round trip") {
  const auto g = GridSpec::spatial(2, 1.0, 33);
  const auto f = SampledField::from_function(g, [](const Point& x) { return std::sin(x[0]) / 3.0 + x[1]; });
  std::stringstream ss;
  write_field_csv(ss, f);
  const auto back = read_field_csv(ss);
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
}
