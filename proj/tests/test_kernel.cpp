#include <cmath>

#include "doctest.h"
#include "sqlab/aalpha.hpp"
#include "sqlab/error.hpp"
#include "sqlab/families.hpp"
#include "sqlab/kernel_class.hpp"

using namespace sqlab;

namespace {

// Spatial grid whose spacing matches the kernel grid at resolution m, so that
// objective samples fall on nodes.
GridSpec aligned(int m) { return GridSpec::spatial(1, 4.0, 4 * (m - 1) + 1); }

SampledField sign_indicator(const GridSpec& g) {
  return SampledField::from_function(g, [](const Point& x) {
    return std::abs(x[0]) <= 1.0 ? (x[0] > 0 ? 1.0 : (x[0] < 0 ? -1.0 : 0.0)) : 0.0;
  });
}
SampledField exp_indicator(const GridSpec& g) {
  return SampledField::from_function(g, [](const Point& x) { return std::abs(x[0]) <= 1.0 ? std::exp(x[0]) : 0.0; });
}
SampledField bump(const GridSpec& g, double c, double r) {
  return function_from_json({{"kind", "bump"}, {"center", c}, {"radius", r}}).sample(g);
}

HolderClassSpec lp(double alpha, int m) { return {alpha, m, KernelMode::kLp}; }

// Values of the dense all-pairs LP from tests/oracles/kernel_lp_oracle.py (scipy HiGHS).
struct Frozen {
  double alpha;
  int m;
  bool sign;
  double value;
};
constexpr Frozen kFrozen[] = {
    {1.0, 65, true, 0.5},
    {1.0, 257, true, 0.5},
    {0.5, 65, true, 0.765808572191227},
    {0.5, 65, false, 0.440875309776739},
    {1.0, 129, false, 0.266015753164216},
};

}  // namespace

TEST_CASE("intrinsic sup oracle and extremizer residuals") {
  for (const auto& fz : kFrozen) {
    CAPTURE(fz.alpha);
    CAPTURE(fz.m);
    const auto g = aligned(fz.m);
    const auto f = fz.sign ? sign_indicator(g) : exp_indicator(g);
    const auto prog = assemble_program(f, {0, 0}, 1.0, lp(fz.alpha, fz.m));
    const auto sol = solve_program(prog);
    CHECK(std::abs(sol.value - fz.value) <= 1e-8 * std::max(1.0, fz.value));
    const auto res = kernel_residuals(*prog.kernel_class, sol.extremizer.values());
    CHECK(res.support == 0.0);
    CHECK(res.mean <= 1e-9);
    CHECK(res.holder <= 1e-9);
    double dot = 0.0;
    for (std::size_t i = 0; i < prog.objective.size(); ++i) dot += prog.objective[i] * sol.extremizer[i];
    CHECK(std::abs(dot - sol.value) <= 1e-10);
  }
  const auto g65 = aligned(65);
  CHECK(std::abs(a_alpha(sign_indicator(g65), {0, 0}, 1.0, lp(1.0, 65)) - 0.5) <= 2e-2);
  const auto g257 = aligned(257);
  CHECK(std::abs(a_alpha(sign_indicator(g257), {0, 0}, 1.0, lp(1.0, 257)) - 0.5) <= 0.5 * 0.005);
}

TEST_CASE("program assembly") {
  const auto g = aligned(65);
  const auto z = SampledField::from_function(g, [](const Point& x) { return std::abs(x[0]) <= 1.0 ? x[0] : 0.0; });
  const auto prog = assemble_program(z, {0, 0}, 1.0, lp(1.0, 65));
  const auto& kg = prog.kernel_class->grid();
  const auto q = kg.weights();
  for (std::size_t i = 1; i + 1 < kg.size(); ++i) CHECK(std::abs(prog.objective[i] - q[i] * -kg.node(i)[0]) <= 1e-12);

  const auto f = bump(g, 0.3, 0.8);
  const auto a = assemble_program(f, {0.25, 0}, 0.5, lp(0.5, 65));
  const auto b = assemble_program(f.scaled(-3.0), {0.25, 0}, 0.5, lp(0.5, 65));
  for (std::size_t i = 0; i < a.objective.size(); ++i) CHECK(b.objective[i] == doctest::Approx(-3.0 * a.objective[i]).epsilon(1e-15));
  CHECK(prog.constraint_count() >= 65 * 64 / 2);
}

TEST_CASE("LP solve basics") {
  const auto kc = shared_kernel_class(1, lp(0.5, 65));
  KernelProgram zero{kc, std::vector<double>(kc->grid().size(), 0.0)};
  const auto sol = solve_program(zero);
  CHECK(sol.value == 0.0);
  CHECK(sol.extremizer.sup_abs() == 0.0);

  const auto g = aligned(65);
  const auto f = bump(g, 0.3, 0.8).plus(exp_indicator(g).scaled(0.25));
  for (double alpha : {1.0, 0.5}) {
    const auto spec = lp(alpha, 65);
    auto prog = assemble_program(f, {0.1, 0}, 0.75, spec);
    const double v = solve_program(prog).value;
    for (double& c : prog.objective) c = -c;
    CHECK(std::abs(solve_program(prog).value - v) <= 1e-10 * std::max(1.0, v));
    for (double& c : prog.objective) c *= -2.5;
    CHECK(std::abs(solve_program(prog).value - 2.5 * v) <= 1e-10 * std::max(1.0, v));
  }
  CHECK_THROWS_AS((HolderClassSpec{1.5, 65, KernelMode::kLp}).validate(1), InvalidArgument);
  CHECK_THROWS_AS((HolderClassSpec{1.0, 64, KernelMode::kLp}).validate(1), InvalidArgument);
  CHECK_THROWS_AS((HolderClassSpec{1.0, 31, KernelMode::kLp}).validate(1), InvalidArgument);
}

TEST_CASE("a_alpha properties across modes") {
  const auto g = aligned(65);
  const auto five = SampledField::constant(g, 5.0);
  const auto f = bump(g, 0.3, 0.8);
  const auto h = exp_indicator(g).shifted(-1.0);
  for (KernelMode mode : {KernelMode::kLp, KernelMode::kDictionary, KernelMode::kRadialLp}) {
    const HolderClassSpec spec{0.5, 65, mode};
    for (double y : {-0.5, 0.0, 0.75}) CHECK(a_alpha(five, {y, 0}, 0.5, spec) <= 1e-9);
  }
  for (double alpha : {1.0, 0.5}) {
    for (double y : {-0.5, 0.0, 0.375}) {
      for (double t : {0.125, 0.5, 1.0}) {
        CAPTURE(alpha);
        CAPTURE(y);
        CAPTURE(t);
        const double v = a_alpha(f, {y, 0}, t, lp(alpha, 65));
        CHECK(a_alpha(f, {y, 0}, t, {alpha, 65, KernelMode::kDictionary}) <= v + 1e-8);
        CHECK(a_alpha(f, {y, 0}, t, {alpha, 65, KernelMode::kRadialLp}) <= v + 1e-8);
        CHECK(std::abs(a_alpha(f.scaled(-3.0), {y, 0}, t, lp(alpha, 65)) - 3.0 * v) <= 1e-10 * std::max(1.0, 3.0 * v));
        CHECK(a_alpha(f.plus(h), {y, 0}, t, lp(alpha, 65)) <= v + a_alpha(h, {y, 0}, t, lp(alpha, 65)) + 1e-8);
      }
    }
  }
}

TEST_CASE("a_alpha in two dimensions") {
  const auto g = GridSpec::spatial(2, 2.0, 33);
  const HolderClassSpec spec{1.0, 17, KernelMode::kLp};
  CHECK(a_alpha(SampledField::constant(g, 2.0), {0, 0}, 1.0, spec) <= 1e-9);
  const auto f = SampledField::from_function(g, [](const Point& x) { return x[0] * std::exp(-x[0] * x[0] - x[1] * x[1]); });
  const auto prog = assemble_program(f, {0.25, 0.0}, 1.0, spec);
  const auto sol = solve_program(prog);
  CHECK(sol.value > 0.0);
  CHECK(kernel_residuals(*prog.kernel_class, sol.extremizer.values()).max() <= 1e-9);
  CHECK(a_alpha(f, {0.25, 0}, 1.0, {1.0, 17, KernelMode::kRadialLp}) <= sol.value + 1e-8);
  CHECK(a_alpha(f, {0.25, 0}, 1.0, {1.0, 17, KernelMode::kDictionary}) <= sol.value + 1e-8);
}

TEST_CASE("a_alpha_field examples") {
  const auto g = GridSpec::spatial(1, 4.0, 65);
  const auto ladder = TimeLadder::make(g, g.spacing(), 2.0, 8);
  const auto spec = lp(0.5, 33);
  const auto zero = a_alpha_field(SampledField::constant(g, 0.0), ladder, spec);
  CHECK(zero.sup() == 0.0);

  const auto f = bump(g, 0.25, 0.75);
  const auto a = a_alpha_field(f, ladder, spec);
  const auto b = a_alpha_field(f.scaled(-2.0), ladder, spec);
  for (std::size_t i = 0; i < a.values().size(); ++i)
    CHECK(std::abs(b.values()[i] - 2.0 * a.values()[i]) <= 1e-10 * std::max(1.0, a.values()[i]));

  // Anchor fields solve every node independently: spot calls agree bit-for-bit.
  for (std::size_t j : {20u, 32u, 41u})
    for (int k : {0, 3, 7}) CHECK(a.at(j, k) == a_alpha(f, g.node(j), ladder.nodes()[k], spec));

  FieldOptions chain;
  chain.warm = WarmStart::kChain;
  const auto c = a_alpha_field(f, ladder, spec, chain);
  for (std::size_t i = 0; i < a.values().size(); ++i) CHECK(std::abs(c.values()[i] - a.values()[i]) <= 1e-10);
  for (double v : a.values()) CHECK(v >= 0.0);

  // Thread count does not change a single bit.
  FieldOptions serial = chain;
  serial.threads = 1;
  FieldOptions wide = chain;
  wide.threads = 4;
  const auto s1 = a_alpha_field(f, ladder, spec, serial);
  const auto s4 = a_alpha_field(f, ladder, spec, wide);
  CHECK(std::equal(s1.values().begin(), s1.values().end(), s4.values().begin()));
}

TEST_CASE("modulated sup examples") {
  const auto g = aligned(65);
  const auto f = bump(g, 0.25, 0.75);
  const auto b = function_from_json({{"kind", "step"}, {"at", 0.0}}).sample(g);
  const auto spec = lp(0.5, 65);
  const Point y{0.125, 0};
  const double t = 0.5;

  CHECK(modulated_a_alpha(SampledField::constant(g, 3.0), f, {0.5, 0}, y, t, spec) <= 1e-9);
  // b(x) = 0 reduces to the plain sup of b f.
  CHECK(std::abs(modulated_a_alpha(b, f, {-0.5, 0}, y, t, spec) - a_alpha(b.times(f), y, t, spec)) <= 1e-10);
  for (double x : {-0.75, -0.25, 0.0, 0.5}) {
    for (double cst : {0.0, 0.5, 1.0, -2.0}) {
      const double beta = interpolate(b, {x, 0});
      const double lhs = modulated_a_alpha(b, f, {x, 0}, y, t, spec);
      const double rhs = std::abs(beta - cst) * a_alpha(f, y, t, spec) + a_alpha(b.shifted(-cst).times(f), y, t, spec);
      CHECK(lhs <= rhs + 1e-8);
    }
    // b + c leaves the modulated sup unchanged.
    CHECK(std::abs(modulated_a_alpha(b.shifted(2.0), f, {x, 0}, y, t, spec) - modulated_a_alpha(b, f, {x, 0}, y, t, spec)) <= 1e-9);
  }
  // The field form agrees with pointwise calls.
  const auto ladder = TimeLadder::make(g, g.spacing(), 2.0, 8);
  const double beta = 1.0;
  const auto mf = modulated_a_alpha_field(b, f, beta, ladder, spec);
  const std::size_t j = 136;
  const int k = 5;
  CHECK(std::abs(mf.at(j, k) - modulated_a_alpha(b, f, {0.5, 0}, g.node(j), ladder.nodes()[k], spec)) <= 1e-10);
}

TEST_CASE("kernel class structure") {
  const auto kc = shared_kernel_class(1, lp(0.5, 33));
  CHECK(kc->pinned(0));
  CHECK(kc->pinned(32));
  CHECK_FALSE(kc->pinned(16));
  CHECK(kc->free_nodes().size() == 31);
  CHECK(kc->holder_distance(0, 32) == doctest::Approx(std::sqrt(2.0)));
  CHECK(kc->digest() != shared_kernel_class(1, lp(1.0, 33))->digest());
  for (const auto& d : kc->dictionary()) CHECK(kernel_residuals(*kc, d.values).max() <= 1e-12);
  CHECK(shared_kernel_class(1, lp(0.5, 33)) == kc);
}
