#include <cmath>
#include <random>

#include "doctest.h"
#include "sqlab/families.hpp"
#include "sqlab/square_functions.hpp"

using namespace sqlab;

namespace {

const GridSpec g65 = GridSpec::spatial(1, 4.0, 65);
const TimeLadder ladder8 = TimeLadder::make(g65, g65.spacing(), 2.0, 8);
const HolderClassSpec spec33{0.5, 33, KernelMode::kLp};

AalphaField synthetic(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(g65.size() * ladder8.levels());
  for (double& x : v) x = unit_uniform(rng);
  return AalphaField(g65, ladder8, spec33, WarmStart::kAnchor, std::move(v), {});
}

// Direct transcription of the cone sum, summed in a different order.
double cone_direct(const AalphaField& a, std::size_t x, double beta) {
  const auto& g = a.grid();
  const auto q = g.weights();
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    for (int k = 0; k < a.ladder().levels(); ++k) {
      const double t = a.ladder().nodes()[k];
      if (distance(g.node(x), g.node(j), 1) < beta * t)
        s += a.at(j, k) * a.at(j, k) * q[j] * a.ladder().log_weights()[k] / t;
    }
  return std::sqrt(s);
}

double gstar_direct(const AalphaField& a, std::size_t x, double lambda) {
  const auto& g = a.grid();
  const auto q = g.weights();
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    for (int k = 0; k < a.ladder().levels(); ++k) {
      const double t = a.ladder().nodes()[k];
      const double w = std::pow(t / (t + distance(g.node(x), g.node(j), 1)), lambda);
      s += w * a.at(j, k) * a.at(j, k) * q[j] * a.ladder().log_weights()[k] / t;
    }
  return std::sqrt(s);
}

SampledField bump(double c, double r) {
  return function_from_json({{"kind", "bump"}, {"center", c}, {"radius", r}}).sample(g65);
}
SampledField step() { return function_from_json({{"kind", "step"}, {"at", 0.0}}).sample(g65); }

}  // namespace

TEST_CASE("cone and g* sums against direct transcription") {
  const auto a = synthetic(3);
  const auto s1 = s_alpha(a);
  const auto s2 = s_alpha_beta(a, 2.0);
  const auto gs = g_star(a, 4.0);
  for (std::size_t x : {0u, 17u, 32u, 50u, 64u}) {
    CHECK(s1.output[x] == doctest::Approx(cone_direct(a, x, 1.0)).epsilon(1e-12));
    CHECK(s2.output[x] == doctest::Approx(cone_direct(a, x, 2.0)).epsilon(1e-12));
    CHECK(gs.output[x] == doctest::Approx(gstar_direct(a, x, 4.0)).epsilon(1e-12));
  }
  CHECK(s1.op == "s_alpha_beta");
  CHECK(s1.levels == 8);
  CHECK(s1.t_min == ladder8.nodes().front());
  CHECK(s1.metadata().contains("params"));
}

TEST_CASE("aperture and lambda monotonicity, homogeneity") {
  const auto a = synthetic(5);
  const auto lo = s_alpha_beta(a, 1.0).output;
  const auto hi = s_alpha_beta(a, 1.7).output;
  for (std::size_t i = 0; i < lo.size(); ++i) CHECK(lo[i] <= hi[i] + 1e-12);

  const auto g4 = g_star(a, 4.0).output;
  const auto g6 = g_star(a, 6.0).output;
  for (std::size_t i = 0; i < g4.size(); ++i) {
    CHECK(g6[i] <= g4[i] + 1e-12);
    CHECK(lo[i] <= std::pow(2.0, 2.0) * g4[i] + 1e-10);
  }

  const auto scaled = a.scaled(-2.5);
  const auto ls = s_alpha_beta(scaled, 1.0).output;
  const auto gg = g_alpha(a).output;
  const auto gs = g_alpha(scaled).output;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    CHECK(std::abs(ls[i] - 2.5 * lo[i]) <= 1e-12 * std::max(1.0, lo[i]));
    CHECK(std::abs(gs[i] - 2.5 * gg[i]) <= 1e-12 * std::max(1.0, gg[i]));
  }
}

TEST_CASE("g_alpha single spike") {
  std::vector<double> v(g65.size() * ladder8.levels(), 0.0);
  const std::size_t x0 = 40;
  const int k = 3;
  v[k * g65.size() + x0] = 1.75;
  const AalphaField a(g65, ladder8, spec33, WarmStart::kAnchor, std::move(v), {});
  const auto g = g_alpha(a).output;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i == x0)
      CHECK(g[i] == doctest::Approx(1.75 * std::sqrt(ladder8.log_weights()[k])).epsilon(1e-15));
    else
      CHECK(g[i] == 0.0);
  }
}

TEST_CASE("region decomposition bound") {
  const auto a = synthetic(9);
  for (double lambda : {4.0, 8.0}) {
    for (int J : {1, 3, 6}) {
      const auto gt = g_star(a, lambda, J).output;
      const auto bound = gstar_region_bound(a, lambda, J);
      for (std::size_t i = 0; i < gt.size(); ++i) CHECK(gt[i] * gt[i] <= bound[i] * bound[i] + 1e-10);
    }
  }
  // Truncation only removes nonnegative terms.
  const auto full = g_star(a, 4.0).output;
  const auto cut = g_star(a, 4.0, 2).output;
  for (std::size_t i = 0; i < full.size(); ++i) CHECK(cut[i] <= full[i] + 1e-12);
}

TEST_CASE("constant inputs give zero fields") {
  const auto c = SampledField::constant(g65, 3.0);
  const auto a = a_alpha_field(c, ladder8, spec33);
  CHECK(s_alpha(a).output.sup_abs() <= 1e-9);
  CHECK(g_alpha(a).output.sup_abs() <= 1e-9);
  CHECK(g_star(a, 4.0).output.sup_abs() <= 1e-9);

  const auto f = bump(0.25, 0.75);
  const auto bc = SampledField::constant(g65, -1.5);
  CHECK(commutator_s_alpha(bc, f, spec33, ladder8).output.sup_abs() <= 1e-9);
  CHECK(commutator_g_alpha(bc, f, spec33, ladder8).output.sup_abs() <= 1e-9);
  CHECK(commutator_g_star(bc, f, spec33, ladder8, 4.0).output.sup_abs() <= 1e-9);
}

TEST_CASE("commutator examples") {
  const auto f = bump(0.25, 0.75);
  const auto b = step();
  const auto fam = modulated_family(b, f, ladder8, spec33);
  CHECK(fam.betas.size() == 2);
  const auto cs = commutator_s_alpha(fam).output;
  const auto cg = commutator_g_alpha(fam).output;
  const auto c4 = commutator_g_star(fam, 4.0).output;
  const auto c6 = commutator_g_star(fam, 6.0).output;

  // The standalone forms agree with the family form.
  const auto cs2 = commutator_s_alpha(b, f, spec33, ladder8).output;
  const auto cg2 = commutator_g_alpha(b, f, spec33, ladder8).output;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    CHECK(std::abs(cs2[i] - cs[i]) <= 1e-10);
    CHECK(std::abs(cg2[i] - cg[i]) <= 1e-10);
    CHECK(c6[i] <= c4[i] + 1e-12);
  }

  // b + c changes nothing.
  const auto shifted = modulated_family(b.shifted(2.0), f, ladder8, spec33);
  const auto ss = commutator_s_alpha(shifted).output;
  const auto sg = commutator_g_star(shifted, 4.0).output;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    CHECK(std::abs(ss[i] - cs[i]) <= 1e-9);
    CHECK(std::abs(sg[i] - c4[i]) <= 1e-9);
  }

  // Split bound with several constants c.
  const auto s = s_alpha(a_alpha_field(f, ladder8, spec33)).output;
  const auto gs = g_alpha(a_alpha_field(f, ladder8, spec33)).output;
  for (double c : {0.0, 0.5, 1.0}) {
    const auto af = a_alpha_field(b.shifted(-c).times(f), ladder8, spec33);
    const auto sb = s_alpha(af).output;
    const auto gb = g_alpha(af).output;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const double d = std::abs(b[i] - c);
      CHECK(cs[i] <= d * s[i] + sb[i] + 1e-8);
      CHECK(cg[i] <= d * gs[i] + gb[i] + 1e-8);
    }
  }
  for (double v : cs.values()) CHECK(v >= 0.0);
}
