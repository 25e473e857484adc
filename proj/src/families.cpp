#include "sqlab/families.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "sqlab/error.hpp"

namespace sqlab {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

double bump(const Point& x, const Point& c, double r, int dim) {
  const double d = distance(x, c, dim) / r;
  if (d >= 1.0) return 0.0;
  const double s = 1.0 - d * d;
  return s * s;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

Point point_from_json(const nlohmann::json& j) {
  Point p{0.0, 0.0};
  if (j.is_number()) {
    p[0] = j.get<double>();
    return p;
  }
  if (!j.is_array() || j.empty() || j.size() > 2) throw ConfigError("point must be a number or a list of 1 or 2 numbers");
  for (std::size_t a = 0; a < j.size(); ++a) p[a] = j[a].get<double>();
  return p;
}

}  // namespace

SampledField FunctionSpec::sample(const GridSpec& grid) const {
  if (constant) return SampledField::constant(grid, value);
  return SampledField::from_function(grid, fn);
}

FunctionSpec function_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    FunctionSpec f;
    f.digest = j.dump();
    if (kind == "constant") {
      f.constant = true;
      f.value = j.at("value").get<double>();
      const double v = f.value;
      f.fn = [v](const Point&) { return v; };
    } else if (kind == "bump") {
      const Point c = point_from_json(j.value("center", nlohmann::json(0.0)));
      const double r = j.at("radius").get<double>();
      const double a = j.value("amplitude", 1.0);
      if (!(r > 0.0)) throw ConfigError("bump radius must be positive");
      f.fn = [c, r, a](const Point& x) { return a * bump(x, c, r, 2); };
    } else if (kind == "indicator") {
      const double lo = j.at("lo").get<double>();
      const double hi = j.at("hi").get<double>();
      const double edge = j.value("edge", 0.5);
      if (!(lo < hi)) throw ConfigError("indicator needs lo < hi");
      f.fn = [lo, hi, edge](const Point& x) {
        if (x[0] == lo || x[0] == hi) return edge;
        return (x[0] > lo && x[0] < hi) ? 1.0 : 0.0;
      };
    } else if (kind == "step") {
      const double at = j.value("at", 0.0);
      const double low = j.value("low", 0.0);
      const double high = j.value("high", 1.0);
      f.fn = [at, low, high](const Point& x) { return x[0] >= at ? high : low; };
    } else if (kind == "log") {
      const double s = j.value("scale", 0.03125);
      if (!(s > 0.0)) throw ConfigError("log scale must be positive");
      f.fn = [s](const Point& x) { return std::log(std::hypot(x[0], x[1]) + s); };
    } else {
      throw ConfigError("unknown function kind '" + kind + "'");
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed function spec: ") + e.what());
  }
}

std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::kBumps:
      return "bumps";
    case FamilyKind::kDyadicAtoms:
      return "dyadic_atoms";
    case FamilyKind::kSignPatterns:
      return "sign_patterns";
    case FamilyKind::kRandomTrig:
      return "random_trig";
    case FamilyKind::kConstants:
      return "constants";
  }
  return "?";
}

FamilyKind family_kind_from_string(const std::string& s) {
  for (FamilyKind k : {FamilyKind::kBumps, FamilyKind::kDyadicAtoms, FamilyKind::kSignPatterns,
                       FamilyKind::kRandomTrig, FamilyKind::kConstants})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown test family '" + s + "'");
}

void TestFamilySpec::validate() const {
  if (count < 1) throw ConfigError("family count must be >= 1");
  if (!(amp_min > 0.0 && amp_min <= amp_max)) throw ConfigError("family amplitudes need 0 < amp_min <= amp_max");
  if (!(scale_min > 0.0 && scale_min <= scale_max)) throw ConfigError("family scales need 0 < scale_min <= scale_max");
  if (!(support > scale_max)) throw ConfigError("family support must exceed scale_max");
}

nlohmann::json TestFamilySpec::to_json() const {
  return {{"generator", to_string(kind)}, {"count", count},         {"seed", seed},
          {"amp_min", amp_min},          {"amp_max", amp_max},     {"scale_min", scale_min},
          {"scale_max", scale_max},      {"support", support}};
}

TestFamilySpec TestFamilySpec::from_json(const nlohmann::json& j) {
  TestFamilySpec s;
  try {
    if (j.contains("generator")) s.kind = family_kind_from_string(j.at("generator").get<std::string>());
    s.count = j.value("count", s.count);
    s.seed = j.value("seed", s.seed);
    s.amp_min = j.value("amp_min", s.amp_min);
    s.amp_max = j.value("amp_max", s.amp_max);
    s.scale_min = j.value("scale_min", s.scale_min);
    s.scale_max = j.value("scale_max", s.scale_max);
    s.support = j.value("support", s.support);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed family spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<FunctionSpec> generate_family(int dim, const TestFamilySpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<FunctionSpec> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  const double S = spec.support;

  for (int i = 0; i < spec.count; ++i) {
    FunctionSpec f;
    const double amp = uniform(rng, spec.amp_min, spec.amp_max) * (unit_uniform(rng) < 0.5 ? -1.0 : 1.0);
    switch (spec.kind) {
      case FamilyKind::kBumps: {
        // One or two bumps, each inside the support box.
        const int parts = 1 + static_cast<int>(unit_uniform(rng) < 0.5);
        std::vector<std::tuple<Point, double, double>> bumps;
        for (int b = 0; b < parts; ++b) {
          const double r = uniform(rng, spec.scale_min, spec.scale_max);
          Point c{0.0, 0.0};
          for (int a = 0; a < dim; ++a) c[a] = uniform(rng, -S + r, S - r);
          const double ab = b == 0 ? amp : amp * uniform(rng, -1.0, 1.0);
          bumps.emplace_back(c, r, ab);
        }
        f.fn = [bumps, dim](const Point& x) {
          double v = 0.0;
          for (const auto& [c, r, a] : bumps) v += a * bump(x, c, r, dim);
          return v;
        };
        f.digest = fmt("bumps#%g(parts=%g, first center %.6g, radius %.6g)", i, parts, std::get<0>(bumps[0])[0],
                       std::get<1>(bumps[0]));
        break;
      }
      case FamilyKind::kDyadicAtoms: {
        // amp on the left half of a dyadic cube, -amp on the right half (mean zero).
        int level = 0;
        while (S * std::ldexp(1.0, -level) > spec.scale_max) ++level;
        const int deepest = std::max(level, static_cast<int>(std::floor(std::log2(S / spec.scale_min))));
        level += static_cast<int>(unit_uniform(rng) * (deepest - level + 1));
        const double len = 2.0 * S * std::ldexp(1.0, -level - 1);  // cube side
        const int cells = 1 << (level + 1);
        std::array<double, 2> lo{-S, -S};
        for (int a = 0; a < dim; ++a)
          lo[a] = -S + len * static_cast<int>(unit_uniform(rng) * cells);
        f.fn = [lo, len, amp, dim](const Point& x) {
          for (int a = 0; a < dim; ++a)
            if (x[a] < lo[a] || x[a] >= lo[a] + len) return 0.0;
          return x[0] < lo[0] + 0.5 * len ? amp : -amp;
        };
        f.digest = fmt("dyadic_atoms#%g(start %.6g, side %.6g)", i, lo[0], len);
        break;
      }
      case FamilyKind::kSignPatterns: {
        // +-amp on consecutive cells of random length across [-S, S] in x1.
        std::vector<double> cuts{-S};
        std::vector<double> signs;
        while (cuts.back() < S) {
          cuts.push_back(std::min(S, cuts.back() + uniform(rng, spec.scale_min, spec.scale_max)));
          signs.push_back(unit_uniform(rng) < 0.5 ? -amp : amp);
        }
        f.fn = [cuts, signs, S, dim](const Point& x) {
          for (int a = 1; a < dim; ++a)
            if (std::abs(x[a]) >= S) return 0.0;
          if (x[0] < -S || x[0] >= S) return 0.0;
          const auto k = std::upper_bound(cuts.begin(), cuts.end(), x[0]) - cuts.begin() - 1;
          return signs[static_cast<std::size_t>(k)];
        };
        f.digest = fmt("sign_patterns#%g(cells=%g)", i, static_cast<double>(signs.size()));
        break;
      }
      case FamilyKind::kRandomTrig: {
        // Random trigonometric sum under a smooth taper vanishing at |x| = S.
        const int terms = 4;
        std::vector<double> a(terms), k(terms), ph(terms);
        for (int m = 0; m < terms; ++m) {
          a[m] = uniform(rng, -1.0, 1.0);
          k[m] = uniform(rng, std::numbers::pi / spec.scale_max, std::numbers::pi / spec.scale_min);
          ph[m] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        }
        f.fn = [a, k, ph, amp, S, dim](const Point& x) {
          double taper = 1.0;
          for (int d = 0; d < dim; ++d) {
            const double s = x[d] / S;
            if (std::abs(s) >= 1.0) return 0.0;
            taper *= (1.0 - s * s) * (1.0 - s * s);
          }
          double v = 0.0;
          for (std::size_t m = 0; m < a.size(); ++m) v += a[m] * std::sin(k[m] * x[0] + ph[m]);
          return amp * taper * v;
        };
        f.digest = fmt("random_trig#%g(first frequency %.6g)", i, k[0]);
        break;
      }
      case FamilyKind::kConstants: {
        f.constant = true;
        f.value = amp;
        f.fn = [amp](const Point&) { return amp; };
        f.digest = fmt("constants#%g(value %.17g)", i, amp);
        break;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace sqlab
