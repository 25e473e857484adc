#include "sqlab/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sqlab/error.hpp"

namespace sqlab {

namespace {

const std::vector<std::string> kSuites{"boundedness",       "aperture_scaling",    "gstar_domination", "bmo_dyadic_growth",
                                       "holder_ap_average", "subset_and_doubling", "commutator_split"};
const std::vector<std::string> kOperators{"s_alpha",           "s_alpha_beta",       "g_alpha",          "g_star",
                                          "commutator_s_alpha", "commutator_g_alpha", "commutator_g_star"};

std::vector<double> number_or_list(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>()};
  auto v = j.get<std::vector<double>>();
  if (v.empty()) throw ConfigError("expected a number or a nonempty list");
  return v;
}

Point point_of(const nlohmann::json& j) {
  Point p{0.0, 0.0};
  if (j.is_number()) {
    p[0] = j.get<double>();
    return p;
  }
  if (!j.is_array() || j.empty() || j.size() > 2) throw ConfigError("point must be a number or a list of 1 or 2 numbers");
  for (std::size_t a = 0; a < j.size(); ++a) p[a] = j[a].get<double>();
  return p;
}

Ball ball_of(const nlohmann::json& j) { return {point_of(j.at("center")), j.at("radius").get<double>()}; }

template <class T>
void read(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

// Typos must not silently fall back to defaults. Keys starting with '_' are comments.
void check_keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!key.empty() && key[0] == '_') continue;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GridSpec RunConfig::grid() const { return GridSpec::spatial(dim, L, N); }

TimeLadder RunConfig::ladder(const GridSpec& g) const {
  // The ladder is physical: refined grids keep the base t_min.
  const double lo = t_min > 0.0 ? t_min : 2.0 * L / (N - 1);
  return TimeLadder::make(g, lo, t_max, levels);
}

BallFamily RunConfig::ball_family(const GridSpec& g) const {
  const double lo = r0 > 0.0 ? r0 : 2.0 * L / (N - 1);
  return BallFamily::dyadic(g, lo, ball_j_max, ball_spacing, k_max);
}

bool RunConfig::has_suite(const std::string& name) const {
  return std::find(suites.begin(), suites.end(), name) != suites.end();
}

RunConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    const auto empty = nlohmann::json::object();
    check_keys(doc, "config",
               {"grid", "ladder", "kernel", "cone", "gstar", "weight", "morrey", "rh", "balls", "family", "b", "f",
                "suites", "verify", "sqfn", "extremizer", "threads"});
    check_keys(doc.value("grid", empty), "grid", {"dim", "L", "N"});
    check_keys(doc.value("ladder", empty), "ladder", {"t_min", "t_max", "levels"});
    check_keys(doc.value("kernel", empty), "kernel", {"alpha", "m", "mode", "warm_start"});
    check_keys(doc.value("cone", empty), "cone", {"beta"});
    check_keys(doc.value("gstar", empty), "gstar", {"lambda", "J", "lambda_alt"});
    check_keys(doc.value("morrey", empty), "morrey", {"p", "kappa"});
    check_keys(doc.value("rh", empty), "rh", {"r"});
    check_keys(doc.value("balls", empty), "balls", {"r0", "j_max", "spacing", "k_max", "bmo_roots", "split_ball"});
    check_keys(doc.value("family", empty), "family",
               {"generator", "count", "seed", "amp_min", "amp_max", "scale_min", "scale_max", "support"});
    check_keys(doc.value("verify", empty), "verify", {"aperture_j_max", "refinement"});
    check_keys(doc.value("verify", empty).value("refinement", empty), "verify.refinement",
               {"enabled", "N", "m", "members", "drift_bound"});
    check_keys(doc.value("sqfn", empty), "sqfn", {"operator"});
    check_keys(doc.value("extremizer", empty), "extremizer", {"points"});
    const auto& grid = doc.value("grid", empty);
    read(grid, "dim", c.dim);
    read(grid, "L", c.L);
    read(grid, "N", c.N);

    const auto& ladder = doc.value("ladder", empty);
    read(ladder, "t_min", c.t_min);
    read(ladder, "t_max", c.t_max);
    read(ladder, "levels", c.levels);

    const auto& kernel = doc.value("kernel", empty);
    if (kernel.contains("alpha")) c.alphas = number_or_list(kernel.at("alpha"));
    read(kernel, "m", c.m);
    if (kernel.contains("mode")) c.mode = kernel_mode_from_string(kernel.at("mode").get<std::string>());
    if (kernel.contains("warm_start")) {
      const auto ws = kernel.at("warm_start").get<std::string>();
      if (ws == "anchor")
        c.warm = WarmStart::kAnchor;
      else if (ws == "chain")
        c.warm = WarmStart::kChain;
      else
        throw ConfigError("kernel.warm_start must be 'anchor' or 'chain'");
    }

    read(doc.value("cone", empty), "beta", c.beta);
    const auto& gstar = doc.value("gstar", empty);
    read(gstar, "lambda", c.lambda);
    read(gstar, "J", c.J);
    if (gstar.contains("lambda_alt")) c.lambda_alt = number_or_list(gstar.at("lambda_alt"));

    if (doc.contains("weight")) c.weight = WeightSpec::from_json(doc.at("weight"));
    const auto& morrey = doc.value("morrey", empty);
    if (morrey.contains("p")) c.ps = number_or_list(morrey.at("p"));
    if (morrey.contains("kappa")) c.kappas = number_or_list(morrey.at("kappa"));
    read(doc.value("rh", empty), "r", c.rh_r);

    const auto& balls = doc.value("balls", empty);
    read(balls, "r0", c.r0);
    read(balls, "j_max", c.ball_j_max);
    read(balls, "spacing", c.ball_spacing);
    read(balls, "k_max", c.k_max);
    if (balls.contains("bmo_roots")) {
      c.bmo_roots.clear();
      for (const auto& b : balls.at("bmo_roots")) c.bmo_roots.push_back(ball_of(b));
    }
    if (balls.contains("split_ball")) c.split_ball = ball_of(balls.at("split_ball"));

    if (doc.contains("family")) c.family = TestFamilySpec::from_json(doc.at("family"));
    if (doc.contains("b")) c.b = doc.at("b");
    if (doc.contains("f")) c.f = doc.at("f");
    function_from_json(c.b);
    function_from_json(c.f);

    if (doc.contains("suites")) c.suites = doc.at("suites").get<std::vector<std::string>>();
    for (const auto& s : c.suites)
      if (std::find(kSuites.begin(), kSuites.end(), s) == kSuites.end()) throw ConfigError("unknown suite '" + s + "'");

    const auto& verify = doc.value("verify", empty);
    read(verify, "aperture_j_max", c.aperture_j_max);
    const auto& ref = verify.value("refinement", empty);
    read(ref, "enabled", c.refinement.enabled);
    read(ref, "N", c.refinement.N);
    read(ref, "m", c.refinement.m);
    read(ref, "members", c.refinement.members);
    read(ref, "drift_bound", c.refinement.drift_bound);

    read(doc.value("sqfn", empty), "operator", c.op);
    if (std::find(kOperators.begin(), kOperators.end(), c.op) == kOperators.end())
      throw ConfigError("unknown operator '" + c.op + "'");

    const auto& ext = doc.value("extremizer", empty);
    if (ext.contains("points")) {
      c.points.clear();
      for (const auto& p : ext.at("points")) c.points.emplace_back(point_of(p.at("y")), p.at("t").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }

  // Cross-field checks: build every derived object once so errors surface here.
  try {
    const GridSpec g = c.grid();
    c.ladder(g);
    for (double a : c.alphas) c.kernel_spec(a).validate(c.dim);
    c.ball_family(g);
    for (const Ball& b : c.bmo_roots)
      if (!b.scaled(std::ldexp(1.0, c.k_max + 1)).inside(g))
        throw InvalidArgument("a BMO root ball's largest enlargement leaves the box");
    if (!c.split_ball.inside(g)) throw InvalidArgument("split ball leaves the box");
    for (double p : c.ps)
      if (!(p > 1.0)) throw InvalidArgument("Morrey exponents must exceed 1 for the suites");
    for (double k : c.kappas)
      if (!(k > 0.0 && k < 1.0)) throw InvalidArgument("kappa must lie in (0, 1)");
    if (!(c.beta > 0.0)) throw InvalidArgument("cone aperture must be positive");
    if (!(c.lambda > 0.0) || c.J < 1) throw InvalidArgument("g* needs lambda > 0 and J >= 1");
    if (!(c.rh_r > 1.0)) throw InvalidArgument("reverse Hölder exponent must exceed 1");
    if (c.aperture_j_max < 1) throw InvalidArgument("aperture_j_max must be >= 1");
    if (c.refinement.enabled) {
      if (c.refinement.members < 1) throw InvalidArgument("refinement needs at least one member");
      GridSpec::spatial(c.dim, c.L, c.refinement.N);
      HolderClassSpec{1.0, c.refinement.m, c.mode}.validate(c.dim);
    }
    if (c.has_suite("boundedness")) {
      const double pmax = *std::max_element(c.ps.begin(), c.ps.end());
      if (!(c.lambda > std::max(pmax, 3.0))) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "the g* boundedness suite requires lambda > max{p, 3}; got lambda = %g with p = %g", c.lambda, pmax);
        throw InvalidArgument(msg);
      }
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }

  c.source = doc;
  nlohmann::json canon = doc;
  canon.erase("threads");
  c.digest = fnv1a_hex(canon.dump());
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

}  // namespace sqlab
