#include "sqlab/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>

#include "sqlab/error.hpp"

namespace sqlab {

namespace {

constexpr double kExact = 1e-10;  // slack for the exact discrete gates
constexpr double kLpTol = 1e-8;   // slack where an LP optimum enters
constexpr double kRateTol = 0.10;

std::string fmt(const char* pattern, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[240];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// Keep the case with the least slack.
void keep_worst(std::optional<InequalityReport>& slot, const InequalityReport& r) {
  if (!slot || r.slack < slot->slack || (!r.pass && slot->pass)) slot = r;
}

}  // namespace

bool SuiteReport::pass() const {
  return std::all_of(cases.begin(), cases.end(), [](const InequalityReport& r) { return r.pass; });
}

double SuiteReport::max_ratio() const {
  double m = 0.0;
  for (const auto& c : cases) m = std::max(m, c.ratio);
  return m;
}

std::size_t SuiteReport::worst_case() const {
  std::size_t w = 0;
  for (std::size_t i = 1; i < cases.size(); ++i)
    if (cases[i].ratio > cases[w].ratio) w = i;
  return w;
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : cases)
    cs.push_back({{"digest", c.digest},
                  {"lhs", c.lhs},
                  {"rhs", c.rhs},
                  {"constant", c.constant},
                  {"constant_provenance", c.constant_provenance},
                  {"ratio", c.ratio},
                  {"pass", c.pass}});
  std::size_t failed = 0;
  for (const auto& c : cases) failed += c.pass ? 0 : 1;
  nlohmann::json summary = {{"max_ratio", max_ratio()}, {"pass", pass()}, {"cases", cases.size()}, {"failed", failed}};
  if (!cases.empty()) summary["worst_case"] = worst_case();
  return {{"suite", suite},   {"params", params},           {"seed", seed},       {"cases", cs},
          {"summary", summary}, {"diagnostics", diagnostics}, {"notices", notices}};
}

InequalityReport pointwise_check(const std::string& digest, const SampledField& lhs, const SampledField& rhs,
                                 double constant, double tolerance) {
  std::size_t worst = 0;
  double least = INFINITY;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double s = rhs[i] - lhs[i];
    if (s < least || std::isnan(s)) {
      least = s;
      worst = i;
      if (std::isnan(s)) break;
    }
  }
  const Point x = lhs.grid().node(worst);
  return make_inequality(digest + fmt(" @x=(%.6g, %.6g)", x[0], x[1]), lhs[worst], rhs[worst], constant, "explicit",
                         tolerance);
}

InequalityReport gstar_domination_check(const AalphaField& a, double lambda, int regions, const std::string& tag) {
  if (!(lambda > 0.0) || regions < 1) throw InvalidArgument("g* domination needs lambda > 0 and J >= 1");
  const auto g = g_star(a, lambda, regions).output;
  const auto bound = gstar_region_bound(a, lambda, regions);
  return pointwise_check(tag + fmt(" g*^2 on R_0..R_%g vs region bound, lambda=%g", regions, lambda), g.times(g),
                         bound.times(bound), 1.0, kExact);
}

InequalityReport cone_bound_check(const AalphaField& a, double lambda, const std::string& tag) {
  const double c = std::pow(2.0, lambda * a.grid().dim() / 2.0);
  const auto s = s_alpha(a).output;
  const auto g = g_star(a, lambda).output;
  return pointwise_check(tag + fmt(" S <= 2^(lambda n/2) g*, lambda=%g", lambda), s, g.scaled(c), c, kExact);
}

InequalityReport lambda_monotone_check(const AalphaField& a, double lambda1, double lambda2, const std::string& tag) {
  if (!(lambda1 <= lambda2)) throw InvalidArgument("lambda monotonicity needs lambda1 <= lambda2");
  return pointwise_check(tag + fmt(" g*_%g <= g*_%g", lambda2, lambda1), g_star(a, lambda2).output,
                         g_star(a, lambda1).output, 1.0, kExact);
}

InequalityReport aperture_monotone_check(const AalphaField& a, double beta, const std::string& tag) {
  return pointwise_check(tag + fmt(" S_beta <= S_2beta, beta=%g", beta), s_alpha_beta(a, beta).output,
                         s_alpha_beta(a, 2.0 * beta).output, 1.0, kExact);
}

std::vector<double> aperture_ratios(const AalphaField& a, double p, const WeightSpec& w, int j_max) {
  std::vector<double> norms;
  for (int j = 0; j <= j_max; ++j) norms.push_back(lebesgue_norm(s_alpha_beta(a, std::ldexp(1.0, j)).output, p, w));
  if (!(norms[0] > 0.0)) return {};
  std::vector<double> rho;
  for (double v : norms) rho.push_back(v / norms[0]);
  return rho;
}

std::vector<InequalityReport> bmo_dyadic_growth_check(const SampledField& b, const Ball& root, int k_max,
                                                      double bmo_norm_value, const std::string& tag) {
  const double bb = ball_average(b, root);
  const double dbl = std::ldexp(1.0, b.grid().dim());
  std::vector<InequalityReport> out;
  for (int k = 1; k <= k_max; ++k) {
    const double lhs = std::abs(ball_average(b, root.scaled(std::ldexp(1.0, k + 1))) - bb);
    const double c = dbl * (k + 1);
    out.push_back(make_inequality(tag + fmt(" |b_{2^%gB} - b_B|, B=(%.6g; %.6g)", k + 1, root.center[0], root.radius),
                                  lhs, c * bmo_norm_value, c, "explicit", kExact));
  }
  return out;
}

std::vector<InequalityReport> holder_ap_average_check(const SampledField& f, const WeightSpec& w,
                                                      const MorreyParams& mp, const Ball& root, int k_max,
                                                      double ap_constant, double morrey_value, const std::string& tag) {
  std::vector<double> af(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) af[i] = std::abs(f[i]);
  const SampledField fa(f.grid(), std::move(af));
  const double c = std::pow(ap_constant, 1.0 / mp.p);
  std::vector<InequalityReport> out;
  for (int k = 0; k <= k_max; ++k) {
    const Ball big = root.scaled(std::ldexp(1.0, k + 1));
    const double lhs = ball_average(fa, big);
    const double wb = weighted_measure(f.grid(), w, big);
    const double rhs = c * morrey_value * std::pow(wb, (mp.kappa - 1.0) / mp.p);
    out.push_back(make_inequality(
        tag + fmt(" avg_{2^%gB}|f|, B=(%.6g; %.6g), p=%g", k + 1, root.center[0], root.radius, mp.p) +
            fmt(", kappa=%g", mp.kappa),
        lhs, rhs, c, "explicit", kExact));
  }
  return out;
}

std::vector<InequalityReport> rh_chain_check(const GridSpec& grid, const WeightSpec& w, double r, const Ball& root,
                                             int k_max, const std::string& tag) {
  const auto wv = w.sample(grid, 1.0);
  const auto wr = w.sample(grid, r);
  const BallMask small = ball_mask(grid, root);
  double ws = 0.0;
  for (std::size_t k = 0; k < small.nodes.size(); ++k) ws += small.weights[k] * wv[small.nodes[k]];
  std::vector<InequalityReport> out;
  for (int k = 0; k <= k_max; ++k) {
    const BallMask big = ball_mask(grid, root.scaled(std::ldexp(1.0, k + 1)));
    double wb = 0.0, wbr = 0.0;
    for (std::size_t i = 0; i < big.nodes.size(); ++i) {
      wb += big.weights[i] * wv[big.nodes[i]];
      wbr += big.weights[i] * wr[big.nodes[i]];
    }
    const double vol = big.volume();
    const double crh = std::pow(wbr / vol, 1.0 / r) / (wb / vol);
    const double rhs = crh * std::pow(small.volume() / vol, (r - 1.0) / r);
    out.push_back(make_inequality(tag + fmt(" w(B)/w(2^%gB), B=(%.6g; %.6g), r=%g", k + 1, root.center[0],
                                            root.radius, r),
                                  ws / wb, rhs, crh, "explicit", kExact));
  }
  return out;
}

InequalityReport commutator_split_check(const ModulatedFamily& fam, const AalphaField& a_f, const AalphaField& a_bcf,
                                        double c, double beta, const std::string& tag) {
  const auto lhs = commutator_s_alpha(fam, beta).output;
  const auto s_f = s_alpha_beta(a_f, beta).output;
  const auto s_bcf = s_alpha_beta(a_bcf, beta).output;
  std::vector<double> rhs(lhs.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = std::abs(fam.b[i] - c) * s_f[i] + s_bcf[i];
  return pointwise_check(tag + fmt(" [b,S] split, c=%.6g, beta=%g", c, beta), lhs, SampledField(lhs.grid(), rhs), 1.0,
                         kLpTol);
}

namespace {

const std::array<const char*, 6> kOps{"s_alpha",           "g_alpha",           "g_star",
                                      "commutator_s_alpha", "commutator_g_alpha", "commutator_g_star"};

struct Resolution {
  GridSpec grid;
  TimeLadder ladder;
  BallFamily balls;
  int m;
};

Resolution make_resolution(const RunConfig& cfg, int N, int m) {
  const GridSpec g = GridSpec::spatial(cfg.dim, cfg.L, N);
  return {g, cfg.ladder(g), cfg.ball_family(g), m};
}

HolderClassSpec spec_at(const RunConfig& cfg, double alpha, int m) { return {alpha, m, cfg.mode}; }

// Operator outputs for one member: the six operators of the boundedness suite.
std::array<SampledField, 6> operator_outputs(const AalphaField& a, const ModulatedFamily& fam, double lambda) {
  return {s_alpha(a).output,          g_alpha(a).output,          g_star(a, lambda).output,
          commutator_s_alpha(fam).output, commutator_g_alpha(fam).output, commutator_g_star(fam, lambda).output};
}

struct MemberData {
  std::optional<AalphaField> field;
  std::optional<ModulatedFamily> comm;
};

std::string member_tag(double alpha, std::size_t i, const FunctionSpec& f) {
  return fmt("alpha=%g member %g ", alpha, static_cast<double>(i)) + f.digest;
}

nlohmann::json base_params(const RunConfig& cfg) {
  return {{"dim", cfg.dim},
          {"L", cfg.L},
          {"N", cfg.N},
          {"m", cfg.m},
          {"levels", cfg.levels},
          {"t_max", cfg.t_max},
          {"alphas", cfg.alphas},
          {"mode", to_string(cfg.mode)},
          {"family", cfg.family.to_json()}};
}

class Runner {
 public:
  Runner(const RunConfig& cfg, const FieldOptions& opt)
      : cfg_(cfg), opt_(opt), base_(make_resolution(cfg, cfg.N, cfg.m)), members_(generate_family(cfg.dim, cfg.family)),
        b_spec_(function_from_json(cfg.b)) {
    for (const auto& m : members_) samples_.push_back(m.sample(base_.grid));
    b_ = b_spec_.sample(base_.grid);
  }

  std::vector<SuiteReport> run() {
    std::vector<SuiteReport> out;
    const bool need_fields = cfg_.has_suite("boundedness") || cfg_.has_suite("aperture_scaling") ||
                             cfg_.has_suite("gstar_domination") || cfg_.has_suite("commutator_split");
    const bool need_comm = cfg_.has_suite("boundedness") || cfg_.has_suite("commutator_split");
    if (need_fields) {
      for (double alpha : cfg_.alphas) {
        auto& data = data_[alpha];
        data.resize(members_.size());
        const auto spec = spec_at(cfg_, alpha, cfg_.m);
        for (std::size_t i = 0; i < members_.size(); ++i) {
          data[i].field.emplace(a_alpha_field(samples_[i], base_.ladder, spec, opt_));
          if (need_comm) data[i].comm.emplace(modulated_family(b_, samples_[i], base_.ladder, spec, opt_));
        }
      }
    }
    if (cfg_.has_suite("boundedness")) out.push_back(boundedness());
    if (cfg_.has_suite("aperture_scaling")) out.push_back(aperture_scaling());
    if (cfg_.has_suite("gstar_domination")) out.push_back(gstar_domination());
    if (cfg_.has_suite("bmo_dyadic_growth")) out.push_back(bmo_dyadic_growth());
    if (cfg_.has_suite("holder_ap_average")) out.push_back(holder_ap_average());
    if (cfg_.has_suite("subset_and_doubling")) out.push_back(subset_and_doubling());
    if (cfg_.has_suite("commutator_split")) out.push_back(commutator_split());
    return out;
  }

 private:
  SuiteReport start(const std::string& name) const {
    SuiteReport r;
    r.suite = name;
    r.params = base_params(cfg_);
    r.seed = cfg_.family.seed;
    return r;
  }

  // R[op][member] for one (p, kappa) on one resolution.
  static std::array<std::vector<double>, 6> ratios(const std::vector<std::array<SampledField, 6>>& outs,
                                                   const std::vector<double>& denom, const MorreyParams& mp,
                                                   const WeightSpec& w, const BallFamily& balls) {
    std::array<std::vector<double>, 6> r;
    for (std::size_t op = 0; op < 6; ++op) {
      r[op].assign(outs.size(), NAN);
      for (std::size_t i = 0; i < outs.size(); ++i)
        if (denom[i] > 0.0) r[op][i] = morrey_norm(outs[i][op], mp, w, balls).value / denom[i];
    }
    return r;
  }

  SuiteReport boundedness() {
    SuiteReport rep = start("boundedness");
    rep.params["weight"] = cfg_.weight.to_json();
    rep.params["p"] = cfg_.ps;
    rep.params["kappa"] = cfg_.kappas;
    rep.params["lambda"] = cfg_.lambda;
    rep.params["b"] = cfg_.b;
    rep.params["balls"] = base_.balls.id();
    rep.params["refinement"] = {{"enabled", cfg_.refinement.enabled},
                                {"N", cfg_.refinement.N},
                                {"m", cfg_.refinement.m},
                                {"members", cfg_.refinement.members},
                                {"drift_bound", cfg_.refinement.drift_bound}};
    const double scale_c = -2.5;

    for (double alpha : cfg_.alphas) {
      const auto& data = data_.at(alpha);
      const auto spec = spec_at(cfg_, alpha, cfg_.m);
      std::vector<std::array<SampledField, 6>> outs;
      for (const auto& d : data) outs.push_back(operator_outputs(*d.field, *d.comm, cfg_.lambda));

      struct Combo {
        MorreyParams mp;
        std::vector<double> denom;
        std::array<std::vector<double>, 6> r;
      };
      std::vector<Combo> combos;
      for (double p : cfg_.ps) {
        for (double kappa : cfg_.kappas) {
          Combo c{{p, kappa}, {}, {}};
          for (const auto& s : samples_) c.denom.push_back(morrey_norm(s, c.mp, cfg_.weight, base_.balls).value);
          c.r = ratios(outs, c.denom, c.mp, cfg_.weight, base_.balls);
          combos.push_back(std::move(c));
        }
      }
      for (std::size_t i = 0; i < samples_.size(); ++i)
        if (!(combos.front().denom[i] > 0.0))
          rep.notices.push_back(member_tag(alpha, i, members_[i]) + ": zero norm, excluded");

      auto argmax = [](const std::vector<double>& v) {
        std::size_t best = v.size();
        for (std::size_t i = 0; i < v.size(); ++i)
          if (!std::isnan(v[i]) && (best == v.size() || v[i] > v[best])) best = i;
        return best;
      };

      // Members to refine: arg-maxima in (p, kappa, operator) order, deduplicated.
      std::vector<std::size_t> chosen;
      for (const auto& c : combos)
        for (std::size_t op = 0; op < 6; ++op) {
          const std::size_t a = argmax(c.r[op]);
          if (a < samples_.size() && std::find(chosen.begin(), chosen.end(), a) == chosen.end()) chosen.push_back(a);
        }
      if (chosen.size() > static_cast<std::size_t>(cfg_.refinement.members)) chosen.resize(cfg_.refinement.members);

      // Homogeneity: recompute the first chosen member for c f.
      std::vector<std::array<double, 6>> scaled_r;  // per combo
      if (!chosen.empty()) {
        const std::size_t i = chosen.front();
        const SampledField cf = samples_[i].scaled(scale_c);
        const auto a = a_alpha_field(cf, base_.ladder, spec, opt_);
        const auto fam = modulated_family(b_, cf, base_.ladder, spec, opt_);
        const auto o = operator_outputs(a, fam, cfg_.lambda);
        for (const auto& c : combos) {
          const double den = morrey_norm(cf, c.mp, cfg_.weight, base_.balls).value;
          std::array<double, 6> v{};
          for (std::size_t op = 0; op < 6; ++op) v[op] = morrey_norm(o[op], c.mp, cfg_.weight, base_.balls).value / den;
          scaled_r.push_back(v);
        }
      }

      // Refinement: same physical ladder and balls, finer grid and kernel.
      std::vector<std::array<std::vector<double>, 6>> refined;  // per combo, per op, per chosen member
      if (cfg_.refinement.enabled && !chosen.empty()) {
        const Resolution fine = make_resolution(cfg_, cfg_.refinement.N, cfg_.refinement.m);
        const auto fspec = spec_at(cfg_, alpha, cfg_.refinement.m);
        const SampledField fb = b_spec_.sample(fine.grid);
        std::vector<std::array<SampledField, 6>> fouts;
        std::vector<SampledField> fsamples;
        for (std::size_t i : chosen) {
          fsamples.push_back(members_[i].sample(fine.grid));
          const auto a = a_alpha_field(fsamples.back(), fine.ladder, fspec, opt_);
          const auto fam = modulated_family(fb, fsamples.back(), fine.ladder, fspec, opt_);
          fouts.push_back(operator_outputs(a, fam, cfg_.lambda));
        }
        for (const auto& c : combos) {
          std::vector<double> den;
          for (const auto& s : fsamples) den.push_back(morrey_norm(s, c.mp, cfg_.weight, fine.balls).value);
          refined.push_back(ratios(fouts, den, c.mp, cfg_.weight, fine.balls));
        }
      }

      for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        const auto& c = combos[ci];
        for (std::size_t op = 0; op < 6; ++op) {
          const std::string tag = fmt("alpha=%g p=%g kappa=%g ", alpha, c.mp.p, c.mp.kappa) + kOps[op];
          const std::size_t am = argmax(c.r[op]);
          std::vector<double> valid;
          for (double v : c.r[op])
            if (!std::isnan(v)) valid.push_back(v);
          const double fmax = am < samples_.size() ? c.r[op][am] : 0.0;
          double median = 0.0;
          if (!valid.empty()) {
            std::sort(valid.begin(), valid.end());
            median = valid[valid.size() / 2];
          }
          nlohmann::json diag = {{"family_max", fmax},
                                 {"family_median", median},
                                 {"argmax_member", am < samples_.size() ? nlohmann::json(am) : nlohmann::json()}};

          // Finite maximum.
          rep.cases.push_back(make_inequality(tag + " family max finite", fmax, fmax, fmax, "empirical-family-max", 0.0));
          rep.cases.back().pass = std::isfinite(fmax);

          // Homogeneity under f -> c f.
          if (!scaled_r.empty()) {
            const double base_r = c.r[op][chosen.front()];
            // Relative, except that ratios at rounding level compare absolutely.
            const double rel = std::abs(scaled_r[ci][op] - base_r) / std::max(base_r, 1e-6);
            rep.cases.push_back(make_inequality(tag + fmt(" R(c f) vs R(f), c=%g, member %g", scale_c,
                                                          static_cast<double>(chosen.front())),
                                                rel, 1e-10, 1e-10, "explicit", 0.0));
          }

          // Refinement drift on the refined members.
          if (!refined.empty()) {
            double bmax = 0.0, rmax = 0.0;
            for (std::size_t k = 0; k < chosen.size(); ++k) {
              const double bv = c.r[op][chosen[k]];
              const double rv = refined[ci][op][k];
              if (!std::isnan(bv)) bmax = std::max(bmax, bv);
              if (!std::isnan(rv)) rmax = std::max(rmax, rv);
            }
            const double drift = bmax > 0.0 ? std::abs(rmax - bmax) / bmax : std::abs(rmax - bmax);
            diag["refined_max"] = rmax;
            diag["base_max_on_refined_members"] = bmax;
            diag["drift"] = drift;
            rep.cases.push_back(make_inequality(tag + fmt(" drift under N->%g, m->%g", cfg_.refinement.N,
                                                          cfg_.refinement.m),
                                                drift, cfg_.refinement.drift_bound, fmax, "empirical-family-max", 0.0));
            rep.cases.back().pass = rep.cases.back().pass && std::isfinite(rmax);
          }
          rep.diagnostics[tag] = diag;
        }
      }
      nlohmann::json ch = nlohmann::json::array();
      for (std::size_t i : chosen) ch.push_back(i);
      rep.diagnostics[fmt("alpha=%g refined_members", alpha)] = ch;
    }
    return rep;
  }

  SuiteReport aperture_scaling() {
    SuiteReport rep = start("aperture_scaling");
    rep.params["weight"] = cfg_.weight.to_json();
    rep.params["p"] = cfg_.ps;
    rep.params["j_max"] = cfg_.aperture_j_max;
    const int n = cfg_.dim;
    const double reach = std::ldexp(cfg_.t_max, cfg_.aperture_j_max);
    if (reach > 2.0 * cfg_.L)
      rep.notices.push_back(fmt("aperture reach 2^j_max t_max = %g exceeds the box width %g; wide cones are truncated",
                                reach, 2.0 * cfg_.L));
    for (double alpha : cfg_.alphas) {
      const auto& data = data_.at(alpha);
      for (double p : cfg_.ps) {
        const double rate = std::pow(2.0, n * std::max(1.0, p / 2.0));
        std::vector<double> emp(cfg_.aperture_j_max + 1, 0.0);
        for (std::size_t i = 0; i < data.size(); ++i) {
          const std::string tag = member_tag(alpha, i, members_[i]) + fmt(" p=%g", p);
          const auto rho = aperture_ratios(*data[i].field, p, cfg_.weight, cfg_.aperture_j_max);
          if (rho.empty()) {
            rep.notices.push_back(tag + ": S_alpha f = 0, excluded");
            continue;
          }
          rep.cases.push_back(make_inequality(tag + " rho_0 = 1", rho[0], 1.0, 1.0, "explicit", 0.0));
          rep.cases.back().pass = rho[0] == 1.0;
          for (int j = 0; j < cfg_.aperture_j_max; ++j) {
            rep.cases.push_back(make_inequality(tag + fmt(" rho_%g <= rho_%g", j, j + 1), rho[j], rho[j + 1], 1.0,
                                                "explicit", 1e-12));
            rep.cases.push_back(make_inequality(tag + fmt(" rho_%g / rho_%g", j + 1, j), rho[j + 1] / rho[j],
                                                rate * (1.0 + kRateTol), rate, "explicit", 0.0));
          }
          for (int j = 0; j <= cfg_.aperture_j_max; ++j) emp[j] = std::max(emp[j], rho[j]);
        }
        rep.diagnostics[fmt("alpha=%g p=%g max_rho", alpha, p)] = emp;
      }
      for (std::size_t i = 0; i < data.size(); ++i)
        for (int j = 0; j < cfg_.aperture_j_max; ++j)
          rep.cases.push_back(aperture_monotone_check(*data[i].field, std::ldexp(1.0, j), member_tag(alpha, i, members_[i])));
    }
    return rep;
  }

  SuiteReport gstar_domination() {
    SuiteReport rep = start("gstar_domination");
    rep.params["lambda"] = cfg_.lambda;
    rep.params["J"] = cfg_.J;
    rep.params["lambda_alt"] = cfg_.lambda_alt;
    for (double alpha : cfg_.alphas) {
      const auto& data = data_.at(alpha);
      for (std::size_t i = 0; i < data.size(); ++i) {
        const std::string tag = member_tag(alpha, i, members_[i]);
        rep.cases.push_back(gstar_domination_check(*data[i].field, cfg_.lambda, cfg_.J, tag));
        rep.cases.push_back(cone_bound_check(*data[i].field, cfg_.lambda, tag));
        for (double l2 : cfg_.lambda_alt) {
          const double lo = std::min(cfg_.lambda, l2), hi = std::max(cfg_.lambda, l2);
          rep.cases.push_back(lambda_monotone_check(*data[i].field, lo, hi, tag));
        }
      }
    }
    return rep;
  }

  // Chain balls 2^i B for every root, i = 0..k_max+1.
  std::vector<Ball> chain_balls(const GridSpec&) const {
    std::vector<Ball> out;
    for (const Ball& r : cfg_.bmo_roots)
      for (int i = 0; i <= cfg_.k_max + 1; ++i) out.push_back(r.scaled(std::ldexp(1.0, i)));
    return out;
  }

  SuiteReport bmo_dyadic_growth() {
    SuiteReport rep = start("bmo_dyadic_growth");
    rep.params["k_max"] = cfg_.k_max;
    rep.params["balls"] = base_.balls.id() + "+chains";
    if (cfg_.dim != 1) rep.notices.push_back("the 2^n (k+1) constant is exact on the lattice in 1D only");
    const auto chains = BallFamily::listed(base_.grid, chain_balls(base_.grid));
    const double h = base_.grid.spacing();
    std::vector<std::pair<std::string, SampledField>> bs{
        {"b=" + cfg_.b.dump(), b_},
        {"b+3", b_.shifted(3.0)},
        {"log(|x|+h)", SampledField::from_function(base_.grid, [h](const Point& x) { return std::log(std::hypot(x[0], x[1]) + h); })},
        {"constant 2", SampledField::constant(base_.grid, 2.0)}};
    for (std::size_t i = 0; i < std::min<std::size_t>(5, samples_.size()); ++i)
      bs.emplace_back(fmt("member %g ", static_cast<double>(i)) + members_[i].digest, samples_[i]);
    for (const auto& [name, b] : bs) {
      const double norm = std::max(bmo_norm(b, base_.balls).value, bmo_norm(b, chains).value);
      rep.diagnostics[name + " bmo_norm"] = norm;
      for (const Ball& root : cfg_.bmo_roots)
        for (auto& c : bmo_dyadic_growth_check(b, root, cfg_.k_max, norm, name)) rep.cases.push_back(std::move(c));
    }
    return rep;
  }

  SuiteReport holder_ap_average() {
    SuiteReport rep = start("holder_ap_average");
    rep.params["weight"] = cfg_.weight.to_json();
    rep.params["p"] = cfg_.ps;
    rep.params["kappa"] = cfg_.kappas;
    rep.params["k_max"] = cfg_.k_max;
    rep.params["balls"] = base_.balls.id() + "+chains";
    const auto chains = BallFamily::listed(base_.grid, chain_balls(base_.grid));
    for (double p : cfg_.ps) {
      const double ap = std::max(ap_characteristic(cfg_.weight, p, base_.balls).supremum,
                                 ap_characteristic(cfg_.weight, p, chains).supremum);
      rep.diagnostics[fmt("p=%g A_p", p)] = ap;
      for (double kappa : cfg_.kappas) {
        const MorreyParams mp{p, kappa};
        std::map<std::pair<std::size_t, int>, std::optional<InequalityReport>> worst;
        for (std::size_t i = 0; i < samples_.size(); ++i) {
          const double mn = std::max(morrey_norm(samples_[i], mp, cfg_.weight, base_.balls).value,
                                     morrey_norm(samples_[i], mp, cfg_.weight, chains).value);
          for (std::size_t r = 0; r < cfg_.bmo_roots.size(); ++r) {
            auto cs = holder_ap_average_check(samples_[i], cfg_.weight, mp, cfg_.bmo_roots[r], cfg_.k_max, ap, mn,
                                              fmt("member %g", static_cast<double>(i)));
            for (int k = 0; k <= cfg_.k_max; ++k) keep_worst(worst[{r, k}], cs[k]);
          }
        }
        for (auto& [key, c] : worst) rep.cases.push_back(*c);
      }
    }
    return rep;
  }

  SuiteReport subset_and_doubling() {
    SuiteReport rep = start("subset_and_doubling");
    rep.params["weight"] = cfg_.weight.to_json();
    rep.params["r"] = cfg_.rh_r;
    rep.params["balls"] = base_.balls.id();
    const GridSpec& g = base_.grid;

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < base_.balls.size(); ++i)
      if (base_.balls[i].scaled(2.0).inside(g)) keep.push_back(i);
    const BallFamily dbl = base_.balls.restrict(keep, "2B inside");
    for (double p : cfg_.ps) {
      const auto d = doubling_report(cfg_.weight, p, dbl, {2.0});
      rep.diagnostics[fmt("p=%g doubling max ratio", p)] = d.max_ratio;
      rep.diagnostics[fmt("p=%g doubling constant", p)] = d.max_normalized;
      rep.cases.push_back(make_inequality(fmt("w(2B) <= C 2^{np} w(B), p=%g", p), d.max_normalized, d.max_normalized,
                                          d.max_normalized, "empirical-family-max", 0.0));
      rep.cases.back().pass = std::isfinite(d.max_normalized);
    }

    // Subset ratios over every family ball, worst case per subset kind.
    const char* kinds[] = {"empty", "full", "right of center", "outer shell", "upper quarter", "random half"};
    std::array<std::optional<InequalityReport>, 6> worst;
    std::mt19937_64 rng(cfg_.family.seed ^ 0x5bd1e995ull);
    for (std::size_t b = 0; b < base_.balls.size(); ++b) {
      const Ball& ball = base_.balls[b];
      const auto& m = base_.balls.mask(b);
      std::vector<std::vector<std::uint32_t>> subsets(6);
      subsets[1] = m.nodes;
      for (std::uint32_t node : m.nodes) {
        const Point x = g.node(node);
        const double d = distance(x, ball.center, g.dim());
        if (x[0] >= ball.center[0]) subsets[2].push_back(node);
        if (d >= 0.5 * ball.radius) subsets[3].push_back(node);
        if (x[0] >= ball.center[0] + 0.5 * ball.radius) subsets[4].push_back(node);
        if (unit_uniform(rng) < 0.5) subsets[5].push_back(node);
      }
      const auto res = subset_ratio_check(g, cfg_.weight, cfg_.rh_r, ball, subsets);
      for (std::size_t k = 0; k < 6; ++k) {
        InequalityReport r = res[k];
        r.digest = std::string(kinds[k]) + ", " + r.digest;
        keep_worst(worst[k], r);
      }
    }
    for (auto& w : worst) rep.cases.push_back(*w);

    for (const Ball& root : cfg_.bmo_roots)
      for (auto& c : rh_chain_check(g, cfg_.weight, cfg_.rh_r, root, cfg_.k_max, "chain")) rep.cases.push_back(std::move(c));
    return rep;
  }

  SuiteReport commutator_split() {
    SuiteReport rep = start("commutator_split");
    rep.params["b"] = cfg_.b;
    rep.params["split_ball"] = {{"center", {cfg_.split_ball.center[0], cfg_.split_ball.center[1]}},
                                {"radius", cfg_.split_ball.radius}};
    const double c = ball_average(b_, cfg_.split_ball);
    rep.diagnostics["b_B"] = c;
    const SampledField bc = b_.shifted(-c);
    for (double alpha : cfg_.alphas) {
      const auto& data = data_.at(alpha);
      const auto spec = spec_at(cfg_, alpha, cfg_.m);
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto a_bcf = a_alpha_field(bc.times(samples_[i]), base_.ladder, spec, opt_);
        rep.cases.push_back(commutator_split_check(*data[i].comm, *data[i].field, a_bcf, c, 1.0,
                                                   member_tag(alpha, i, members_[i])));
      }
    }
    return rep;
  }

  const RunConfig& cfg_;
  FieldOptions opt_;
  Resolution base_;
  std::vector<FunctionSpec> members_;
  std::vector<SampledField> samples_;
  FunctionSpec b_spec_;
  SampledField b_ = SampledField::constant(GridSpec::general(1, 1.0, 3), 0.0);
  std::map<double, std::vector<MemberData>> data_;
};

}  // namespace

std::vector<SuiteReport> run_verify(const RunConfig& config, const FieldOptions& options) {
  return Runner(config, options).run();
}

void emit_report(const std::vector<SuiteReport>& reports, const RunConfig& config, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  nlohmann::json suites = nlohmann::json::array();
  bool pass = true;
  for (const auto& r : reports) {
    suites.push_back(r.to_json());
    pass = pass && r.pass();
  }
  const nlohmann::json doc = {{"config_digest", config.digest}, {"pass", pass}, {"suites", suites}};
  const std::string report_path = dir + "/report.json";
  std::ofstream out(report_path);
  if (!out) throw IoError("cannot write '" + report_path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + report_path + "'");

  const std::string csv_path = dir + "/summary.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write '" + csv_path + "'");
  csv << "suite,cases,failed,max_ratio,pass,config_digest\n";
  for (const auto& r : reports) {
    std::size_t failed = 0;
    for (const auto& c : r.cases) failed += c.pass ? 0 : 1;
    char line[256];
    std::snprintf(line, sizeof line, "%s,%zu,%zu,%.17g,%s,%s\n", r.suite.c_str(), r.cases.size(), failed, r.max_ratio(),
                  r.pass() ? "true" : "false", config.digest.c_str());
    csv << line;
  }
  if (!csv) throw IoError("write failed for '" + csv_path + "'");
}

}  // namespace sqlab
