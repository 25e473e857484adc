#include "sqlab/square_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqlab/error.hpp"
#include "sqlab/parallel.hpp"

namespace sqlab {

namespace {

constexpr double kNoReach = std::numeric_limits<double>::infinity();

nlohmann::json kernel_params(const HolderClassSpec& spec, WarmStart warm) {
  return {{"alpha", spec.alpha},
          {"m", spec.m},
          {"mode", to_string(spec.mode)},
          {"warm_start", warm == WarmStart::kChain ? "chain" : "anchor"}};
}

SqfnResult make_result(const GridSpec& grid, std::vector<double> values, std::string op, nlohmann::json params,
                       const TimeLadder& ladder, const HolderClassSpec& spec) {
  SqfnResult r{SampledField(grid, std::move(values)), std::move(op), std::move(params), ladder.t_min(),
               ladder.t_max(), ladder.levels(), shared_kernel_class(grid.dim(), spec)->digest()};
  return r;
}

/**
 * sqrt(sum_k dlog(t_k) t_k^-n sum_j A_x(y_j, t_k)^2 q_j weight(|x - y_j|, t_k))
 * at every node x, where A_x = field_of(x). Only nodes within reach(t) of x
 * are visited; weight returns 0 to skip a node. Inner sums run over y in
 * row-major order, so nested node sets give ordered sums.
 */
template <class FieldOf, class Weight, class Reach>
std::vector<double> plane_sum(const GridSpec& grid, const TimeLadder& ladder, FieldOf field_of, Weight weight,
                              Reach reach) {
  const std::size_t n = grid.size();
  const int dim = grid.dim();
  const int pts = grid.points();
  const double h = grid.spacing();
  const auto q = grid.weights();
  const auto tk = ladder.nodes();
  const auto lw = ladder.log_weights();
  std::vector<double> out(n);
  parallel_for(n, 0, [&](std::size_t xi) {
    const AalphaField& a = field_of(xi);
    const Point x = grid.node(xi);
    const auto xm = grid.multi_index(xi);
    double total = 0.0;
    for (int k = 0; k < ladder.levels(); ++k) {
      const double t = tk[k];
      const double r = reach(t);
      const int span = std::isfinite(r) ? static_cast<int>(std::ceil(r / h)) + 1 : pts;
      std::array<int, 2> lo{0, 0}, hi{0, 0};
      for (int d = 0; d < dim; ++d) {
        lo[d] = std::max(0, xm[d] - span);
        hi[d] = std::min(pts - 1, xm[d] + span);
      }
      const auto level = a.level(k);
      double inner = 0.0;
      for (int i0 = lo[0]; i0 <= hi[0]; ++i0) {
        for (int i1 = lo[1]; i1 <= hi[1]; ++i1) {
          const std::size_t yj = grid.flat_index(i0, i1);
          const double w = weight(distance(x, grid.node(yj), dim), t);
          if (w > 0.0) inner += level[yj] * level[yj] * q[yj] * w;
        }
      }
      total += inner * lw[k] * std::pow(t, -dim);
    }
    out[xi] = std::sqrt(total);
  });
  return out;
}

std::vector<double> cone_values(const GridSpec& grid, const TimeLadder& ladder, double beta,
                                const std::function<const AalphaField&(std::size_t)>& field_of) {
  if (!(beta > 0.0)) throw InvalidArgument("cone aperture must be positive");
  return plane_sum(
      grid, ladder, field_of, [beta](double d, double t) { return d < beta * t ? 1.0 : 0.0; },
      [beta](double t) { return beta * t; });
}

std::vector<double> gstar_values(const GridSpec& grid, const TimeLadder& ladder, double lambda,
                                 std::optional<int> regions,
                                 const std::function<const AalphaField&(std::size_t)>& field_of) {
  if (!(lambda > 0.0)) throw InvalidArgument("g* parameter lambda must be positive");
  if (regions && *regions < 0) throw InvalidArgument("region count must be >= 0");
  const double e = lambda * grid.dim();
  const double cut = regions ? std::ldexp(1.0, *regions) : kNoReach;
  return plane_sum(
      grid, ladder, field_of,
      [e, cut](double d, double t) { return d < cut * t ? std::pow(t / (t + d), e) : 0.0; },
      [cut](double t) { return cut * t; });
}

std::vector<double> g_values(const GridSpec& grid, const TimeLadder& ladder,
                             const std::function<const AalphaField&(std::size_t)>& field_of) {
  std::vector<double> out(grid.size());
  const auto lw = ladder.log_weights();
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const AalphaField& a = field_of(x);
    double s = 0.0;
    for (int k = 0; k < ladder.levels(); ++k) s += a.at(x, k) * a.at(x, k) * lw[k];
    out[x] = std::sqrt(s);
  }
  return out;
}

}  // namespace

nlohmann::json SqfnResult::metadata() const {
  return {{"operator", op},      {"params", params}, {"t_min", t_min},
          {"t_max", t_max},      {"levels", levels}, {"kernel_digest", kernel_digest}};
}

SqfnResult s_alpha_beta(const AalphaField& a, double beta) {
  auto params = kernel_params(a.spec(), a.warm_start());
  params["beta"] = beta;
  return make_result(a.grid(), cone_values(a.grid(), a.ladder(), beta, [&a](std::size_t) -> const AalphaField& { return a; }),
                     "s_alpha_beta", std::move(params), a.ladder(), a.spec());
}

SqfnResult g_alpha(const AalphaField& a) {
  return make_result(a.grid(), g_values(a.grid(), a.ladder(), [&a](std::size_t) -> const AalphaField& { return a; }),
                     "g_alpha", kernel_params(a.spec(), a.warm_start()), a.ladder(), a.spec());
}

SqfnResult g_star(const AalphaField& a, double lambda, std::optional<int> regions) {
  auto params = kernel_params(a.spec(), a.warm_start());
  params["lambda"] = lambda;
  if (regions) params["regions"] = *regions;
  return make_result(
      a.grid(), gstar_values(a.grid(), a.ladder(), lambda, regions, [&a](std::size_t) -> const AalphaField& { return a; }),
      "g_star", std::move(params), a.ladder(), a.spec());
}

SampledField gstar_region_bound(const AalphaField& a, double lambda, int regions) {
  if (regions < 0) throw InvalidArgument("region count must be >= 0");
  const int n = a.grid().dim();
  std::vector<double> sum(a.grid().size(), 0.0);
  for (int j = 0; j <= regions; ++j) {
    const double factor = j == 0 ? 1.0 : std::pow(2.0, -(j - 1) * lambda * n);
    const auto s = s_alpha_beta(a, std::ldexp(1.0, j)).output;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += factor * s[i] * s[i];
  }
  for (double& v : sum) v = std::sqrt(v);
  return SampledField(a.grid(), std::move(sum));
}

ModulatedFamily modulated_family(const SampledField& b, const SampledField& f, const TimeLadder& ladder,
                                 const HolderClassSpec& spec, const FieldOptions& options) {
  if (!(b.grid() == f.grid())) throw InvalidArgument("b and f live on different grids");
  std::vector<double> betas(b.values().begin(), b.values().end());
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
  std::vector<AalphaField> fields;
  fields.reserve(betas.size());
  for (double beta : betas) fields.push_back(modulated_a_alpha_field(b, f, beta, ladder, spec, options));
  std::vector<std::uint32_t> of(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    of[i] = static_cast<std::uint32_t>(std::lower_bound(betas.begin(), betas.end(), b[i]) - betas.begin());
  return ModulatedFamily{b, f, std::move(betas), std::move(fields), std::move(of)};
}

SqfnResult commutator_s_alpha(const ModulatedFamily& fam, double beta) {
  const AalphaField& a0 = fam.fields.front();
  auto params = kernel_params(a0.spec(), a0.warm_start());
  params["beta"] = beta;
  params["distinct_b_values"] = fam.betas.size();
  return make_result(
      a0.grid(),
      cone_values(a0.grid(), a0.ladder(), beta, [&fam](std::size_t x) -> const AalphaField& { return fam.at_node(x); }),
      "commutator_s_alpha", std::move(params), a0.ladder(), a0.spec());
}

SqfnResult commutator_g_alpha(const ModulatedFamily& fam) {
  const AalphaField& a0 = fam.fields.front();
  auto params = kernel_params(a0.spec(), a0.warm_start());
  params["distinct_b_values"] = fam.betas.size();
  return make_result(a0.grid(),
                     g_values(a0.grid(), a0.ladder(), [&fam](std::size_t x) -> const AalphaField& { return fam.at_node(x); }),
                     "commutator_g_alpha", std::move(params), a0.ladder(), a0.spec());
}

SqfnResult commutator_g_star(const ModulatedFamily& fam, double lambda) {
  const AalphaField& a0 = fam.fields.front();
  auto params = kernel_params(a0.spec(), a0.warm_start());
  params["lambda"] = lambda;
  params["distinct_b_values"] = fam.betas.size();
  return make_result(a0.grid(),
                     gstar_values(a0.grid(), a0.ladder(), lambda, std::nullopt,
                                  [&fam](std::size_t x) -> const AalphaField& { return fam.at_node(x); }),
                     "commutator_g_star", std::move(params), a0.ladder(), a0.spec());
}

SqfnResult commutator_s_alpha(const SampledField& b, const SampledField& f, const HolderClassSpec& spec,
                              const TimeLadder& ladder, double beta, const FieldOptions& options) {
  return commutator_s_alpha(modulated_family(b, f, ladder, spec, options), beta);
}

SqfnResult commutator_g_star(const SampledField& b, const SampledField& f, const HolderClassSpec& spec,
                             const TimeLadder& ladder, double lambda, const FieldOptions& options) {
  return commutator_g_star(modulated_family(b, f, ladder, spec, options), lambda);
}

SqfnResult commutator_g_alpha(const SampledField& b, const SampledField& f, const HolderClassSpec& spec,
                              const TimeLadder& ladder, const FieldOptions& options) {
  if (!(b.grid() == f.grid())) throw InvalidArgument("b and f live on different grids");
  spec.validate(f.grid().dim());
  const GridSpec& grid = f.grid();
  const SampledField bf = b.times(f);
  const auto tk = ladder.nodes();
  const auto lw = ladder.log_weights();
  shared_kernel_class(grid.dim(), spec);
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t xi) {
    KernelEvaluator& ev = thread_evaluator(grid.dim(), spec);
    ev.reset_chain();
    const Point x = grid.node(xi);
    std::vector<double> c;
    double s = 0.0;
    for (int k = 0; k < ladder.levels(); ++k) {
      ev.assemble_modulated(f, bf, b[xi], x, tk[k], c);
      if (std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; })) continue;
      double v = 0.0;
      try {
        v = ev.solve(c, options.warm).value;
      } catch (const SolverError& e) {
        char where[160];
        std::snprintf(where, sizeof where, " [commutator_g_alpha at x=(%.17g, %.17g), t=%.17g]", x[0], x[1], tk[k]);
        throw SolverError(e.what() + std::string(where), e.best_value(), e.gap());
      }
      s += v * v * lw[k];
    }
    out[xi] = std::sqrt(s);
  });
  auto params = kernel_params(spec, options.warm);
  return make_result(grid, std::move(out), "commutator_g_alpha", std::move(params), ladder, spec);
}

}  // namespace sqlab
