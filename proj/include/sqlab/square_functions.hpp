#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlab/aalpha.hpp"
#include "sqlab/grid.hpp"

namespace sqlab {

/// One square-function output with the metadata needed to compare results.
struct SqfnResult {
  SampledField output;
  std::string op;          // "s_alpha_beta", "g_alpha", "g_star", "commutator_*"
  nlohmann::json params;   // alpha, m, mode, beta / lambda / J, warm start
  double t_min = 0.0;
  double t_max = 0.0;
  int levels = 0;
  std::string kernel_digest;

  nlohmann::json metadata() const;
};

// Cone quadrature: sum over t_k and |x - y_j| < beta t_k of A^2 q_j dlog(t_k) t_k^-n.
SqfnResult s_alpha_beta(const AalphaField& a, double beta);
inline SqfnResult s_alpha(const AalphaField& a) { return s_alpha_beta(a, 1.0); }

// sum over t_k of A(x, t_k)^2 dlog(t_k).
SqfnResult g_alpha(const AalphaField& a);

// Full-plane sum with the weight (t/(t + |x - y|))^(lambda n). With `regions`
// set to J the sum only runs over |x - y| < 2^J t, i.e. the regions R_0..R_J.
SqfnResult g_star(const AalphaField& a, double lambda, std::optional<int> regions = std::nullopt);

// sqrt(S_{alpha,1}^2 + sum_{j=1..J} 2^(-(j-1) lambda n) S_{alpha,2^j}^2), the
// region bound that dominates g_star truncated to R_0..R_J.
SampledField gstar_region_bound(const AalphaField& a, double lambda, int regions);

/**
 * Inner fields of the commutators: one modulated field sup|beta c(f) - c(bf)|
 * per distinct value beta of b on the grid. The commutator at x reads the
 * field of beta = b(x). Cost grows with the number of distinct values, so
 * step functions are cheap and generic b costs one field per node.
 */
struct ModulatedFamily {
  SampledField b;
  SampledField f;
  std::vector<double> betas;       // distinct values of b, ascending
  std::vector<AalphaField> fields;  // fields[i] belongs to betas[i]
  std::vector<std::uint32_t> field_of_node;

  const AalphaField& at_node(std::size_t node) const { return fields[field_of_node[node]]; }
};

ModulatedFamily modulated_family(const SampledField& b, const SampledField& f, const TimeLadder& ladder,
                                 const HolderClassSpec& spec, const FieldOptions& options = {});

SqfnResult commutator_s_alpha(const ModulatedFamily& fam, double beta = 1.0);
SqfnResult commutator_g_alpha(const ModulatedFamily& fam);
SqfnResult commutator_g_star(const ModulatedFamily& fam, double lambda);

SqfnResult commutator_s_alpha(const SampledField& b, const SampledField& f, const HolderClassSpec& spec,
                              const TimeLadder& ladder, double beta = 1.0, const FieldOptions& options = {});
// Solves only the levels above each node (y = x), so it never needs whole fields.
SqfnResult commutator_g_alpha(const SampledField& b, const SampledField& f, const HolderClassSpec& spec,
                              const TimeLadder& ladder, const FieldOptions& options = {});
SqfnResult commutator_g_star(const SampledField& b, const SampledField& f, const HolderClassSpec& spec,
                             const TimeLadder& ladder, double lambda, const FieldOptions& options = {});

}  // namespace sqlab
