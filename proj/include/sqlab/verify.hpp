#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlab/aalpha.hpp"
#include "sqlab/config.hpp"
#include "sqlab/spaces.hpp"
#include "sqlab/square_functions.hpp"
#include "sqlab/weights.hpp"

namespace sqlab {

/// Result of one suite. pass() is the conjunction of the case flags.
struct SuiteReport {
  std::string suite;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<InequalityReport> cases;
  nlohmann::json diagnostics = nlohmann::json::object();
  std::vector<std::string> notices;

  bool pass() const;
  double max_ratio() const;
  std::size_t worst_case() const;  // index of the largest ratio
  nlohmann::json to_json() const;
};

// Pointwise lhs <= rhs (+ tolerance) over all nodes, reported at the node of least slack.
InequalityReport pointwise_check(const std::string& digest, const SampledField& lhs, const SampledField& rhs,
                                 double constant, double tolerance);

// g*_{lambda} on R_0..R_J squared against S_1^2 + sum_j 2^(-(j-1) lambda n) S_{2^j}^2.
InequalityReport gstar_domination_check(const AalphaField& a, double lambda, int regions, const std::string& tag);
// S_{alpha,1} <= 2^(lambda n / 2) g*_{lambda}.
InequalityReport cone_bound_check(const AalphaField& a, double lambda, const std::string& tag);
// g*_{lambda2} <= g*_{lambda1} for lambda1 <= lambda2.
InequalityReport lambda_monotone_check(const AalphaField& a, double lambda1, double lambda2, const std::string& tag);
// S_{alpha,beta} <= S_{alpha,2 beta}.
InequalityReport aperture_monotone_check(const AalphaField& a, double beta, const std::string& tag);

// rho_j = ||S_{alpha,2^j} f||_{L^p_w} / ||S_alpha f||_{L^p_w}, j = 0..j_max (empty when S_alpha f = 0).
std::vector<double> aperture_ratios(const AalphaField& a, double p, const WeightSpec& w, int j_max);

// |b_{2^{k+1}B} - b_B| <= 2^n (k+1) ||b||_* for k = 1..k_max.
std::vector<InequalityReport> bmo_dyadic_growth_check(const SampledField& b, const Ball& root, int k_max,
                                                      double bmo_norm_value, const std::string& tag);

// avg_{2^{k+1}B} |f| <= [w]^{1/p} ||f||_{L^{p,kappa}(w)} w(2^{k+1}B)^{(kappa-1)/p}, k = 0..k_max.
std::vector<InequalityReport> holder_ap_average_check(const SampledField& f, const WeightSpec& w,
                                                      const MorreyParams& mp, const Ball& root, int k_max,
                                                      double ap_constant, double morrey_value, const std::string& tag);

// w(B)/w(2^{k+1}B) <= C_rh(2^{k+1}B) (|B|/|2^{k+1}B|)^((r-1)/r), k = 0..k_max.
std::vector<InequalityReport> rh_chain_check(const GridSpec& grid, const WeightSpec& w, double r, const Ball& root,
                                             int k_max, const std::string& tag);

// |[b,S_{alpha,beta}] f| <= |b - c| S_{alpha,beta} f + S_{alpha,beta}((b - c) f) pointwise.
InequalityReport commutator_split_check(const ModulatedFamily& fam, const AalphaField& a_f,
                                        const AalphaField& a_bcf, double c, double beta, const std::string& tag);

/// Runs the suites selected in the config, in their canonical order.
std::vector<SuiteReport> run_verify(const RunConfig& config, const FieldOptions& options);

// report.json ({config_digest, pass, suites}) and summary.csv under dir.
void emit_report(const std::vector<SuiteReport>& reports, const RunConfig& config, const std::string& dir);

}  // namespace sqlab
