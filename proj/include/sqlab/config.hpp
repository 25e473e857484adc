#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sqlab/families.hpp"
#include "sqlab/grid.hpp"
#include "sqlab/kernel_class.hpp"
#include "sqlab/weights.hpp"

namespace sqlab {

struct RefinementConfig {
  bool enabled = true;
  int N = 513;
  int m = 129;
  int members = 4;           // family members re-evaluated (the base arg-maxima first)
  double drift_bound = 0.25;
};

/// Everything a run needs; all fields validated by parse_config.
struct RunConfig {
  // grid
  int dim = 1;
  double L = 4.0;
  int N = 257;
  // ladder (t_min <= 0 means the grid spacing)
  double t_min = 0.0;
  double t_max = 2.0;
  int levels = 24;
  // kernel
  std::vector<double> alphas{0.5, 1.0};
  int m = 65;
  KernelMode mode = KernelMode::kLp;
  WarmStart warm = WarmStart::kChain;
  // operators
  double beta = 1.0;
  double lambda = 4.0;
  int J = 6;
  std::vector<double> lambda_alt{6.0, 8.0};
  // spaces
  WeightSpec weight = WeightSpec::power(0.5);
  std::vector<double> ps{2.0, 3.0};
  std::vector<double> kappas{0.25, 0.5};
  double rh_r = 2.0;
  // balls (r0 <= 0 means the grid spacing)
  double r0 = 0.0;
  int ball_j_max = 7;
  double ball_spacing = 0.25;
  int k_max = 4;
  std::vector<Ball> bmo_roots{{{0.125, 0.0}, 0.0625}, {{0.0, 0.0}, 0.125}, {{-0.5, 0.0}, 0.0625}};
  Ball split_ball{{0.0, 0.0}, 1.0};
  // functions
  TestFamilySpec family;
  nlohmann::json b = {{"kind", "step"}, {"at", 0.0}};
  nlohmann::json f = {{"kind", "bump"}, {"center", 0.25}, {"radius", 0.75}, {"amplitude", 1.0}};
  // verify
  std::vector<std::string> suites{"boundedness",        "aperture_scaling",   "gstar_domination", "bmo_dyadic_growth",
                                  "holder_ap_average", "subset_and_doubling", "commutator_split"};
  int aperture_j_max = 4;
  RefinementConfig refinement;
  // sqfn
  std::string op = "s_alpha";
  // extremizer: (y, t) pairs
  std::vector<std::pair<Point, double>> points{{{0.0, 0.0}, 1.0}};

  nlohmann::json source;  // the parsed document
  std::string digest;     // FNV-1a of the canonical dump

  GridSpec grid() const;
  TimeLadder ladder(const GridSpec& g) const;
  HolderClassSpec kernel_spec(double alpha) const { return {alpha, m, mode}; }
  BallFamily ball_family(const GridSpec& g) const;
  bool has_suite(const std::string& name) const;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

std::string fnv1a_hex(const std::string& s);

}  // namespace sqlab
