#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sqlab/grid.hpp"
#include "sqlab/weights.hpp"

namespace sqlab {

struct MorreyParams {
  double p = 2.0;      // [1, inf); suites use p > 1
  double kappa = 0.5;  // (0, 1)
  void validate() const;
};

/// A ball supremum together with the per-ball values it was taken over.
struct NormReport {
  double value = 0.0;
  std::size_t achieving_ball = 0;
  std::vector<double> per_ball;
  std::string family_id;

  nlohmann::json to_json() const;
};

// (sum q_i |f_i|^p w_i)^(1/p).
double lebesgue_norm(const SampledField& f, double p, const WeightSpec& w);

// max over B of (w(B)^(-kappa) sum_{i in B} q_i |f_i|^p w_i)^(1/p).
NormReport morrey_norm(const SampledField& f, const MorreyParams& mp, const WeightSpec& w, const BallFamily& balls);

double ball_average(const SampledField& b, const Ball& ball);
double ball_average(const SampledField& b, const BallMask& mask);

// sup over the family of avg_B |b - b_B|.
NormReport bmo_norm(const SampledField& b, const BallFamily& balls);

// (avg_B |b - b_B|^p)^(1/p).
double bmo_oscillation_p(const SampledField& b, const Ball& ball, double p);

/**
 * M_w f restricted to family balls: at each node, the largest weighted average
 * of |f| over the family balls that contain it. A lower bound for the maximal
 * function over all balls. Throws when some node lies in no family ball.
 */
SampledField weighted_maximal(const SampledField& f, const WeightSpec& w, const BallFamily& balls);

}  // namespace sqlab
