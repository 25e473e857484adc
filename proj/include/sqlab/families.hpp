#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlab/grid.hpp"

namespace sqlab {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/**
 * A function given analytically so it can be sampled on any grid (the
 * refinement runs resample the same members). Constant members keep their
 * value outside the box; all others vanish there.
 */
struct FunctionSpec {
  std::string digest;
  std::function<double(const Point&)> fn;
  bool constant = false;
  double value = 0.0;  // constant members only

  SampledField sample(const GridSpec& grid) const;
};

/**
 * Function kinds understood in configs:
 *   {"kind":"constant","value":c}
 *   {"kind":"bump","center":[..],"radius":r,"amplitude":a}      a (1 - |x-c|^2/r^2)^2
 *   {"kind":"indicator","lo":a,"hi":b,"edge":e}               1 inside (a,b) in x1, e (default 1/2) on the end nodes
 *   {"kind":"step","at":a,"low":0,"high":1}                      high for x1 >= a, else low
 *   {"kind":"log","scale":s}                                     log(|x| + s)
 */
FunctionSpec function_from_json(const nlohmann::json& j);

enum class FamilyKind { kBumps, kDyadicAtoms, kSignPatterns, kRandomTrig, kConstants };
std::string to_string(FamilyKind k);
FamilyKind family_kind_from_string(const std::string& s);

/// Deterministic test family: (kind, count, seed, ranges) fix every member.
struct TestFamilySpec {
  FamilyKind kind = FamilyKind::kBumps;
  int count = 50;
  std::uint64_t seed = 20240601;
  double amp_min = 0.5;
  double amp_max = 2.0;
  double scale_min = 0.125;  // radius, atom half-length, cell length or taper width
  double scale_max = 1.0;
  double support = 2.0;      // members vanish outside [-support, support]^dim

  void validate() const;
  nlohmann::json to_json() const;
  static TestFamilySpec from_json(const nlohmann::json& j);
};

std::vector<FunctionSpec> generate_family(int dim, const TestFamilySpec& spec);

}  // namespace sqlab
