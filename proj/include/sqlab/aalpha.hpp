#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sqlab/grid.hpp"
#include "sqlab/kernel_class.hpp"

namespace sqlab {

struct FieldStats {
  std::uint64_t solves = 0;      // LPs actually solved (zero objectives skipped)
  std::uint64_t iterations = 0;  // simplex pivots in total
  double max_gap = 0.0;
};

/// A_alpha(f)(y_j, t_k) for every spatial node y_j and ladder level t_k.
class AalphaField {
 public:
  AalphaField(GridSpec grid, TimeLadder ladder, HolderClassSpec spec, WarmStart warm,
              std::vector<double> values, FieldStats stats);

  const GridSpec& grid() const { return grid_; }
  const TimeLadder& ladder() const { return ladder_; }
  const HolderClassSpec& spec() const { return spec_; }
  WarmStart warm_start() const { return warm_; }
  const FieldStats& stats() const { return stats_; }

  // Level-major storage: values()[k * grid().size() + j].
  std::span<const double> values() const { return values_; }
  double at(std::size_t node, int level) const { return values_[static_cast<std::size_t>(level) * grid_.size() + node]; }
  std::span<const double> level(int k) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(k) * grid_.size(), grid_.size());
  }
  double sup() const;

  AalphaField scaled(double c) const;  // |c| times every value (homogeneity)

 private:
  GridSpec grid_;
  TimeLadder ladder_;
  HolderClassSpec spec_;
  WarmStart warm_;
  std::vector<double> values_;
  FieldStats stats_;
};

struct FieldOptions {
  // kAnchor: every node solved independently (spot calls reproduce it bit-for-bit).
  // kChain: each ladder level is one chain over ascending nodes; faster, and
  // deterministic because chains never cross levels.
  WarmStart warm = WarmStart::kAnchor;
  int threads = 0;  // <= 0: default_threads()
  // Fraction of (field, level) units recomputed serially and compared bit-for-bit.
  double audit_fraction = 0.0;
};

/// Objective assembly for one (y, t): writes the kernel-grid coefficients.
using ObjectiveFn = std::function<void(const KernelEvaluator&, const Point& y, double t, std::vector<double>& c)>;

/// One batch evaluation over all (y_j, t_k), split into per-level work units.
struct FieldJob {
  GridSpec grid;
  TimeLadder ladder;
  HolderClassSpec spec;
  ObjectiveFn objective;
  std::string label;  // used in error locations and audit sampling
};

AalphaField run_field_job(const FieldJob& job, const FieldOptions& options = {});

// Values of one level computed from a fresh evaluator (the serial reference).
std::vector<double> run_field_level(const FieldJob& job, int level, WarmStart warm, FieldStats* stats = nullptr);

AalphaField a_alpha_field(const SampledField& f, const TimeLadder& ladder, const HolderClassSpec& spec,
                          const FieldOptions& options = {});

// Inner field of the commutators for one value beta = b(x): sup |beta c(f) - c(b f)|.
AalphaField modulated_a_alpha_field(const SampledField& b, const SampledField& f, double beta,
                                    const TimeLadder& ladder, const HolderClassSpec& spec,
                                    const FieldOptions& options = {});

/// Process-wide tally of serial-audit results.
struct AuditTally {
  std::uint64_t units = 0;
  std::uint64_t mismatches = 0;
};
AuditTally audit_tally();
void reset_audit_tally();

}  // namespace sqlab
