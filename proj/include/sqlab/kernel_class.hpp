#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sqlab/grid.hpp"
#include "sqlab/holder_lp.hpp"

namespace sqlab {

enum class KernelMode { kLp, kDictionary, kRadialLp };

std::string to_string(KernelMode mode);
KernelMode kernel_mode_from_string(const std::string& s);

/// Discretization parameters of the Hölder class C_alpha.
struct HolderClassSpec {
  double alpha = 1.0;  // in (0, 1]
  int m = 65;          // kernel nodes per axis on [-1,1]^dim, odd
  KernelMode mode = KernelMode::kLp;

  void validate(int dim) const;
};

/// One fixed, pre-verified dictionary kernel.
struct DictionaryKernel {
  std::string name;
  bool radial = false;
  std::vector<double> values;  // one per kernel-grid node
};

/**
 * The grid-restricted class C_alpha for one (dim, alpha, m): kernel grid,
 * free/pinned split, the LP structures (full and radially reduced), and the
 * fixed dictionary. Immutable once built; share freely across threads.
 */
class KernelClass {
 public:
  static std::shared_ptr<const KernelClass> build(int dim, const HolderClassSpec& spec);

  int dim() const { return grid_.dim(); }
  const HolderClassSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return grid_; }
  std::span<const std::int32_t> free_nodes() const { return free_; }
  bool pinned(std::size_t node) const { return free_pos_[node] < 0; }

  // Hölder distance |u_i - u_j|^alpha between kernel-grid nodes.
  double holder_distance(std::size_t i, std::size_t j) const;

  // Full program: one variable per free node.
  const std::shared_ptr<const HolderStructure>& full_structure() const { return full_; }
  // Radial program: one variable per class of free nodes with equal |u|.
  const std::shared_ptr<const HolderStructure>& radial_structure() const { return radial_; }
  std::span<const std::int32_t> radial_class_of_free() const { return radial_class_; }

  // Fixed banks of optimal bases used as warm starts (deterministic, objective-free).
  const std::vector<LpBasis>& anchors_full() const { return anchors_full_; }
  const std::vector<LpBasis>& anchors_radial() const { return anchors_radial_; }

  const std::vector<DictionaryKernel>& dictionary() const { return dictionary_; }
  static constexpr int kDictionaryVersion = 1;

  // Pairs over the whole kernel grid, plus the support pins and the mean row.
  std::size_t constraint_count() const;

  // Stable digest of (dim, alpha, m, mode) for result metadata.
  std::string digest() const;

 private:
  KernelClass() = default;
  void build_dictionary();

  HolderClassSpec spec_;
  GridSpec grid_ = GridSpec::general(1, 1.0, 3);
  std::vector<std::int32_t> free_;
  std::vector<std::int32_t> free_pos_;
  std::shared_ptr<const HolderStructure> full_;
  std::shared_ptr<const HolderStructure> radial_;
  std::vector<std::int32_t> radial_class_;
  std::vector<LpBasis> anchors_full_;
  std::vector<LpBasis> anchors_radial_;
  std::vector<DictionaryKernel> dictionary_;
};

/// Largest violation of the class constraints by kernel values phi (all pairs).
struct KernelResiduals {
  double support = 0.0;  // max |phi| at pinned nodes
  double mean = 0.0;     // |sum q_i phi_i|
  double holder = 0.0;   // max over pairs of |phi_i - phi_j| - |u_i - u_j|^alpha (clamped at 0)
  double max() const;
};
KernelResiduals kernel_residuals(const KernelClass& kc, std::span<const double> phi);

/// A_alpha(f)(y,t) as a linear program: objective over kernel-grid nodes.
struct KernelProgram {
  std::shared_ptr<const KernelClass> kernel_class;
  std::vector<double> objective;  // c_i = q_i f(y - t u_i); pinned entries kept for reference

  std::size_t constraint_count() const { return kernel_class->constraint_count(); }
};

struct KernelSolution {
  double value = 0.0;
  SampledField extremizer;  // kernel-grid values, 0 at pinned nodes
  int iterations = 0;
  double gap = 0.0;
};

enum class WarmStart {
  kAnchor,  // every solve starts from the class's fixed anchor bank
  kChain,   // start from the previous optimal basis of this evaluator
};

/**
 * Per-thread evaluation workspace for one KernelClass: holds the LP solvers,
 * the anchor bases, and the chained basis. Results depend only on the inputs
 * and on the sequence of calls made on this evaluator.
 */
class KernelEvaluator {
 public:
  explicit KernelEvaluator(std::shared_ptr<const KernelClass> kc);

  const KernelClass& kernel_class() const { return *kc_; }
  const std::shared_ptr<const KernelClass>& shared_class() const { return kc_; }

  // c_i = q_i * f(y - t u_i) over all kernel nodes.
  void assemble(const SampledField& f, const Point& y, double t, std::vector<double>& c) const;
  // beta * c_i(f) - c_i(bf), the modulated objective of the commutators.
  void assemble_modulated(const SampledField& f, const SampledField& bf, double beta, const Point& y,
                          double t, std::vector<double>& c) const;

  // Mode-dependent sup of |sum c_i phi_i| over the class.
  double value(std::span<const double> c, WarmStart ws = WarmStart::kAnchor);
  // Same with the extremizer. Dictionary mode returns the best atom.
  KernelSolution solve(std::span<const double> c, WarmStart ws = WarmStart::kAnchor);

  void reset_chain();
  int last_iterations() const { return last_iterations_; }

 private:
  LpResult solve_lp(std::span<const double> c, WarmStart ws);
  double dictionary_value(std::span<const double> c, int* best) const;

  std::shared_ptr<const KernelClass> kc_;
  std::unique_ptr<HolderLpSolver> solver_;
  LpBasis chain_;
  std::vector<double> reduced_;
  int last_iterations_ = 0;
};

// Process-wide cache of built classes keyed by (dim, alpha, m, mode).
std::shared_ptr<const KernelClass> shared_kernel_class(int dim, const HolderClassSpec& spec);

// Thread-local evaluator cache keyed by (dim, alpha, m, mode).
KernelEvaluator& thread_evaluator(int dim, const HolderClassSpec& spec);

KernelProgram assemble_program(const SampledField& f, const Point& y, double t, const HolderClassSpec& spec);
KernelSolution solve_program(const KernelProgram& program);

double a_alpha(const SampledField& f, const Point& y, double t, const HolderClassSpec& spec);
double modulated_a_alpha(const SampledField& b, const SampledField& f, const Point& x, const Point& y,
                         double t, const HolderClassSpec& spec);

}  // namespace sqlab
