#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace sqlab {

/**
 * Constraint data of a discrete Hölder-class program over n free variables:
 *
 *   maximize  sum_a c_a phi_a
 *   s.t.      phi_a - phi_b <= dist(a,b)      for all ordered pairs a != b
 *             |phi_a|       <= boundary(a)     (pairs with the pinned nodes, phi = 0 there)
 *             sum_a mean_weight(a) phi_a = 0
 *
 * Pair constraints implied by a two-step path (dist(a,c) + dist(c,b) <= dist(a,b))
 * are dropped by build_arcs(); the feasible set is unchanged up to rounding.
 * The feasible set never depends on the objective, so one optimal basis is
 * dual feasible for every later objective.
 */
struct HolderStructure {
  int n = 0;
  std::vector<double> dist;          // n*n, symmetric, zero diagonal
  std::vector<double> boundary;      // n
  std::vector<double> mean_weights;  // n

  // Retained unordered pairs {pair_a, pair_b}. Pair p gives two arcs:
  // 2p is phi_a - phi_b <= cost, 2p+1 is phi_b - phi_a <= cost.
  std::vector<std::int32_t> pair_a;
  std::vector<std::int32_t> pair_b;
  std::vector<double> pair_cost;

  double pair(int a, int b) const { return dist[static_cast<std::size_t>(a) * n + b]; }
  std::size_t arc_count() const { return 2 * pair_cost.size(); }
  void build_arcs();
};

/// Basis of the dual (transport) problem: one column id per row.
struct LpBasis {
  std::vector<std::int32_t> heads;
  bool empty() const { return heads.empty(); }
};

struct LpResult {
  double value = 0.0;        // optimum of the maximization, clamped at 0
  std::vector<double> phi;   // extremizer, one entry per free variable
  LpBasis basis;             // optimal basis (empty for the all-zero objective)
  int iterations = 0;
  double gap = 0.0;          // |primal objective - dual objective| at termination
};

/**
 * Revised simplex on the dual of the Hölder program.
 *
 * The dual reads: min sum cost_j x_j s.t. E x = c, x >= 0 except the free
 * multiplier of the mean constraint. Columns are e_a - e_b (arcs), +-e_a
 * (pinned pairs) and the mean-weight vector. The simplex multipliers of an
 * optimal basis are the extremal kernel phi.
 *
 * Cold solves run primal simplex from the slack-like basis {sign(c_a) e_a};
 * warm solves run dual simplex from any previously optimal basis. Chained
 * solves (warm basis = the basis left by the previous solve) reuse the current
 * inverse, so their results depend on the sequence of calls.
 *
 * Not thread-safe: one solver (workspace) per thread.
 */
class HolderLpSolver {
 public:
  explicit HolderLpSolver(std::shared_ptr<const HolderStructure> structure, int iteration_limit = 50000);

  const HolderStructure& structure() const { return *s_; }

  LpResult solve(std::span<const double> objective, const LpBasis* warm = nullptr);

  // Fixed bank of optimal bases, factorized once. solve_anchored() starts from
  // the bank member with the least primal infeasibility for the objective, so
  // its result is a pure function of the objective.
  void set_anchors(std::span<const LpBasis> bank);
  LpResult solve_anchored(std::span<const double> objective);

 private:
  enum class Outcome { kOptimal, kStalled };

  std::size_t column_count() const { return na_ + 2 * static_cast<std::size_t>(n_) + 1; }
  std::int32_t mean_column() const { return static_cast<std::int32_t>(na_ + 2 * n_); }
  double cost(std::int32_t col) const;
  double reduced_cost(std::int32_t col) const;
  void ftran(std::int32_t col, std::vector<double>& w) const;

  void load_basis(std::span<const std::int32_t> heads);
  void cold_basis();
  bool refactor();
  bool refresh();
  bool start_from(const LpBasis& warm);
  void start_from_bank();
  LpResult finish(int iterations, Outcome out);
  void pivot(int row, std::int32_t col, const std::vector<double>& w);

  bool primal_feasible(double tol) const;
  bool dual_feasible(double tol) const;

  Outcome run_primal(int& iterations);
  Outcome run_dual(int& iterations);

  std::shared_ptr<const HolderStructure> s_;
  int n_ = 0;
  std::size_t np_ = 0;  // retained pair count
  std::size_t na_ = 0;  // arc count, 2 * np_
  int iteration_limit_;

  std::vector<double> c_;
  std::vector<std::int32_t> heads_;
  std::vector<std::int32_t> pos_;  // row of a basic column, -1 otherwise
  std::vector<double> binv_;       // row-major n*n
  std::vector<double> xb_;
  std::vector<double> pi_;
  std::vector<double> work_w_;
  std::vector<double> work_rho_;
  std::vector<double> work_mat_;
  struct Candidate {
    std::int32_t id;
    double ratio;
    double neg_alpha;
  };
  std::vector<Candidate> cands_;
  double tol_primal_ = 0.0;

  bool have_state_ = false;  // binv_/pi_ match heads_ from the previous solve
  int pivots_since_refactor_ = 0;
  struct Factored {
    std::vector<std::int32_t> heads;
    std::vector<double> binv;
    std::vector<double> pi;
  };
  std::vector<Factored> anchors_;
};

}  // namespace sqlab
