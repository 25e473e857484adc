#include "sqlab/holder_lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sqlab/error.hpp"

namespace sqlab {

namespace {

constexpr double kTolDual = 1e-12;
constexpr double kTolPivot = 1e-9;
constexpr double kRelTolPrimal = 1e-11;
// Consecutive degenerate pivots before switching to Bland's rule.
constexpr int kBlandAfter = 60;
// Pivots between refactorizations of the basis inverse.
constexpr int kRefactorEvery = 200;
// Relative slack under which a two-step path counts as implying a pair constraint.
constexpr double kImpliedSlack = 1e-14;

}  // namespace

void HolderStructure::build_arcs() {
  pair_a.clear();
  pair_b.clear();
  pair_cost.clear();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double dab = pair(a, b);
      const double lim = dab * (1.0 + kImpliedSlack);
      bool implied = false;
      for (int c = 0; c < n && !implied; ++c) {
        if (c == a || c == b) continue;
        implied = pair(a, c) + pair(c, b) <= lim;
      }
      if (implied) continue;
      pair_a.push_back(a);
      pair_b.push_back(b);
      pair_cost.push_back(dab);
    }
  }
}

HolderLpSolver::HolderLpSolver(std::shared_ptr<const HolderStructure> structure, int iteration_limit)
    : s_(std::move(structure)), iteration_limit_(iteration_limit) {
  n_ = s_->n;
  np_ = s_->pair_cost.size();
  na_ = 2 * np_;
  const std::size_t n = n_;
  if (s_->dist.size() != n * n || s_->boundary.size() != n || s_->mean_weights.size() != n ||
      s_->pair_a.size() != np_ || s_->pair_b.size() != np_)
    throw InvalidArgument("inconsistent Hölder program structure");
  if (n > 1 && na_ == 0) throw InvalidArgument("Hölder program structure has no arcs (call build_arcs)");
  heads_.resize(n);
  pos_.assign(column_count(), -1);
  binv_.resize(n * n);
  work_mat_.resize(n * n);
  xb_.resize(n);
  pi_.resize(n);
  work_w_.resize(n);
  work_rho_.resize(n);
}

double HolderLpSolver::cost(std::int32_t col) const {
  const auto c = static_cast<std::size_t>(col);
  if (c < na_) return s_->pair_cost[c >> 1];
  if (c < na_ + 2 * static_cast<std::size_t>(n_)) return s_->boundary[(c - na_) % n_];
  return 0.0;
}

double HolderLpSolver::reduced_cost(std::int32_t col) const {
  const auto c = static_cast<std::size_t>(col);
  const std::size_t n = n_;
  if (c < na_) {
    const double diff = pi_[s_->pair_a[c >> 1]] - pi_[s_->pair_b[c >> 1]];
    return s_->pair_cost[c >> 1] - ((c & 1) ? -diff : diff);
  }
  if (c < na_ + n) return s_->boundary[c - na_] - pi_[c - na_];
  if (c < na_ + 2 * n) return s_->boundary[c - na_ - n] + pi_[c - na_ - n];
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += pi_[j] * s_->mean_weights[j];
  return -s;
}

void HolderLpSolver::ftran(std::int32_t col, std::vector<double>& w) const {
  const auto c = static_cast<std::size_t>(col);
  const std::size_t n = n_;
  if (c < na_) {
    std::size_t a = s_->pair_a[c >> 1], b = s_->pair_b[c >> 1];
    if (c & 1) std::swap(a, b);
    for (std::size_t k = 0; k < n; ++k) w[k] = binv_[k * n + a] - binv_[k * n + b];
  } else if (c < na_ + n) {
    const std::size_t a = c - na_;
    for (std::size_t k = 0; k < n; ++k) w[k] = binv_[k * n + a];
  } else if (c < na_ + 2 * n) {
    const std::size_t a = c - na_ - n;
    for (std::size_t k = 0; k < n; ++k) w[k] = -binv_[k * n + a];
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += binv_[k * n + j] * s_->mean_weights[j];
      w[k] = s;
    }
  }
}

void HolderLpSolver::load_basis(std::span<const std::int32_t> heads) {
  std::fill(pos_.begin(), pos_.end(), -1);
  std::copy(heads.begin(), heads.end(), heads_.begin());
  for (int r = 0; r < n_; ++r) pos_[heads_[r]] = r;
}

void HolderLpSolver::cold_basis() {
  std::vector<std::int32_t> heads(n_);
  for (int a = 0; a < n_; ++a)
    heads[a] = static_cast<std::int32_t>(na_ + (c_[a] >= 0.0 ? a : n_ + a));
  load_basis(heads);
}

bool HolderLpSolver::refactor() {
  const std::size_t n = n_;
  // work_mat_ = B (column r holds the column of basis head r), binv_ = I.
  std::fill(work_mat_.begin(), work_mat_.end(), 0.0);
  std::fill(binv_.begin(), binv_.end(), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    binv_[r * n + r] = 1.0;
    const auto c = static_cast<std::size_t>(heads_[r]);
    if (c < na_) {
      const double sign = (c & 1) ? -1.0 : 1.0;
      work_mat_[static_cast<std::size_t>(s_->pair_a[c >> 1]) * n + r] = sign;
      work_mat_[static_cast<std::size_t>(s_->pair_b[c >> 1]) * n + r] = -sign;
    } else if (c < na_ + n) {
      work_mat_[(c - na_) * n + r] = 1.0;
    } else if (c < na_ + 2 * n) {
      work_mat_[(c - na_ - n) * n + r] = -1.0;
    } else {
      for (std::size_t k = 0; k < n; ++k) work_mat_[k * n + r] = s_->mean_weights[k];
    }
  }
  // Gauss-Jordan with partial pivoting.
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = col;
    double best = std::abs(work_mat_[col * n + col]);
    for (std::size_t k = col + 1; k < n; ++k) {
      const double v = std::abs(work_mat_[k * n + col]);
      if (v > best) {
        best = v;
        p = k;
      }
    }
    if (best < 1e-13) return false;
    if (p != col) {
      std::swap_ranges(work_mat_.begin() + p * n, work_mat_.begin() + (p + 1) * n, work_mat_.begin() + col * n);
      std::swap_ranges(binv_.begin() + p * n, binv_.begin() + (p + 1) * n, binv_.begin() + col * n);
    }
    const double inv = 1.0 / work_mat_[col * n + col];
    for (std::size_t j = 0; j < n; ++j) {
      work_mat_[col * n + j] *= inv;
      binv_[col * n + j] *= inv;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (k == col) continue;
      const double f = work_mat_[k * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        work_mat_[k * n + j] -= f * work_mat_[col * n + j];
        binv_[k * n + j] -= f * binv_[col * n + j];
      }
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += binv_[r * n + j] * c_[j];
    xb_[r] = s;
  }
  std::fill(pi_.begin(), pi_.end(), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double cb = cost(heads_[r]);
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) pi_[j] += cb * binv_[r * n + j];
  }
  return true;
}

bool HolderLpSolver::refresh() {
  if (!refactor()) return false;
  pivots_since_refactor_ = 0;
  return true;
}

void HolderLpSolver::pivot(int row, std::int32_t col, const std::vector<double>& w) {
  const std::size_t n = n_;
  const std::size_t r = static_cast<std::size_t>(row);
  const double wr = w[r];
  const double rc = reduced_cost(col);
  std::copy(binv_.begin() + r * n, binv_.begin() + (r + 1) * n, work_rho_.begin());

  const double theta = xb_[r] / wr;
  for (std::size_t k = 0; k < n; ++k) xb_[k] -= theta * w[k];
  xb_[r] = theta;

  const double step = rc / wr;
  for (std::size_t j = 0; j < n; ++j) pi_[j] += step * work_rho_[j];

  double* row_r = binv_.data() + r * n;
  for (std::size_t j = 0; j < n; ++j) row_r[j] /= wr;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == r || w[k] == 0.0) continue;
    const double f = w[k];
    double* row_k = binv_.data() + k * n;
    for (std::size_t j = 0; j < n; ++j) row_k[j] -= f * row_r[j];
  }
  pos_[heads_[r]] = -1;
  heads_[r] = col;
  pos_[col] = row;
  ++pivots_since_refactor_;
}

bool HolderLpSolver::primal_feasible(double tol) const {
  const auto mu = mean_column();
  for (int r = 0; r < n_; ++r)
    if (heads_[r] != mu && xb_[r] < -tol) return false;
  return true;
}

bool HolderLpSolver::dual_feasible(double tol) const {
  const std::size_t n = n_;
  const auto* pa = s_->pair_a.data();
  const auto* pb = s_->pair_b.data();
  const auto* d = s_->pair_cost.data();
  for (std::size_t p = 0; p < np_; ++p) {
    const double diff = pi_[pa[p]] - pi_[pb[p]];
    // Only the arc in the direction of diff can have a negative reduced cost.
    if (d[p] - std::abs(diff) < -tol && pos_[2 * p + (diff < 0.0 ? 1 : 0)] < 0) return false;
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (pos_[na_ + a] < 0 && s_->boundary[a] - pi_[a] < -tol) return false;
    if (pos_[na_ + n + a] < 0 && s_->boundary[a] + pi_[a] < -tol) return false;
  }
  const auto mu = mean_column();
  if (pos_[mu] < 0 && std::abs(reduced_cost(mu)) > tol) return false;
  return true;
}

HolderLpSolver::Outcome HolderLpSolver::run_primal(int& iterations) {
  const std::size_t n = n_;
  const auto mu = mean_column();
  const auto* pa = s_->pair_a.data();
  const auto* pb = s_->pair_b.data();
  const auto* d = s_->pair_cost.data();
  int degenerate = 0;
  while (true) {
    if (++iterations > iteration_limit_) return Outcome::kStalled;
    if (pivots_since_refactor_ > kRefactorEvery && !refresh()) return Outcome::kStalled;
    const bool bland = degenerate > kBlandAfter;

    // Pricing: most negative reduced cost (Bland: first eligible column).
    std::int32_t q = -1;
    double best = -kTolDual;
    double dir = 1.0;
    auto consider = [&](std::size_t id, double rc) {
      if (bland) {
        if (q < 0 && rc < -kTolDual) q = static_cast<std::int32_t>(id);
      } else if (rc < best) {
        best = rc;
        q = static_cast<std::int32_t>(id);
      }
    };
    for (std::size_t p = 0; p < np_ && !(bland && q >= 0); ++p) {
      const double diff = pi_[pa[p]] - pi_[pb[p]];
      const double rc = d[p] - std::abs(diff);
      const std::size_t k = 2 * p + (diff < 0.0 ? 1 : 0);
      if (rc < -kTolDual && pos_[k] < 0) consider(k, rc);
    }
    for (std::size_t a = 0; a < n; ++a)
      if (pos_[na_ + a] < 0) consider(na_ + a, s_->boundary[a] - pi_[a]);
    for (std::size_t a = 0; a < n; ++a)
      if (pos_[na_ + n + a] < 0) consider(na_ + n + a, s_->boundary[a] + pi_[a]);
    if (pos_[mu] < 0) {
      const double rc = reduced_cost(mu);
      if (std::abs(rc) > kTolDual && (q < 0 || (!bland && -std::abs(rc) < best))) {
        q = mu;
        dir = rc < 0.0 ? 1.0 : -1.0;
      }
    }
    if (q < 0) return Outcome::kOptimal;

    ftran(q, work_w_);
    // Harris two-pass ratio test over rows whose basic variable decreases.
    double theta_max = INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
      if (heads_[k] == mu) continue;
      const double wk = dir * work_w_[k];
      if (wk > kTolPivot) theta_max = std::min(theta_max, (std::max(xb_[k], 0.0) + tol_primal_) / wk);
    }
    if (!std::isfinite(theta_max)) throw SolverError("kernel LP dual is unbounded (numerical breakdown)", 0.0, INFINITY);
    int r = -1;
    double best_piv = 0.0;
    double best_ratio = INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
      if (heads_[k] == mu) continue;
      const double wk = dir * work_w_[k];
      if (wk <= kTolPivot) continue;
      const double ratio = std::max(xb_[k], 0.0) / wk;
      if (ratio > theta_max) continue;
      if (bland) {
        if (ratio < best_ratio - 1e-15 || (ratio <= best_ratio + 1e-15 && (r < 0 || heads_[k] < heads_[r]))) {
          best_ratio = std::min(best_ratio, ratio);
          r = static_cast<int>(k);
        }
      } else if (wk > best_piv) {
        best_piv = wk;
        r = static_cast<int>(k);
      }
    }
    const double step = std::max(xb_[r], 0.0) / (dir * work_w_[r]);
    degenerate = step <= tol_primal_ ? degenerate + 1 : 0;
    pivot(r, q, work_w_);
  }
}

HolderLpSolver::Outcome HolderLpSolver::run_dual(int& iterations) {
  const std::size_t n = n_;
  const auto mu = mean_column();
  const auto* pa = s_->pair_a.data();
  const auto* pb = s_->pair_b.data();
  const auto* d = s_->pair_cost.data();
  int stalls = 0;
  while (true) {
    if (++iterations > iteration_limit_) return Outcome::kStalled;
    if (pivots_since_refactor_ > kRefactorEvery && !refresh()) return Outcome::kStalled;
    const bool bland = stalls > kBlandAfter;

    int r = -1;
    double worst = -tol_primal_;
    for (std::size_t k = 0; k < n; ++k) {
      if (heads_[k] == mu) continue;
      if (xb_[k] < worst) {
        r = static_cast<int>(k);
        if (bland) break;
        worst = xb_[k];
      }
    }
    if (r < 0) return Outcome::kOptimal;

    const double* rho = binv_.data() + static_cast<std::size_t>(r) * n;
    std::int32_t q = -1;
    if (pos_[mu] < 0) {
      double am = 0.0;
      for (std::size_t j = 0; j < n; ++j) am += rho[j] * s_->mean_weights[j];
      if (std::abs(am) > kTolPivot) q = mu;
    }
    if (q < 0) {
      // Harris ratio test in one sweep: entering columns need alpha = rho.col < 0.
      // theta_max is the relaxed bound; candidates above the running bound are
      // dropped immediately and the rest filtered once the bound is final.
      double theta_max = INFINITY;
      cands_.clear();
      auto consider = [&](std::size_t id, double rc, double neg_alpha) {
        const double rcp = std::max(rc, 0.0);
        const double relaxed = (rcp + kTolDual) / neg_alpha;
        const double ratio = rcp / neg_alpha;
        if (ratio > theta_max) return;
        theta_max = std::min(theta_max, relaxed);
        cands_.push_back({static_cast<std::int32_t>(id), ratio, neg_alpha});
      };
      for (std::size_t p = 0; p < np_; ++p) {
        const double delta = rho[pb[p]] - rho[pa[p]];
        if (std::abs(delta) <= kTolPivot) continue;
        // Arc 2p has alpha = -delta, arc 2p+1 has alpha = +delta.
        const std::size_t k = 2 * p + (delta > 0.0 ? 0 : 1);
        if (pos_[k] >= 0) continue;
        const double diff = pi_[pa[p]] - pi_[pb[p]];
        consider(k, d[p] - (delta > 0.0 ? diff : -diff), std::abs(delta));
      }
      for (std::size_t a = 0; a < n; ++a) {
        if (rho[a] < -kTolPivot && pos_[na_ + a] < 0) consider(na_ + a, s_->boundary[a] - pi_[a], -rho[a]);
        if (rho[a] > kTolPivot && pos_[na_ + n + a] < 0) consider(na_ + n + a, s_->boundary[a] + pi_[a], rho[a]);
      }
      if (cands_.empty()) throw SolverError("kernel LP dual is infeasible (numerical breakdown)", 0.0, INFINITY);

      // Among steps within the bound, the largest pivot (Bland: smallest ratio, then id).
      double best_alpha = 0.0;
      double best_ratio = INFINITY;
      for (const auto& cand : cands_) {
        if (cand.ratio > theta_max) continue;
        if (bland) {
          if (cand.ratio < best_ratio - 1e-15 || (cand.ratio <= best_ratio + 1e-15 && cand.id < q)) {
            best_ratio = std::min(best_ratio, cand.ratio);
            q = cand.id;
          }
        } else if (cand.neg_alpha > best_alpha) {
          best_alpha = cand.neg_alpha;
          best_ratio = cand.ratio;
          q = cand.id;
        }
      }
      if (q < 0) throw SolverError("kernel LP dual ratio test failed (numerical breakdown)", 0.0, INFINITY);
      stalls = best_ratio <= kTolDual ? stalls + 1 : 0;
    }
    ftran(q, work_w_);
    pivot(r, q, work_w_);
  }
}

bool HolderLpSolver::start_from(const LpBasis& warm) {
  const std::size_t n = n_;
  if (have_state_ && warm.heads == heads_) {
    // Same basis as the one left by the previous solve: only xb depends on c.
    if (pivots_since_refactor_ > kRefactorEvery) return refresh();
  } else {
    load_basis(warm.heads);
    return refresh();
  }
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = binv_.data() + r * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * c_[j];
    xb_[r] = s;
  }
  return true;
}

void HolderLpSolver::set_anchors(std::span<const LpBasis> bank) {
  anchors_.clear();
  c_.assign(n_, 0.0);
  for (const auto& b : bank) {
    if (b.heads.size() != static_cast<std::size_t>(n_)) throw InvalidArgument("anchor basis has the wrong size");
    load_basis(b.heads);
    if (!refresh() || !dual_feasible(10.0 * kTolDual)) throw InvalidArgument("anchor basis is not dual feasible");
    anchors_.push_back({heads_, binv_, pi_});
  }
  have_state_ = false;
}

void HolderLpSolver::start_from_bank() {
  const std::size_t n = n_;
  const auto mu = mean_column();
  std::size_t best = 0;
  double best_score = INFINITY;
  for (std::size_t k = 0; k < anchors_.size(); ++k) {
    const auto& f = anchors_[k];
    double score = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (f.heads[r] == mu) continue;
      const double* row = f.binv.data() + r * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * c_[j];
      if (s < 0.0) score -= s;
    }
    if (score < best_score) {
      best_score = score;
      best = k;
    }
  }
  const auto& f = anchors_[best];
  load_basis(f.heads);
  binv_ = f.binv;
  pi_ = f.pi;
  pivots_since_refactor_ = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = binv_.data() + r * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * c_[j];
    xb_[r] = s;
  }
  have_state_ = true;
}

LpResult HolderLpSolver::solve_anchored(std::span<const double> objective) {
  if (anchors_.empty()) return solve(objective, nullptr);
  if (objective.size() != static_cast<std::size_t>(n_)) throw InvalidArgument("objective size mismatch");
  c_.assign(objective.begin(), objective.end());
  double scale = 0.0;
  for (double v : c_) {
    if (!std::isfinite(v)) throw InvalidArgument("objective coefficients must be finite");
    scale = std::max(scale, std::abs(v));
  }
  if (n_ == 0 || scale == 0.0) {
    LpResult zero;
    zero.phi.assign(n_, 0.0);
    return zero;
  }
  tol_primal_ = kRelTolPrimal * scale;
  int iterations = 0;
  start_from_bank();
  return finish(iterations, run_dual(iterations));
}

LpResult HolderLpSolver::solve(std::span<const double> objective, const LpBasis* warm) {
  if (objective.size() != static_cast<std::size_t>(n_)) throw InvalidArgument("objective size mismatch");
  c_.assign(objective.begin(), objective.end());
  double scale = 0.0;
  for (double v : c_) {
    if (!std::isfinite(v)) throw InvalidArgument("objective coefficients must be finite");
    scale = std::max(scale, std::abs(v));
  }
  if (n_ == 0 || scale == 0.0) {
    LpResult zero;
    zero.phi.assign(n_, 0.0);
    return zero;
  }
  tol_primal_ = kRelTolPrimal * scale;

  int iterations = 0;
  if (warm != nullptr && warm->heads.size() == static_cast<std::size_t>(n_)) {
    if (start_from(*warm) && dual_feasible(10.0 * kTolDual)) {
      have_state_ = true;
      return finish(iterations, run_dual(iterations));
    }
  }
  cold_basis();
  if (!refresh()) throw SolverError("singular slack basis", 0.0, INFINITY);
  have_state_ = true;
  return finish(iterations, run_primal(iterations));
}

LpResult HolderLpSolver::finish(int iterations, Outcome out) {
  auto cold = [&] {
    cold_basis();
    if (!refresh()) throw SolverError("singular slack basis", 0.0, INFINITY);
    return run_primal(iterations);
  };
  // Verify the updated quantities; refactor and continue if they drifted.
  for (int round = 0; out == Outcome::kOptimal; ++round) {
    if (primal_feasible(10.0 * tol_primal_) && dual_feasible(10.0 * kTolDual)) break;
    if (round >= 4) {
      out = Outcome::kStalled;
      break;
    }
    if (!refresh()) {
      out = cold();
      continue;
    }
    const bool pf = primal_feasible(10.0 * tol_primal_);
    const bool df = dual_feasible(10.0 * kTolDual);
    if (pf && df) break;
    if (df)
      out = run_dual(iterations);
    else if (pf)
      out = run_primal(iterations);
    else
      out = cold();
  }

  LpResult result;
  double dual_obj = 0.0;
  double primal_obj = 0.0;
  for (int a = 0; a < n_; ++a) dual_obj += c_[a] * pi_[a];
  for (int r = 0; r < n_; ++r) primal_obj += cost(heads_[r]) * xb_[r];
  result.gap = std::abs(primal_obj - dual_obj);
  result.iterations = iterations;
  if (out != Outcome::kOptimal) {
    have_state_ = false;
    throw SolverError("kernel LP iteration limit exceeded after " + std::to_string(iterations) + " pivots",
                      primal_obj, result.gap);
  }
  result.value = std::max(dual_obj, 0.0);
  result.phi.assign(pi_.begin(), pi_.end());
  result.basis.heads.assign(heads_.begin(), heads_.end());
  return result;
}

}  // namespace sqlab
