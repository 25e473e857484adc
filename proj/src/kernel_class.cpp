#include "sqlab/kernel_class.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>

#include "sqlab/error.hpp"

namespace sqlab {

std::string to_string(KernelMode mode) {
  switch (mode) {
    case KernelMode::kLp:
      return "lp";
    case KernelMode::kDictionary:
      return "dictionary";
    case KernelMode::kRadialLp:
      return "radial_lp";
  }
  return "?";
}

KernelMode kernel_mode_from_string(const std::string& s) {
  if (s == "lp") return KernelMode::kLp;
  if (s == "dictionary") return KernelMode::kDictionary;
  if (s == "radial_lp") return KernelMode::kRadialLp;
  throw InvalidArgument("unknown kernel mode '" + s + "'");
}

void HolderClassSpec::validate(int dim) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  if (m % 2 == 0) throw InvalidArgument("kernel resolution m must be odd");
  const int min_m = dim == 1 ? 33 : 17;
  if (m < min_m) throw InvalidArgument("kernel resolution m too small (>= 33 in 1D, >= 17 in 2D)");
}

double KernelResiduals::max() const { return std::max({support, mean, holder}); }

namespace {

// Optimal bases for a fixed set of smooth objective shapes (both signs).
// Starting each solve from the nearest of these keeps pivot counts low.
std::vector<LpBasis> anchor_bank(const std::shared_ptr<const HolderStructure>& s,
                                 const std::vector<std::vector<double>>& objectives) {
  std::vector<LpBasis> bank;
  if (s->n == 0) return bank;
  HolderLpSolver solver(s);
  for (const auto& c : objectives) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> signed_c(c);
      for (double& v : signed_c) v *= sign;
      LpBasis b = solver.solve(signed_c).basis;
      if (b.empty()) continue;
      auto key = b.heads;
      std::sort(key.begin(), key.end());
      bool seen = false;
      for (const auto& other : bank) {
        auto k2 = other.heads;
        std::sort(k2.begin(), k2.end());
        seen = seen || k2 == key;
      }
      if (!seen) bank.push_back(std::move(b));
    }
  }
  return bank;
}

// Profiles on [-1,1] (argument v = u/scale). All vanish for |v| >= 1.
double odd_tent(double v) {
  const double a = std::abs(v);
  if (a >= 1.0) return 0.0;
  return -std::copysign(std::min(a, 1.0 - a), v);
}

double even_tent(double v) {
  // Slope -1 from the top, slope +1 back to 0 at |v| = 1, zero mean on [-1,1].
  const double a = std::abs(v);
  if (a >= 1.0) return 0.0;
  const double v1 = 1.0 / std::sqrt(2.0);
  return a <= v1 ? (2.0 * v1 - 1.0) - a : a - 1.0;
}

double odd_bump(double v) {
  if (std::abs(v) >= 1.0) return 0.0;
  const double s = 1.0 - v * v;
  return v * s * s;
}

double even_bump(double v) {
  if (std::abs(v) >= 1.0) return 0.0;
  const double s = 1.0 - v * v;
  return (1.0 - 7.0 * v * v) * s * s;
}

double positive_bump(double v) {
  if (std::abs(v) >= 1.0) return 0.0;
  const double s = 1.0 - v * v;
  return s * s;
}

}  // namespace

std::shared_ptr<const KernelClass> KernelClass::build(int dim, const HolderClassSpec& spec) {
  spec.validate(dim);
  std::shared_ptr<KernelClass> kc(new KernelClass());
  kc->spec_ = spec;
  kc->grid_ = GridSpec::kernel(dim, spec.m);
  const GridSpec& g = kc->grid_;
  const int c = (spec.m - 1) / 2;

  std::vector<long> radius2(g.size());
  kc->free_pos_.assign(g.size(), -1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto mi = g.multi_index(i);
    long r2 = 0;
    for (int a = 0; a < dim; ++a) r2 += static_cast<long>(mi[a] - c) * (mi[a] - c);
    radius2[i] = r2;
    if (r2 < static_cast<long>(c) * c) {
      kc->free_pos_[i] = static_cast<std::int32_t>(kc->free_.size());
      kc->free_.push_back(static_cast<std::int32_t>(i));
    }
  }
  const int n = static_cast<int>(kc->free_.size());
  const auto q = g.weights();

  auto full = std::make_shared<HolderStructure>();
  full->n = n;
  full->dist.assign(static_cast<std::size_t>(n) * n, 0.0);
  full->boundary.assign(n, INFINITY);
  full->mean_weights.resize(n);
  for (int a = 0; a < n; ++a) {
    full->mean_weights[a] = q[kc->free_[a]];
    for (int b = a + 1; b < n; ++b) {
      const double d = kc->holder_distance(kc->free_[a], kc->free_[b]);
      full->dist[static_cast<std::size_t>(a) * n + b] = d;
      full->dist[static_cast<std::size_t>(b) * n + a] = d;
    }
  }
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (kc->free_pos_[p] >= 0) continue;
    for (int a = 0; a < n; ++a) full->boundary[a] = std::min(full->boundary[a], kc->holder_distance(kc->free_[a], p));
  }

  // Radial classes: free nodes with equal |u|, ordered by radius.
  std::map<long, int> class_of_r2;
  for (int a = 0; a < n; ++a) class_of_r2.emplace(radius2[kc->free_[a]], 0);
  int nc = 0;
  for (auto& [r2, idx] : class_of_r2) idx = nc++;
  kc->radial_class_.resize(n);
  for (int a = 0; a < n; ++a) kc->radial_class_[a] = class_of_r2.at(radius2[kc->free_[a]]);

  auto radial = std::make_shared<HolderStructure>();
  radial->n = nc;
  radial->dist.assign(static_cast<std::size_t>(nc) * nc, INFINITY);
  radial->boundary.assign(nc, INFINITY);
  radial->mean_weights.assign(nc, 0.0);
  for (int k = 0; k < nc; ++k) radial->dist[static_cast<std::size_t>(k) * nc + k] = 0.0;
  for (int a = 0; a < n; ++a) {
    const int ka = kc->radial_class_[a];
    radial->mean_weights[ka] += full->mean_weights[a];
    radial->boundary[ka] = std::min(radial->boundary[ka], full->boundary[a]);
    for (int b = 0; b < n; ++b) {
      const int kb = kc->radial_class_[b];
      if (ka == kb) continue;
      auto& d = radial->dist[static_cast<std::size_t>(ka) * nc + kb];
      d = std::min(d, full->pair(a, b));
    }
  }

  full->build_arcs();
  radial->build_arcs();
  kc->full_ = full;
  kc->radial_ = radial;
  // Shapes g(u) on the kernel grid, turned into objectives q_i g(u_i).
  std::vector<std::function<double(const Point&)>> shapes;
  for (int axis = 0; axis < dim; ++axis) {
    shapes.push_back([axis](const Point& u) { return u[axis]; });
    shapes.push_back([axis](const Point& u) { return u[axis] * u[axis] * u[axis]; });
    for (int k = 1; k <= 3; ++k) {
      shapes.push_back([axis, k](const Point& u) { return std::sin(M_PI * k * u[axis]); });
      shapes.push_back([axis, k](const Point& u) { return std::cos(M_PI * k * u[axis]); });
    }
  }
  shapes.push_back([](const Point& u) { return u[0] * u[0] + u[1] * u[1]; });
  if (dim == 2) shapes.push_back([](const Point& u) { return u[0] * u[1]; });
  std::vector<std::vector<double>> obj_full, obj_radial;
  for (const auto& g : shapes) {
    std::vector<double> cf(n, 0.0), cr(nc, 0.0);
    for (int a = 0; a < n; ++a) {
      cf[a] = full->mean_weights[a] * g(kc->grid_.node(kc->free_[a]));
      cr[kc->radial_class_[a]] += cf[a];
    }
    obj_full.push_back(std::move(cf));
    obj_radial.push_back(std::move(cr));
  }
  kc->anchors_full_ = anchor_bank(kc->full_, obj_full);
  kc->anchors_radial_ = anchor_bank(kc->radial_, obj_radial);
  kc->build_dictionary();
  return kc;
}

double KernelClass::holder_distance(std::size_t i, std::size_t j) const {
  const Point a = grid_.node(i);
  const Point b = grid_.node(j);
  return std::pow(distance(a, b, grid_.dim()), spec_.alpha);
}

std::size_t KernelClass::constraint_count() const {
  const std::size_t m = grid_.size();
  return m * (m - 1) / 2 + (m - free_.size()) + 1;
}

std::string KernelClass::digest() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "dim=%d;alpha=%.17g;m=%d;mode=%s;dict=v%d", dim(), spec_.alpha, spec_.m,
                to_string(spec_.mode).c_str(), kDictionaryVersion);
  return buf;
}

KernelResiduals kernel_residuals(const KernelClass& kc, std::span<const double> phi) {
  KernelResiduals r;
  const GridSpec& g = kc.grid();
  const auto q = g.weights();
  double mean = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    mean += q[i] * phi[i];
    if (kc.pinned(i)) r.support = std::max(r.support, std::abs(phi[i]));
  }
  r.mean = std::abs(mean);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      r.holder = std::max(r.holder, std::abs(phi[i] - phi[j]) - kc.holder_distance(i, j));
  return r;
}

void KernelClass::build_dictionary() {
  const GridSpec& g = grid_;
  const auto q = g.weights();
  const int dim = g.dim();
  struct Profile {
    const char* name;
    bool radial;
    double (*fn)(double);
    int axis;  // -1: function of |u|; otherwise odd along this axis with a radial cutoff
  };
  std::vector<Profile> profiles;
  if (dim == 1) {
    profiles = {{"odd_tent", false, odd_tent, 0},
                {"even_tent", true, even_tent, -1},
                {"odd_bump", false, odd_bump, 0},
                {"even_bump", true, even_bump, -1}};
  } else {
    profiles = {{"odd_tent_x1", false, odd_tent, 0}, {"odd_tent_x2", false, odd_tent, 1},
                {"radial_tent", true, even_tent, -1}, {"odd_bump_x1", false, odd_bump, 0},
                {"odd_bump_x2", false, odd_bump, 1}, {"radial_bump", true, even_bump, -1}};
  }
  const double scales[] = {1.0, 0.5, 0.25, 0.125, 0.0625};

  for (const auto& prof : profiles) {
    for (double s : scales) {
      std::vector<double> v(g.size(), 0.0);
      std::vector<double> pos(g.size(), 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (pinned(i)) continue;
        const Point u = g.node(i);
        const double r = distance(u, Point{0.0, 0.0}, dim) / s;
        pos[i] = positive_bump(r);
        if (prof.axis < 0) {
          v[i] = prof.fn(r);
        } else {
          v[i] = dim == 1 ? prof.fn(u[0] / s) : prof.fn(u[prof.axis] / s) * std::max(0.0, 1.0 - r);
        }
      }
      // Exact discrete zero mean: remove the mean along a positive bump.
      double mv = 0.0, mp = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        mv += q[i] * v[i];
        mp += q[i] * pos[i];
      }
      if (mp > 0.0)
        for (std::size_t i = 0; i < g.size(); ++i) v[i] -= (mv / mp) * pos[i];
      // Scale so the largest Hölder quotient over all pairs is (just under) 1.
      double ratio = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j)
          ratio = std::max(ratio, std::abs(v[i] - v[j]) / holder_distance(i, j));
      if (!(ratio > 1e-12)) continue;
      const double theta = (1.0 - 1e-12) / ratio;
      for (double& x : v) x *= theta;
      // Re-centre after scaling (rounding) and re-verify against the same constraints.
      double m2 = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) m2 += q[i] * v[i];
      if (mp > 0.0)
        for (std::size_t i = 0; i < g.size(); ++i) v[i] -= (m2 / mp) * pos[i];
      const KernelResiduals res = kernel_residuals(*this, v);
      if (res.max() > 1e-12) continue;
      char name[64];
      std::snprintf(name, sizeof name, "%s@%g", prof.name, s);
      dictionary_.push_back({name, prof.radial, std::move(v)});
    }
  }
}

KernelEvaluator::KernelEvaluator(std::shared_ptr<const KernelClass> kc) : kc_(std::move(kc)) {
  const auto& s = kc_->spec().mode == KernelMode::kRadialLp ? kc_->radial_structure() : kc_->full_structure();
  solver_ = std::make_unique<HolderLpSolver>(s);
  solver_->set_anchors(kc_->spec().mode == KernelMode::kRadialLp ? kc_->anchors_radial() : kc_->anchors_full());
}

void KernelEvaluator::assemble(const SampledField& f, const Point& y, double t, std::vector<double>& c) const {
  const GridSpec& g = kc_->grid();
  if (f.grid().dim() != g.dim()) throw InvalidArgument("field and kernel dimensions differ");
  const auto q = g.weights();
  c.assign(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point u = g.node(i);
    c[i] = q[i] * interpolate(f, Point{y[0] - t * u[0], y[1] - t * u[1]});
  }
}

void KernelEvaluator::assemble_modulated(const SampledField& f, const SampledField& bf, double beta,
                                         const Point& y, double t, std::vector<double>& c) const {
  const GridSpec& g = kc_->grid();
  if (f.grid().dim() != g.dim()) throw InvalidArgument("field and kernel dimensions differ");
  const auto q = g.weights();
  c.assign(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point u = g.node(i);
    const Point z{y[0] - t * u[0], y[1] - t * u[1]};
    c[i] = beta * (q[i] * interpolate(f, z)) - q[i] * interpolate(bf, z);
  }
}

double KernelEvaluator::dictionary_value(std::span<const double> c, int* best) const {
  double v = 0.0;
  int arg = -1;
  const auto& dict = kc_->dictionary();
  for (std::size_t k = 0; k < dict.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * dict[k].values[i];
    if (std::abs(s) > v) {
      v = std::abs(s);
      arg = static_cast<int>(k);
    }
  }
  if (best != nullptr) *best = arg;
  return v;
}

LpResult KernelEvaluator::solve_lp(std::span<const double> c, WarmStart ws) {
  const auto free = kc_->free_nodes();
  const bool radial = kc_->spec().mode == KernelMode::kRadialLp;
  reduced_.assign(solver_->structure().n, 0.0);
  if (radial) {
    const auto cls = kc_->radial_class_of_free();
    for (std::size_t a = 0; a < free.size(); ++a) reduced_[cls[a]] += c[free[a]];
  } else {
    for (std::size_t a = 0; a < free.size(); ++a) reduced_[a] = c[free[a]];
  }
  LpResult r = (ws == WarmStart::kChain && !chain_.empty()) ? solver_->solve(reduced_, &chain_)
                                                             : solver_->solve_anchored(reduced_);
  last_iterations_ = r.iterations;
  if (ws == WarmStart::kChain && !r.basis.empty()) chain_ = r.basis;
  return r;
}

namespace {

// True when c is a multiple of the quadrature weights on the free nodes (up to
// rounding). The mean constraint then makes the objective vanish on the whole
// class, so the optimum is 0; constant f produces exactly this.
bool in_mean_span(const KernelClass& kc, std::span<const double> c) {
  const auto free = kc.free_nodes();
  const auto q = kc.grid().weights();
  if (free.empty()) return true;
  const double lam = c[free[0]] / q[free[0]];
  for (auto i : free)
    if (!(std::abs(c[i] - lam * q[i]) <= 1e-13 * std::abs(lam * q[i]))) return false;
  return true;
}

}  // namespace

double KernelEvaluator::value(std::span<const double> c, WarmStart ws) {
  if (c.size() != kc_->grid().size()) throw InvalidArgument("objective must cover the kernel grid");
  if (in_mean_span(*kc_, c)) return 0.0;
  if (kc_->spec().mode == KernelMode::kDictionary) return dictionary_value(c, nullptr);
  return solve_lp(c, ws).value;
}

KernelSolution KernelEvaluator::solve(std::span<const double> c, WarmStart ws) {
  if (c.size() != kc_->grid().size()) throw InvalidArgument("objective must cover the kernel grid");
  const GridSpec& g = kc_->grid();
  std::vector<double> phi(g.size(), 0.0);
  KernelSolution out{0.0, SampledField::constant(g, 0.0), 0, 0.0};
  if (in_mean_span(*kc_, c)) return out;
  if (kc_->spec().mode == KernelMode::kDictionary) {
    int best = -1;
    out.value = dictionary_value(c, &best);
    if (best >= 0) {
      phi = kc_->dictionary()[best].values;
      double s = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * phi[i];
      if (s < 0.0)
        for (double& x : phi) x = -x;
    }
  } else {
    const LpResult r = solve_lp(c, ws);
    const auto free = kc_->free_nodes();
    const auto cls = kc_->radial_class_of_free();
    const bool radial = kc_->spec().mode == KernelMode::kRadialLp;
    for (std::size_t a = 0; a < free.size(); ++a) phi[free[a]] = r.phi[radial ? cls[a] : a];
    out.value = r.value;
    out.iterations = r.iterations;
    out.gap = r.gap;
  }
  out.extremizer = SampledField(g, std::move(phi));
  return out;
}

void KernelEvaluator::reset_chain() { chain_ = {}; }

std::shared_ptr<const KernelClass> shared_kernel_class(int dim, const HolderClassSpec& spec) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const KernelClass>> cache;
  char key[128];
  std::snprintf(key, sizeof key, "%d|%.17g|%d|%d", dim, spec.alpha, spec.m, static_cast<int>(spec.mode));
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto kc = KernelClass::build(dim, spec);
  cache.emplace(key, kc);
  return kc;
}

KernelEvaluator& thread_evaluator(int dim, const HolderClassSpec& spec) {
  thread_local std::map<std::string, std::unique_ptr<KernelEvaluator>> evaluators;
  char key[128];
  std::snprintf(key, sizeof key, "%d|%.17g|%d|%d", dim, spec.alpha, spec.m, static_cast<int>(spec.mode));
  auto it = evaluators.find(key);
  if (it == evaluators.end())
    it = evaluators.emplace(key, std::make_unique<KernelEvaluator>(shared_kernel_class(dim, spec))).first;
  return *it->second;
}

KernelProgram assemble_program(const SampledField& f, const Point& y, double t, const HolderClassSpec& spec) {
  KernelEvaluator& ev = thread_evaluator(f.grid().dim(), spec);
  KernelProgram prog{ev.shared_class(), {}};
  ev.assemble(f, y, t, prog.objective);
  return prog;
}

KernelSolution solve_program(const KernelProgram& program) {
  const KernelClass& kc = *program.kernel_class;
  return thread_evaluator(kc.dim(), kc.spec()).solve(program.objective, WarmStart::kAnchor);
}

double a_alpha(const SampledField& f, const Point& y, double t, const HolderClassSpec& spec) {
  KernelEvaluator& ev = thread_evaluator(f.grid().dim(), spec);
  std::vector<double> c;
  ev.assemble(f, y, t, c);
  return ev.value(c, WarmStart::kAnchor);
}

double modulated_a_alpha(const SampledField& b, const SampledField& f, const Point& x, const Point& y,
                         double t, const HolderClassSpec& spec) {
  KernelEvaluator& ev = thread_evaluator(f.grid().dim(), spec);
  const SampledField bf = b.times(f);
  std::vector<double> c;
  ev.assemble_modulated(f, bf, interpolate(b, x), y, t, c);
  return ev.value(c, WarmStart::kAnchor);
}

}  // namespace sqlab
