#include "sqlab/aalpha.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>

#include "sqlab/error.hpp"
#include "sqlab/parallel.hpp"

namespace sqlab {

namespace {

std::atomic<std::uint64_t> g_audit_units{0};
std::atomic<std::uint64_t> g_audit_mismatches{0};

// FNV-1a, stable across platforms and builds.
std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

void compute_level(KernelEvaluator& ev, const FieldJob& job, int k, WarmStart warm, std::span<double> out,
                   FieldStats& stats) {
  const double t = job.ladder.nodes()[k];
  std::vector<double> c;
  ev.reset_chain();
  for (std::size_t j = 0; j < job.grid.size(); ++j) {
    const Point y = job.grid.node(j);
    job.objective(ev, y, t, c);
    const bool zero = std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
    if (zero) {
      out[j] = 0.0;
      continue;
    }
    try {
      const KernelSolution sol = ev.solve(c, warm);
      out[j] = sol.value;
      ++stats.solves;
      stats.iterations += static_cast<std::uint64_t>(sol.iterations);
      stats.max_gap = std::max(stats.max_gap, sol.gap);
    } catch (const SolverError& e) {
      char where[160];
      std::snprintf(where, sizeof where, " [%s at y=(%.17g, %.17g), t=%.17g]", job.label.c_str(), y[0], y[1], t);
      throw SolverError(e.what() + std::string(where), e.best_value(), e.gap());
    }
  }
}

}  // namespace

AalphaField::AalphaField(GridSpec grid, TimeLadder ladder, HolderClassSpec spec, WarmStart warm,
                         std::vector<double> values, FieldStats stats)
    : grid_(std::move(grid)),
      ladder_(std::move(ladder)),
      spec_(spec),
      warm_(warm),
      values_(std::move(values)),
      stats_(stats) {
  if (values_.size() != grid_.size() * ladder_.levels()) throw InvalidArgument("field value count mismatch");
}

double AalphaField::sup() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, v);
  return m;
}

AalphaField AalphaField::scaled(double c) const {
  std::vector<double> v(values_);
  const double a = std::abs(c);
  for (double& x : v) x *= a;
  return AalphaField(grid_, ladder_, spec_, warm_, std::move(v), stats_);
}

std::vector<double> run_field_level(const FieldJob& job, int level, WarmStart warm, FieldStats* stats) {
  KernelEvaluator ev(shared_kernel_class(job.grid.dim(), job.spec));
  std::vector<double> out(job.grid.size());
  FieldStats local;
  compute_level(ev, job, level, warm, out, local);
  if (stats != nullptr) *stats = local;
  return out;
}

AalphaField run_field_job(const FieldJob& job, const FieldOptions& options) {
  job.spec.validate(job.grid.dim());
  const int levels = job.ladder.levels();
  const std::size_t n = job.grid.size();
  std::vector<double> values(n * levels);
  std::vector<FieldStats> level_stats(levels);
  shared_kernel_class(job.grid.dim(), job.spec);  // build once, outside the workers

  parallel_for(static_cast<std::size_t>(levels), options.threads, [&](std::size_t k) {
    KernelEvaluator& ev = thread_evaluator(job.grid.dim(), job.spec);
    compute_level(ev, job, static_cast<int>(k), options.warm,
                  std::span<double>(values).subspan(k * n, n), level_stats[k]);
  });

  FieldStats stats;
  for (const auto& s : level_stats) {
    stats.solves += s.solves;
    stats.iterations += s.iterations;
    stats.max_gap = std::max(stats.max_gap, s.max_gap);
  }

  if (options.audit_fraction > 0.0) {
    // Deterministic sample of levels; at least one per job.
    std::vector<int> picked;
    int fallback = 0;
    std::uint64_t lowest = ~0ull;
    for (int k = 0; k < levels; ++k) {
      const std::uint64_t h = fnv1a(job.label + "#" + std::to_string(k));
      if (static_cast<double>(h >> 11) * 0x1.0p-53 < options.audit_fraction) picked.push_back(k);
      if (h < lowest) {
        lowest = h;
        fallback = k;
      }
    }
    if (picked.empty()) picked.push_back(fallback);
    for (int k : picked) {
      const auto ref = run_field_level(job, k, options.warm);
      ++g_audit_units;
      if (!std::equal(ref.begin(), ref.end(), values.begin() + static_cast<std::ptrdiff_t>(k * n))) ++g_audit_mismatches;
    }
  }
  return AalphaField(job.grid, job.ladder, job.spec, options.warm, std::move(values), stats);
}

AalphaField a_alpha_field(const SampledField& f, const TimeLadder& ladder, const HolderClassSpec& spec,
                          const FieldOptions& options) {
  char label[160];
  std::snprintf(label, sizeof label, "a_alpha_field(alpha=%.17g, m=%d, mode=%s)", spec.alpha, spec.m,
                to_string(spec.mode).c_str());
  FieldJob job{f.grid(), ladder, spec,
               [&f](const KernelEvaluator& ev, const Point& y, double t, std::vector<double>& c) {
                 ev.assemble(f, y, t, c);
               },
               label};
  return run_field_job(job, options);
}

AalphaField modulated_a_alpha_field(const SampledField& b, const SampledField& f, double beta,
                                    const TimeLadder& ladder, const HolderClassSpec& spec,
                                    const FieldOptions& options) {
  if (!(b.grid() == f.grid())) throw InvalidArgument("b and f live on different grids");
  const SampledField bf = b.times(f);
  char label[200];
  std::snprintf(label, sizeof label, "modulated_a_alpha_field(beta=%.17g, alpha=%.17g, m=%d, mode=%s)", beta,
                spec.alpha, spec.m, to_string(spec.mode).c_str());
  FieldJob job{f.grid(), ladder, spec,
               [&f, &bf, beta](const KernelEvaluator& ev, const Point& y, double t, std::vector<double>& c) {
                 ev.assemble_modulated(f, bf, beta, y, t, c);
               },
               label};
  return run_field_job(job, options);
}

AuditTally audit_tally() { return {g_audit_units.load(), g_audit_mismatches.load()}; }

void reset_audit_tally() {
  g_audit_units.store(0);
  g_audit_mismatches.store(0);
}

}  // namespace sqlab
