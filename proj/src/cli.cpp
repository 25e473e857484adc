#include "sqlab/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "sqlab/config.hpp"
#include "sqlab/error.hpp"
#include "sqlab/parallel.hpp"
#include "sqlab/spaces.hpp"
#include "sqlab/square_functions.hpp"
#include "sqlab/verify.hpp"

namespace sqlab {

namespace {

std::string tagged(const std::string& stem, double alpha, const char* ext) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_alpha%g.%s", stem.c_str(), alpha, ext);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_field(const std::string& path, const SampledField& f) {
  std::ostringstream ss;
  write_field_csv(ss, f);
  write_text(path, ss.str());
}

SqfnResult compute_operator(const RunConfig& cfg, const SampledField& f, const SampledField& b, double alpha,
                            const TimeLadder& ladder, const FieldOptions& opt) {
  const HolderClassSpec spec = cfg.kernel_spec(alpha);
  const std::string& op = cfg.op;
  if (op == "commutator_g_alpha") return commutator_g_alpha(b, f, spec, ladder, opt);
  if (op == "commutator_s_alpha") return commutator_s_alpha(b, f, spec, ladder, cfg.beta, opt);
  if (op == "commutator_g_star") return commutator_g_star(b, f, spec, ladder, cfg.lambda, opt);
  const AalphaField a = a_alpha_field(f, ladder, spec, opt);
  if (op == "s_alpha") return s_alpha(a);
  if (op == "s_alpha_beta") return s_alpha_beta(a, cfg.beta);
  if (op == "g_alpha") return g_alpha(a);
  return g_star(a, cfg.lambda);
}

int cmd_sqfn(const RunConfig& cfg, const std::string& out, const FieldOptions& opt) {
  const GridSpec g = cfg.grid();
  const TimeLadder ladder = cfg.ladder(g);
  const SampledField f = function_from_json(cfg.f).sample(g);
  const SampledField b = function_from_json(cfg.b).sample(g);
  for (double alpha : cfg.alphas) {
    const SqfnResult r = compute_operator(cfg, f, b, alpha, ladder, opt);
    write_field(out + "/" + tagged(cfg.op, alpha, "csv"), r.output);
    nlohmann::json meta = r.metadata();
    meta["config_digest"] = cfg.digest;
    meta["f"] = cfg.f;
    if (cfg.op.rfind("commutator", 0) == 0) meta["b"] = cfg.b;
    write_json(out + "/" + tagged(cfg.op, alpha, "json"), meta);
  }
  return 0;
}

int cmd_norms(const RunConfig& cfg, const std::string& out) {
  const GridSpec g = cfg.grid();
  const BallFamily balls = cfg.ball_family(g);
  const SampledField f = function_from_json(cfg.f).sample(g);
  const SampledField b = function_from_json(cfg.b).sample(g);
  nlohmann::json doc = {{"config_digest", cfg.digest}, {"f", cfg.f}, {"b", cfg.b}, {"weight", cfg.weight.to_json()},
                        {"family_id", balls.id()}};
  nlohmann::json lebesgue = nlohmann::json::array(), morrey = nlohmann::json::array();
  for (double p : cfg.ps) {
    lebesgue.push_back({{"p", p}, {"value", lebesgue_norm(f, p, cfg.weight)}});
    for (double kappa : cfg.kappas) {
      nlohmann::json r = morrey_norm(f, {p, kappa}, cfg.weight, balls).to_json();
      r["p"] = p;
      r["kappa"] = kappa;
      morrey.push_back(r);
    }
  }
  doc["lebesgue"] = lebesgue;
  doc["morrey"] = morrey;
  doc["bmo"] = bmo_norm(b, balls).to_json();
  nlohmann::json osc = nlohmann::json::array();
  for (double p : {1.0, 2.0, 4.0}) osc.push_back({{"p", p}, {"value", bmo_oscillation_p(b, cfg.split_ball, p)}});
  doc["oscillation_on_split_ball"] = osc;
  doc["b_average_on_split_ball"] = ball_average(b, cfg.split_ball);
  write_json(out + "/norms.json", doc);
  write_field(out + "/maximal.csv", weighted_maximal(f, cfg.weight, balls));
  return 0;
}

int cmd_weights(const RunConfig& cfg, const std::string& out) {
  const GridSpec g = cfg.grid();
  const BallFamily balls = cfg.ball_family(g);
  nlohmann::json doc = {{"config_digest", cfg.digest}, {"weight", cfg.weight.to_json()}, {"family_id", balls.id()}};
  nlohmann::json ap = nlohmann::json::array();
  for (double p : cfg.ps) {
    const ApReport r = ap_characteristic(cfg.weight, p, balls);
    const double pd = p / (p - 1.0);
    const WeightSpec nu = dual_weight(cfg.weight, p);
    const ApReport rd = ap_characteristic(nu, pd, balls);
    ap.push_back({{"p", p},
                  {"supremum", r.supremum},
                  {"argmax", r.argmax},
                  {"overflow", r.overflow},
                  {"admissible", r.admissible},
                  {"per_ball", r.per_ball},
                  {"dual_weight", nu.to_json()},
                  {"dual_supremum", rd.supremum},
                  {"dual_overflow", rd.overflow}});
  }
  doc["ap"] = ap;
  const RhReport rh = rh_report(cfg.weight, cfg.rh_r, balls);
  doc["rh"] = {{"r", rh.r}, {"supremum", rh.supremum}, {"overflow", rh.overflow}, {"per_ball", rh.per_ball}};
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < balls.size(); ++i)
    if (balls[i].scaled(2.0).inside(g)) keep.push_back(i);
  const BallFamily dbl = balls.restrict(keep, "2B inside");
  nlohmann::json doubling = nlohmann::json::array();
  for (double p : cfg.ps) {
    const DoublingReport d = doubling_report(cfg.weight, p, dbl, {2.0});
    doubling.push_back({{"p", p}, {"max_ratio", d.max_ratio}, {"max_normalized", d.max_normalized}});
  }
  doc["doubling"] = doubling;
  write_json(out + "/weights.json", doc);
  return 0;
}

int cmd_extremizer(const RunConfig& cfg, const std::string& out) {
  const GridSpec g = cfg.grid();
  const SampledField f = function_from_json(cfg.f).sample(g);
  nlohmann::json doc = {{"config_digest", cfg.digest}, {"f", cfg.f}};
  nlohmann::json items = nlohmann::json::array();
  for (double alpha : cfg.alphas) {
    const HolderClassSpec spec = cfg.kernel_spec(alpha);
    for (std::size_t i = 0; i < cfg.points.size(); ++i) {
      const auto& [y, t] = cfg.points[i];
      const KernelProgram prog = assemble_program(f, y, t, spec);
      const KernelSolution sol = solve_program(prog);
      const KernelResiduals res = kernel_residuals(*prog.kernel_class, sol.extremizer.values());
      char name[96];
      std::snprintf(name, sizeof name, "extremizer_%zu_alpha%g.csv", i, alpha);
      write_field(out + "/" + name, sol.extremizer);
      items.push_back({{"alpha", alpha},
                       {"y", {y[0], y[1]}},
                       {"t", t},
                       {"value", sol.value},
                       {"iterations", sol.iterations},
                       {"gap", sol.gap},
                       {"residuals", {{"support", res.support}, {"mean", res.mean}, {"holder", res.holder}}},
                       {"kernel_digest", prog.kernel_class->digest()},
                       {"file", name}});
    }
  }
  doc["points"] = items;
  write_json(out + "/extremizer.json", doc);
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"sqlab: intrinsic square functions and weighted-space verification"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  int threads = 0;
  bool audit = false;
  const std::pair<const char*, const char*> subs[] = {
      {"sqfn", "evaluate one square function or commutator of f on the grid"},
      {"norms", "Lebesgue, Morrey and BMO norms of f and b, plus M_w f"},
      {"weights", "A_p, reverse Hölder and doubling reports for the weight"},
      {"verify", "run the selected verification suites"},
      {"extremizer", "dump LP extremizers at the configured (y, t) points"},
  };
  for (const auto& [name, help] : subs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--threads", threads, "worker threads (default: SQLAB_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--serial-audit", audit, "recompute a sample of work units serially and compare bit-for-bit");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    const RunConfig cfg = load_config(config_path);
    if (threads > 0) set_default_threads(threads);
    FieldOptions opt;
    opt.warm = cfg.warm;
    opt.threads = threads;
    opt.audit_fraction = audit ? 0.01 : 0.0;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
    reset_audit_tally();

    int status = 0;
    if (cmd == "sqfn") {
      status = cmd_sqfn(cfg, out_dir, opt);
    } else if (cmd == "norms") {
      status = cmd_norms(cfg, out_dir);
    } else if (cmd == "weights") {
      status = cmd_weights(cfg, out_dir);
    } else if (cmd == "extremizer") {
      status = cmd_extremizer(cfg, out_dir);
    } else {
      const auto reports = run_verify(cfg, opt);
      emit_report(reports, cfg, out_dir);
      for (const auto& r : reports) {
        std::size_t failed = 0;
        for (const auto& c : r.cases) failed += c.pass ? 0 : 1;
        std::printf("%-20s %s  cases=%zu failed=%zu\n", r.suite.c_str(), r.pass() ? "PASS" : "FAIL", r.cases.size(),
                    failed);
        if (!r.pass()) status = 1;
      }
    }
    if (audit) {
      const AuditTally t = audit_tally();
      write_json(out_dir + "/audit.json", {{"units", t.units}, {"mismatches", t.mismatches}});
      std::printf("serial audit: %llu units, %llu mismatches\n", static_cast<unsigned long long>(t.units),
                  static_cast<unsigned long long>(t.mismatches));
      if (t.mismatches > 0) status = 1;
    }
    return status;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s (best value %.17g, gap %.3g)\n", e.what(), e.best_value(), e.gap());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace sqlab
