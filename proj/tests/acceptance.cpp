// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: sqlab_acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sqlab/cli.hpp"
#include "sqlab/families.hpp"
#include "sqlab/spaces.hpp"
#include "sqlab/square_functions.hpp"
#include "sqlab/weights.hpp"

using namespace sqlab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sqlab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path write_json(const fs::path& p, const json& j) {
  std::ofstream(p) << j.dump(2) << '\n';
  return p;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

const json* suite(const json& report, const std::string& name) {
  for (const auto& s : report["suites"])
    if (s["suite"] == name) return &s;
  return nullptr;
}

// Counts cases matching every fragment; failed ones are listed in out.
int scan(const json& s, const std::vector<std::string>& parts, Outcome& out, const std::string& label,
         const std::function<bool(const json&)>& extra = nullptr) {
  int n = 0;
  for (const auto& c : s["cases"]) {
    const auto d = c["digest"].get<std::string>();
    bool match = true;
    for (const auto& p : parts) match = match && contains(d, p);
    if (!match) continue;
    ++n;
    out.require(c["pass"].get<bool>() && (!extra || extra(c)), label + " (" + d + ")");
  }
  return n;
}

Outcome weight_oracle() {
  Outcome o;
  const auto g = GridSpec::spatial(1, 4.0, 257);
  const auto fam = BallFamily::listed(g, {Ball{{0, 0}, 1.0}});
  const double a = ap_characteristic(WeightSpec::power(0.5), 2.0, fam).supremum;
  const double one = ap_characteristic(WeightSpec::constant(1.0), 2.0, fam).supremum;
  o.require(std::abs(a / (4.0 / 3.0) - 1.0) <= 0.01, "[|x|^1/2]_A2 within 1% of 4/3");
  o.require(std::abs(one - 1.0) <= 1e-9, "[1]_A2 = 1");
  o.note("[|x|^1/2]_A2=" + num(a) + " [1]_A2-1=" + num(one - 1.0));
  return o;
}

Outcome intrinsic_sup_oracle() {
  Outcome o;
  for (int m : {65, 257}) {
    const auto g = GridSpec::spatial(1, 4.0, 4 * (m - 1) + 1);
    const auto f = SampledField::from_function(g, [](const Point& x) {
      return std::abs(x[0]) <= 1.0 ? (x[0] > 0 ? 1.0 : (x[0] < 0 ? -1.0 : 0.0)) : 0.0;
    });
    const auto prog = assemble_program(f, {0, 0}, 1.0, {1.0, m, KernelMode::kLp});
    const auto sol = solve_program(prog);
    const auto res = kernel_residuals(*prog.kernel_class, sol.extremizer.values());
    const double tol = m == 65 ? 0.02 : 0.005;
    o.require(std::abs(sol.value / 0.5 - 1.0) <= tol, "A_1 at m=" + std::to_string(m));
    o.require(res.max() <= 1e-9, "residuals at m=" + std::to_string(m));
    o.note("m=" + std::to_string(m) + " A=" + num(sol.value) + " residual=" + num(res.max()));
  }
  return o;
}

Outcome zero_mean_gate() {
  Outcome o;
  const auto g = GridSpec::spatial(1, 4.0, 257);
  const auto ladder = TimeLadder::make(g, g.spacing(), 2.0, 24);
  const auto c = SampledField::constant(g, 1.75);
  const auto f = function_from_json({{"kind", "bump"}, {"center", 0.25}, {"radius", 0.75}}).sample(g);
  const auto bc = SampledField::constant(g, -0.5);
  double worst = 0.0;
  for (double alpha : {0.5, 1.0}) {
    const HolderClassSpec spec{alpha, 65, KernelMode::kLp};
    const auto a = a_alpha_field(c, ladder, spec);
    const double vals[] = {
        s_alpha(a).output.sup_abs(),
        g_alpha(a).output.sup_abs(),
        g_star(a, 4.0).output.sup_abs(),
        commutator_s_alpha(bc, f, spec, ladder).output.sup_abs(),
        commutator_g_alpha(bc, f, spec, ladder).output.sup_abs(),
        commutator_g_star(bc, f, spec, ladder, 4.0).output.sup_abs(),
    };
    for (double v : vals) worst = std::max(worst, v);
  }
  o.require(worst <= 1e-9, "sup <= 1e-9");
  o.note("max sup over 6 operators, alpha in {0.5,1}: " + num(worst));
  return o;
}

Outcome exact_inequalities(const json& rep) {
  Outcome o;
  for (const char* name : {"gstar_domination", "bmo_dyadic_growth", "holder_ap_average", "subset_and_doubling",
                           "commutator_split"}) {
    const json* s = suite(rep, name);
    o.require(s != nullptr, std::string("suite ") + name + " present");
    if (s == nullptr) continue;
    o.require(!s->at("cases").empty(), std::string(name) + " has cases");
    o.require(s->at("summary")["pass"].get<bool>(), name);
    o.note(std::string(name) + " " + std::to_string(s->at("cases").size()) + " cases, failed " +
           std::to_string(s->at("summary")["failed"].get<int>()));
  }
  if (const json* g = suite(rep, "gstar_domination")) {
    o.require(g->at("params")["lambda"] == 4.0 && g->at("params")["J"] == 6, "g* run at lambda=4, J=6");
    o.require(g->at("params")["family"]["count"] == 50, "50-member bump family");
  }
  if (const json* a = suite(rep, "aperture_scaling")) {
    const int n = scan(*a, {"S_beta <= S_2beta"}, o, "aperture monotone") + scan(*a, {" <= rho_"}, o, "rho monotone");
    o.note("aperture monotone cases " + std::to_string(n));
    o.require(n > 0, "aperture monotone cases present");
  } else {
    o.require(false, "suite aperture_scaling present");
  }
  return o;
}

Outcome rate_gates(const json& rep) {
  Outcome o;
  const json* a = suite(rep, "aperture_scaling");
  if (a == nullptr) {
    o.require(false, "suite aperture_scaling present");
    return o;
  }
  const double gate2 = 2.0 * 1.1, gate3 = std::pow(2.0, 1.5) * 1.1;
  const auto rhs_is = [](double want) {
    return [want](const json& c) { return std::abs(c["rhs"].get<double>() - want) <= 1e-12; };
  };
  const int n2 = scan(*a, {" p=2 ", "/ rho_"}, o, "p=2 rate", rhs_is(gate2));
  const int n3 = scan(*a, {" p=3 ", "/ rho_"}, o, "p=3 rate", rhs_is(gate3));
  const int n0 = scan(*a, {"rho_0 = 1"}, o, "rho_0 = 1", [](const json& c) { return c["lhs"] == 1.0; });
  const int nm = scan(*a, {" <= rho_"}, o, "rho nondecreasing");
  o.require(n2 > 0 && n3 > 0 && n0 > 0 && nm > 0, "rate cases present");
  double worst2 = 0, worst3 = 0;
  for (const auto& c : a->at("cases")) {
    const auto d = c["digest"].get<std::string>();
    if (!contains(d, "/ rho_")) continue;
    (contains(d, " p=2 ") ? worst2 : worst3) = std::max(contains(d, " p=2 ") ? worst2 : worst3, c["lhs"].get<double>());
  }
  o.note("max rho_{j+1}/rho_j: p=2 " + num(worst2) + " (gate " + num(gate2) + "), p=3 " + num(worst3) + " (gate " +
         num(gate3) + "); cases " + std::to_string(n2 + n3));
  return o;
}

Outcome boundedness(const json& rep) {
  Outcome o;
  const json* b = suite(rep, "boundedness");
  if (b == nullptr) {
    o.require(false, "suite boundedness present");
    return o;
  }
  o.require(b->at("params")["weight"]["gamma"] == 0.5, "weight |x|^1/2");
  double drift = 0.0;
  for (const char* op : {"s_alpha", "g_alpha", "g_star", "commutator_s_alpha"}) {
    const std::string key = std::string(" ") + op + " ";
    const auto exact_op = [&](const json& c) { return contains(c["digest"].get<std::string>(), key); };
    const int nf = scan(*b, {"p=2 kappa=0.5", key, "family max finite"}, o, std::string(op) + " finite", exact_op);
    const int nh = scan(*b, {"p=2 kappa=0.5", key, "R(c f) vs R(f)"}, o, std::string(op) + " scaling", exact_op);
    const int nd = scan(*b, {"p=2 kappa=0.5", key, "drift under N->513, m->129"}, o, std::string(op) + " drift",
                        [&](const json& c) {
                          drift = std::max(drift, c["lhs"].get<double>());
                          return exact_op(c) && c["lhs"].get<double>() < 0.25;
                        });
    o.require(nf == 2 && nh == 2 && nd == 2, std::string(op) + " cases for both alphas");
  }
  o.note("largest drift " + num(drift) + " (bound 0.25)");
  return o;
}

Outcome morrey_oracle() {
  Outcome o;
  const auto g = GridSpec::spatial(1, 4.0, 257);
  const auto fam = BallFamily::listed(g, {Ball{{0, 0}, 0.5}, Ball{{0, 0}, 1.0}, Ball{{0, 0}, 2.0}});
  const auto f = function_from_json({{"kind", "indicator"}, {"lo", -1.0}, {"hi", 1.0}, {"edge", 1.0}}).sample(g);
  const auto rep = morrey_norm(f, {1.0, 0.5}, WeightSpec::constant(1.0), fam);
  o.require(std::abs(rep.value / std::sqrt(2.0) - 1.0) <= 0.005, "value within 0.5% of sqrt 2");
  o.require(rep.achieving_ball == 1, "achieved at B(0,1)");
  o.note("value=" + num(rep.value) + " achieving ball " + std::to_string(rep.achieving_ball));
  return o;
}

Outcome determinism(const fs::path& work) {
  Outcome o;
  const json cfg = json::parse(R"({"family": {"count": 4}, "verify": {"refinement": {"members": 1}}})");
  const auto path = write_json(work / "determinism.json", cfg).string();
  std::vector<std::string> reports;
  for (int k : {1, 4, 8}) {
    const auto out = work / ("threads" + std::to_string(k));
    const int code = cli({"verify", "--config", path, "--out", out.string(), "--threads", std::to_string(k)});
    o.require(code == 0, "verify exit 0 at threads=" + std::to_string(k));
    reports.push_back(slurp(out / "report.json") + slurp(out / "summary.csv"));
  }
  o.require(!reports[0].empty() && reports[0] == reports[1] && reports[0] == reports[2], "byte-identical outputs");
  const auto audit_dir = work / "audit";
  o.require(cli({"verify", "--config", path, "--out", audit_dir.string(), "--threads", "4", "--serial-audit"}) == 0,
            "serial audit exit 0");
  const auto audit = json::parse(slurp(audit_dir / "audit.json"));
  o.require(audit["units"].get<int>() > 0 && audit["mismatches"] == 0, "zero audit mismatches");
  o.require(slurp(audit_dir / "report.json") == slurp(work / "threads1" / "report.json"), "audit run report identical");
  o.note("threads 1/4/8 identical; audit units " + std::to_string(audit["units"].get<int>()) + ", mismatches " +
         std::to_string(audit["mismatches"].get<int>()));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "sqlab_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  std::vector<std::pair<int, Outcome>> results;
  const auto report = [&](int id, Outcome o) {
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(id, std::move(o));
  };

  report(1, weight_oracle());
  report(2, intrinsic_sup_oracle());
  report(3, zero_mean_gate());

  // Criteria 4-6 read the report of the default configuration.
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = write_json(work / "default.json", json::object()).string();
  const int code = cli({"verify", "--config", cfg, "--out", (work / "default").string()});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("default verify: exit %d in %.0f s\n", code, secs);
  json rep = json::object();
  if (fs::exists(work / "default" / "report.json")) rep = json::parse(slurp(work / "default" / "report.json"));
  else rep["suites"] = json::array();
  report(4, exact_inequalities(rep));
  report(5, rate_gates(rep));
  report(6, boundedness(rep));

  report(7, morrey_oracle());
  report(8, determinism(work));

  bool all = code == 0;
  for (const auto& r : results) all = all && r.second.pass;
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
