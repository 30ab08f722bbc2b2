// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "alf/combinatorics.hpp"
#include "alf/flux.hpp"
#include "alf/identities.hpp"
#include "alf/report.hpp"

using namespace alf;

namespace {

constexpr double kPi = std::numbers::pi;

constexpr double kIdentityRel = 1e-8;
constexpr double kIdentitySeconds = 120.0;
constexpr int kIdentityPoints = 100;
constexpr double kMutationAmp = 1e-3;
constexpr double kMutationFraction = 0.9;
constexpr double kPositivityRel = 1e-10;
constexpr double kPSquaresRel = 1e-8;
constexpr int kPetrovPoints = 20;
constexpr double kPetrovS2Std = 1e-6;
constexpr double kPetrovSRatio = 1e-7;
constexpr double kChargeRel = 1e-4;
constexpr double kBoltChargeAbs = 1e-6;
constexpr double kBalanceRel = 1e-5;
constexpr double kClosedFormRel = 1e-6;
constexpr int kRandomConfigs = 1000;
constexpr int kCaseWeight = 12, kCaseNuts = 6;
constexpr double kCaseSeconds = 300.0;
constexpr double kSlopeTol = 0.1;
constexpr double kDecayLimitRel = 0.01;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  int id;
  bool pass;
  std::string detail;
};

std::vector<MetricModel> four_metrics() {
  return {make_model("schwarzschild", {{"m", 1.0}}),
          make_model("kerr", {{"m", 1.0}, {"a", 1.0 / std::sqrt(3.0)}}),
          make_model("taub-nut", {{"n", 1.0}}), make_model("taub-bolt", {{"n", 1.0}})};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// reports of the full registry, shared by criteria 1 and 3
std::map<std::string, std::vector<VerificationReport>> g_reports;
double g_identity_seconds = 0.0;

Line identities() {
  auto t0 = Clock::now();
  SuiteOptions opts;
  opts.tolerance = kIdentityRel;
  auto suite = select_suite("all");
  bool ok = true;
  double worst = 0.0;
  std::string worst_id;
  int evaluated = 0;
  for (const auto& m : four_metrics()) {
    auto reps = run_suite(m, suite, kIdentityPoints, 1, opts);
    for (const auto& r : reps) {
      if (r.status.rfind("skipped", 0) == 0) continue;
      ++evaluated;
      ok = ok && r.pass && r.n_points >= kIdentityPoints;
      // inequalities carry their own absolute violation, checked under criterion 3
      if (r.kind != "inequality" && r.max_rel_residual > worst) {
        worst = r.max_rel_residual;
        worst_id = m.name + "/" + r.identity;
      }
    }
    g_reports[m.name] = std::move(reps);
  }
  g_identity_seconds = seconds_since(t0);
  ok = ok && worst < kIdentityRel && g_identity_seconds < kIdentitySeconds && evaluated > 0;
  return {1, ok,
          std::to_string(evaluated) + " identity/metric runs, worst rel " + fmt("%.2e", worst) +
              " (" + worst_id + "), " + fmt("%.1f s", g_identity_seconds)};
}

Line mutation() {
  int failed = 0, total = 0;
  for (const auto& m : four_metrics()) {
    auto r = mutation_check(m, kMutationAmp, 10, 1);
    failed += r.n_failed;
    total += r.n_differential;
  }
  double frac = total ? double(failed) / total : 0.0;
  return {2, frac >= kMutationFraction,
          std::to_string(failed) + "/" + std::to_string(total) + " differential identities fail (" +
              fmt("%.3f", frac) + ")"};
}

Line positivity() {
  bool ok = true;
  int n = 0;
  double worst_v = 0.0, worst_p = 0.0;
  for (const auto& [name, reps] : g_reports) {
    for (const auto& r : reps) {
      bool is_v = r.identity == "pos.V:0.5" || r.identity == "pos.V:1" || r.identity == "pos.V:2";
      bool is_p = r.identity == "ms.p-squares";
      if (!is_v && !is_p) continue;
      if (r.status.rfind("skipped", 0) == 0) continue;
      ++n;
      for (const auto& s : r.sides) {
        if (s.n_evaluated == 0) continue;
        double rel = s.max_abs_residual / std::max(s.scale, 1e-300);
        if (is_v) {
          worst_v = std::max(worst_v, rel);
          ok = ok && s.max_abs_residual <= kPositivityRel * s.scale + 1e-300;
        } else {
          worst_p = std::max(worst_p, s.max_rel_residual);
          ok = ok && s.max_rel_residual < kPSquaresRel;
        }
      }
    }
  }
  ok = ok && n >= 4 * 3;
  return {3, ok,
          std::to_string(n) + " runs, worst V violation/scale " + fmt("%.2e", worst_v) +
              ", worst p-squares rel " + fmt("%.2e", worst_p)};
}

bool is_d(const PetrovSide& s) {
  return s.type == "D" && s.s2_rel_std < kPetrovS2Std && s.max_s_ratio < kPetrovSRatio &&
         s.n_points >= kPetrovPoints;
}

Line petrov() {
  bool ok = true;
  std::string detail;
  for (const auto& m : four_metrics()) {
    auto r = petrov_report(m, kPetrovPoints, 1);
    bool this_ok;
    if (m.name == "taub-nut") {
      int flat = (r.plus.type == "half-flat") + (r.minus.type == "half-flat");
      this_ok = flat == 1;
    } else {
      this_ok = is_d(r.plus) && is_d(r.minus);
    }
    ok = ok && this_ok;
    detail += m.name + " " + r.plus.type + "/" + r.minus.type + "; ";
  }
  return {4, ok, detail};
}

Line charges() {
  auto tn = make_model("taub-nut", {{"n", 1.0}});
  auto sg = surface_gravities(tn, "nut:0");
  double target = kPi / (2 * sg.kappa1 * sg.kappa2);
  auto q = charge(tn, "nut:0");
  double rel = std::abs(q.extrapolated - target) / std::abs(target);
  auto b = charge(make_model("schwarzschild", {{"m", 1.0}}), "bolt:0");
  bool ok = rel < kChargeRel && std::abs(b.extrapolated) < kBoltChargeAbs;
  return {5, ok,
          "Taub-NUT rel err " + fmt("%.2e", rel) + ", Schwarzschild bolt " +
              fmt("%.2e", b.extrapolated)};
}

Line balance() {
  bool ok = true;
  double worst = 0.0;
  std::vector<MetricModel> ms{make_model("schwarzschild", {{"m", 1.0}}),
                              make_model("kerr", {{"m", 1.0}, {"a", 1.0 / std::sqrt(3.0)}}),
                              make_model("taub-bolt", {{"n", 1.0}})};
  for (const auto& m : ms)
    for (int s : {1, -1}) {
      auto L = global_balance(m, s);
      worst = std::max({worst, L.closed_imbalance, L.numeric_imbalance});
      ok = ok && L.applicable && L.closed_imbalance < kBalanceRel && L.numeric_imbalance < kBalanceRel;
    }
  // closed form from the extracted surface gravity: bolt term - infinity term
  const double mass = 1.0;
  auto sch = make_model("schwarzschild", {{"m", mass}});
  double kappa = surface_gravities(sch, "bolt:0").kappa;
  double bolt_term = 4 * kPi * kPi * 2 / std::abs(kappa);
  double inf_term = -2 * kPi * (2 * kPi / std::abs(kappa)) * 2;
  double expect = 32 * kPi * kPi * mass;
  double cf = std::max({std::abs(bolt_term - expect) / expect, std::abs(inf_term + expect) / expect,
                        std::abs(bolt_term + inf_term) / expect});
  ok = ok && cf < kClosedFormRel && std::abs(kappa - 0.25 / mass) < kClosedFormRel;
  return {6, ok,
          "worst imbalance " + fmt("%.2e", worst) + ", Schwarzschild closed form " + fmt("%.2e", cf)};
}

using NutList = std::vector<std::array<int, 3>>;

std::set<NutList> read_golden(const std::string& name) {
  std::ifstream in(std::string(ALF_GOLDEN_DIR) + "/" + name);
  std::set<NutList> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.insert(nlohmann::json::parse(line).get<NutList>());
  return out;
}

std::set<NutList> enumerated(int chi, int sign) {
  EnumerationOptions o;
  o.chi = chi;
  o.sign = sign;
  o.w_max = 6;
  std::set<NutList> out;
  for (const auto& c : enumerate_configs(o)) {
    NutList l;
    for (const auto& n : c.nuts) l.push_back({n.eps, n.w1, n.w2});
    std::sort(l.begin(), l.end());
    out.insert(l);
  }
  return out;
}

Rational rhs_at(const FixedPointConfig& c, const Rational& g) {
  Rational s = 0;
  for (const auto& n : c.nuts) {
    Rational ga = 1, gb = 1;
    for (int i = 0; i < n.w1; ++i) ga *= g;
    for (int i = 0; i < n.w2; ++i) gb *= g;
    s += Rational(n.eps) * (ga + 1) * (gb + 1) / ((ga - 1) * (gb - 1));
  }
  int bb = 0;
  for (const auto& b : c.bolts) bb += b.self_intersection;
  s += Rational(4) * g / ((g - 1) * (g - 1)) * Rational(c.e - bb);
  s += Rational((c.e > 0) - (c.e < 0));
  return s;
}

Line combinatorics() {
  bool golden = true;
  auto pairs = read_golden("two_nut_pairs_w6.jsonl");
  auto plus = read_golden("three_nut_chains_w6_plus.jsonl");
  auto minus = read_golden("three_nut_chains_w6_minus.jsonl");
  golden = !pairs.empty() && !plus.empty() && !minus.empty() && enumerated(2, 0) == pairs &&
           enumerated(3, 1) == plus && enumerated(3, -1) == minus;

  std::mt19937 rng(7);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const std::vector<Rational> pts{Rational(2), Rational(3), Rational(5, 2), Rational(-7, 3),
                                  Rational(11, 4)};
  int agree = 0, holds = 0;
  for (int t = 0; t < kRandomConfigs; ++t) {
    FixedPointConfig c;
    if (t % 2 == 0) {
      int a = uni(1, 5), b = uni(1, 5);
      while (std::gcd(a, b) != 1) b = uni(1, 5);
      c.nuts = {{1, a, b}, {-1, a, b}};
    }
    for (int k = uni(0, 2); k > 0; --k) {
      int a = uni(1, 6), b = uni(1, 6);
      while (std::gcd(a, b) != 1) b = uni(1, 6);
      c.nuts.push_back({uni(0, 1) ? 1 : -1, std::min(a, b), std::max(a, b)});
    }
    for (int k = uni(0, 1); k > 0; --k) c.bolts.push_back({2 * uni(-1, 1), uni(-2, 2)});
    // e = B.B keeps the g / (g - 1)^2 term from spoiling the cancelling pair
    c.e = uni(0, 1) ? c.bolt_self_intersection() : uni(-1, 1);
    int claimed = c.signature() + (uni(0, 3) == 0 ? uni(-1, 1) : 0);
    bool by_points = true;
    for (const auto& g : pts) by_points = by_points && rhs_at(c, g) == Rational(claimed);
    auto cert = check_signature_identity(c, claimed);
    agree += cert.holds == by_points && cert.holds == cert.residual.is_zero();
    holds += cert.holds;
  }
  bool ok = golden && agree == kRandomConfigs;
  return {7, ok,
          std::string("golden sets ") + (golden ? "equal" : "differ") + ", " + std::to_string(agree) +
              "/" + std::to_string(kRandomConfigs) + " certificates agree (" + std::to_string(holds) +
              " hold)"};
}

Line cases() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const char* topo : {"kerr", "taubbolt", "chenteo"}) {
    auto r = case_analysis(topo, kCaseWeight, kCaseNuts);
    ok = ok && r.n_counterexamples == 0 && r.n_admissible > 0;
    detail += std::string(topo) + " " + std::to_string(r.n_admissible) + " admissible/" +
              std::to_string(r.n_counterexamples) + " counterexamples; ";
  }
  double secs = seconds_since(t0);
  ok = ok && secs < kCaseSeconds;
  return {8, ok, detail + fmt("%.1f s", secs)};
}

Line decay() {
  const std::map<std::string, double> target{
      {"1-lambda", -1.0}, {"omega", -1.0}, {"|nabla xi|", -2.0}, {"F+^2", -4.0}, {"F-^2", -4.0}};
  bool ok = true;
  double worst_slope = 0.0, worst_lim = 0.0;
  for (const auto& m : four_metrics()) {
    auto d = asymptotic_decay_suite(m);
    for (const auto& s : d.series) {
      if (s.identically_zero) continue;
      auto it = target.find(s.quantity);
      if (it == target.end()) continue;
      // a vanishing leading coefficient (zero NUT charge) shows up as an integer drop
      double dev = std::abs(s.slope - it->second);
      if (s.faster) dev = std::abs(s.slope - std::round(s.slope));
      worst_slope = std::max(worst_slope, dev);
      ok = ok && dev <= kSlopeTol && s.slope <= it->second + kSlopeTol;
    }
    for (int i = 0; i < 2; ++i) {
      if (d.b_squared[i] == 0.0) continue;
      worst_lim = std::max(worst_lim, d.limit_rel_err[i]);
      ok = ok && d.limit_rel_err[i] < kDecayLimitRel;
    }
  }
  return {9, ok,
          "worst slope deviation " + fmt("%.3f", worst_slope) + ", worst r^4 F^2 limit rel err " +
              fmt("%.2e", worst_lim)};
}

std::string run_cli(const std::string& args, int* code) {
  std::string cmd = std::string(ALF_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  if (!p) {
    *code = -1;
    return out;
  }
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  int st = pclose(p);
  *code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return out;
}

Line determinism() {
  const std::vector<std::string> runs{
      "list-metrics",
      "verify-identities --metric all --points 10 --seed 11",
      "petrov --metric kerr --points 8 --seed 5",
      "charges --metric taub-nut",
      "classify --chi 3 --sign 1 --max-weight 6 --max-nuts 4",
      "case-analysis --topology chenteo --max-weight 6 --max-nuts 5 --list",
      "decay --metric kerr",
      "verify-identities --metric taub-bolt --points 6 --seed 2 --format markdown"};
  bool ok = true;
  int same = 0;
  for (const auto& a : runs) {
    int c1 = 0, c2 = 0;
    std::string o1 = strip_envelope(run_cli(a, &c1));
    std::string o2 = strip_envelope(run_cli(a, &c2));
    bool eq = c1 == c2 && c1 != 2 && !o1.empty() && o1 == o2;
    same += eq;
    ok = ok && eq;
  }
  return {10, ok, std::to_string(same) + "/" + std::to_string(runs.size()) + " reports byte-identical"};
}

}  // namespace

int main() {
  std::vector<std::function<Line()>> criteria{identities, mutation,      positivity, petrov, charges,
                                              balance,    combinatorics, cases,      decay,  determinism};
  bool all = true;
  for (auto& c : criteria) {
    Line l;
    try {
      l = c();
    } catch (const std::exception& e) {
      l = {static_cast<int>(&c - criteria.data()) + 1, false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %2d: %s  %s\n", l.id, l.pass ? "PASS" : "FAIL", l.detail.c_str());
    std::fflush(stdout);
    all = all && l.pass;
  }
  return all ? 0 : 1;
}
