#include "alf/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace alf {

namespace {

Json point_json(const Point& p) { return Json::array({p[0], p[1], p[2], p[3]}); }

// NaN and infinities are not JSON; keep them as strings so reports stay parseable
Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Json config_json(const std::string& command, const RunConfig& cfg) {
  Json c;
  c["command"] = command;
  if (command == "classify") {
    c["chi"] = cfg.chi;
    c["sign"] = cfg.csign;
    c["e"] = cfg.e;
    c["max_weight"] = cfg.max_weight;
    c["max_nuts"] = cfg.max_nuts;
    c["with_bolts"] = cfg.with_bolts;
  } else if (command == "case-analysis") {
    c["topology"] = cfg.topology;
    c["max_weight"] = cfg.max_weight;
    c["max_nuts"] = cfg.max_nuts;
    c["bolt_euler_chars"] = cfg.bolts.euler_chars;
    c["max_abs_self_intersection"] = cfg.bolts.max_abs_self_intersection;
    c["max_bolts"] = cfg.bolts.max_bolts;
  } else if (command != "list-metrics") {
    c["metric"] = cfg.metric;
    Json p = Json::object();
    for (const auto& [k, v] : cfg.params) p[k] = v;
    c["params"] = p;
    if (command == "verify-identities" || command == "petrov") {
      c["seed"] = cfg.seed;
      c["points"] = cfg.points;
    }
    if (command == "verify-identities") {
      c["suite"] = cfg.suite;
      c["order"] = cfg.order;
      c["tolerance"] = cfg.tolerance;
    }
    if (command == "balance") c["sign"] = cfg.sign;
    if (command == "charges" || command == "balance") c["quad_nodes"] = cfg.quad_nodes;
  }
  return c;
}

CommandOutput begin(const std::string& command, const RunConfig& cfg) {
  CommandOutput out;
  out.command = command;
  out.doc["schema"] = "alfcheck.report/1";
  out.doc["config"] = config_json(command, cfg);
  return out;
}

void finish(CommandOutput& out) {
  out.doc["pass"] = out.pass;
  out.doc["status"] = out.pass ? "pass" : "fail";
}

std::string locus_name(bool nut, std::size_t i) {
  return (nut ? "nut:" : "bolt:") + std::to_string(i);
}

std::vector<std::string> loci(const MetricModel& m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m.fixed.nuts.size(); ++i) out.push_back(locus_name(true, i));
  for (std::size_t i = 0; i < m.fixed.bolts.size(); ++i) out.push_back(locus_name(false, i));
  return out;
}

MetricModel build(const std::string& name, const RunConfig& cfg) {
  // overrides apply only to the keys a model knows; with "all" each model takes its own
  std::map<std::string, double> p;
  MetricModel probe = make_model(name, {}, false);
  for (const auto& [k, v] : cfg.params)
    if (cfg.metric != "all" || probe.params.count(k)) p[k] = v;
  return make_model(name, p);
}

}  // namespace

Json to_json(const MetricModel& m) {
  Json j;
  j["name"] = m.name;
  Json p = Json::object();
  for (const auto& [k, v] : m.params) p[k] = v;
  j["params"] = p;
  j["chart"] = m.chart_id;
  j["orientation"] = m.orientation;
  j["tau_period"] = m.tau_period;
  j["declared_petrov"] = {m.declared_petrov_plus, m.declared_petrov_minus};
  Json nuts = Json::array();
  for (const auto& n : m.fixed.nuts)
    nuts.push_back({{"eps", n.eps}, {"weights", {n.w1, n.w2}}, {"theta", n.theta},
                    {"kappa", {n.kappa1, n.kappa2}}});
  Json bolts = Json::array();
  for (const auto& b : m.fixed.bolts)
    bolts.push_back({{"euler_char", b.euler_char}, {"self_intersection", b.self_intersection},
                     {"kappa", b.kappa}});
  j["nuts"] = nuts;
  j["bolts"] = bolts;
  j["euler_number"] = m.fixed.euler_number;
  j["euler_char"] = m.fixed.euler_char;
  j["signature"] = m.fixed.signature;
  j["ell_inf"] = m.fixed.ell_inf;
  return j;
}

Json to_json(const VerificationReport& r) {
  Json j;
  j["metric"] = r.metric;
  j["identity"] = r.identity;
  j["kind"] = r.kind;
  j["labels"] = r.label_convention;
  j["points"] = r.n_points;
  j["seed"] = r.seed;
  j["max_abs_residual"] = num(r.max_abs_residual);
  j["max_rel_residual"] = num(r.max_rel_residual);
  j["scale"] = num(r.scale);
  j["tolerance"] = r.tolerance;
  j["floor"] = r.floor;
  j["status"] = r.status;
  j["pass"] = r.pass;
  Json sides = Json::array();
  for (const auto& s : r.sides) {
    Json sj{{"side", s.side},
            {"evaluated", s.n_evaluated},
            {"skipped", s.n_skipped},
            {"max_abs_residual", num(s.max_abs_residual)},
            {"max_rel_residual", num(s.max_rel_residual)},
            {"scale", num(s.scale)},
            {"worst_point", point_json(s.worst_point)},
            {"pass", s.pass}};
    if (!s.skip_reason.empty()) sj["skip_reason"] = s.skip_reason;
    sides.push_back(sj);
  }
  j["sides"] = sides;
  return j;
}

Json to_json(const PetrovSide& p) {
  return {{"type", p.type},
          {"max_s_ratio", num(p.max_s_ratio)},
          {"s2_rel_std", num(p.s2_rel_std)},
          {"s2_mean", num(p.s2_mean)},
          {"max_eig_split", num(p.max_eig_split)},
          {"max_w_ratio", num(p.max_w_ratio)},
          {"points", p.n_points},
          {"diagnostics", p.diagnostics}};
}

Json to_json(const FluxSeries& s) {
  Json j{{"locus", s.locus},
         {"levels", nums(s.levels)},
         {"values", nums(s.values)},
         {"extrapolated", num(s.extrapolated)},
         {"target", num(s.target)},
         {"abs_err", num(s.abs_err)},
         {"rel_err", num(s.rel_err)},
         {"spread", num(s.spread)},
         {"pass", s.pass}};
  if (s.sign != 0) j["sign"] = s.sign;
  if (s.locus == "infinity") j["tail_exponent"] = num(s.tail_exponent);
  if (!s.warning.empty()) j["warning"] = s.warning;
  return j;
}

Json to_json(const FixedPointLimits& l) {
  return {{"locus", l.locus},
          {"sign", l.sign},
          {"levels", nums(l.levels)},
          {"calF_mean", nums(l.calF_mean)},
          {"calF_target", num(l.calF_target)},
          {"calF_slope", num(l.calF_slope)},
          {"rest_max", nums(l.rest_max)},
          {"current_max", nums(l.current_max)},
          {"gradient_max", nums(l.gradient_max)},
          {"rest_slope", num(l.rest_slope)},
          {"current_slope", num(l.current_slope)},
          {"gradient_slope", num(l.gradient_slope)},
          {"pass", l.pass}};
}

Json to_json(const BalanceLedger& b) {
  Json j{{"metric", b.metric}, {"sign", b.sign}, {"petrov", b.petrov}, {"applicable", b.applicable}};
  if (!b.applicable) {
    j["reason"] = b.reason;
    return j;
  }
  Json terms = Json::array();
  for (const auto& e : b.fixed_points)
    terms.push_back({{"locus", e.locus}, {"closed_form", num(e.closed_form)}, {"numeric", num(e.numeric)}});
  terms.push_back({{"locus", b.infinity.locus},
                   {"closed_form", num(b.infinity.closed_form)},
                   {"numeric", num(b.infinity.numeric)}});
  j["terms"] = terms;
  j["ell_inf"] = num(b.ell_inf);
  j["orbifold_euler"] = b.orbifold_euler;
  j["bulk"] = num(b.bulk);
  j["bulk_nodes"] = b.bulk_nodes;
  j["closed_sum"] = num(b.closed_sum);
  j["closed_imbalance"] = num(b.closed_imbalance);
  j["numeric_sum"] = num(b.numeric_sum);
  j["numeric_imbalance"] = num(b.numeric_imbalance);
  j["tolerance"] = b.tolerance;
  j["pass"] = b.pass;
  return j;
}

Json to_json(const DecayReport& d) {
  Json series = Json::array();
  for (const auto& s : d.series)
    series.push_back({{"quantity", s.quantity},
                      {"target", s.target},
                      {"slope", num(s.slope)},
                      {"identically_zero", s.identically_zero},
                      {"faster", s.faster},
                      {"r", nums(s.r)},
                      {"values", nums(s.values)},
                      {"pass", s.pass}});
  return {{"metric", d.metric},
          {"theta", d.theta},
          {"series", series},
          {"r4F2_limit", {num(d.r4F2_limit[0]), num(d.r4F2_limit[1])}},
          {"b_squared", {num(d.b_squared[0]), num(d.b_squared[1])}},
          {"limit_rel_err", {num(d.limit_rel_err[0]), num(d.limit_rel_err[1])}},
          {"pass", d.pass}};
}

Json to_json(const FixedPointConfig& c) {
  Json nuts = Json::array();
  for (const auto& n : c.nuts) nuts.push_back({n.eps, n.w1, n.w2});
  Json bolts = Json::array();
  for (const auto& b : c.bolts) bolts.push_back({b.euler_char, b.self_intersection});
  return {{"nuts", nuts}, {"bolts", bolts}, {"e", c.e}, {"text", c.str()}};
}

Json to_json(const CaseEntry& e) {
  Json j{{"config", to_json(e.config)},
         {"w", e.phi.w},
         {"phi_plus", e.phi.plus.str()},
         {"phi_minus", e.phi.minus.str()},
         {"status", e.status}};
  if (!e.reason.empty()) j["reason"] = e.reason;
  if (!e.branch.empty()) j["branch"] = e.branch;
  return j;
}

std::vector<std::string> metrics_for(const std::string& name) {
  if (name == "all") return {"schwarzschild", "kerr", "taub-nut", "taub-bolt"};
  return {name};
}

CommandOutput run_list_metrics(const RunConfig& cfg) {
  CommandOutput out = begin("list-metrics", cfg);
  Json rows = Json::array();
  for (const auto& name : metric_names()) {
    MetricModel m = make_model(name, {}, false);
    GateResult g = validate_model(m);
    Json j = to_json(m);
    j["gate"] = {{"ricci_rel", num(g.ricci_rel)},
                 {"killing_rel", num(g.killing_rel)},
                 {"lambda_max", num(g.lambda_max)},
                 {"lambda_monotone", g.lambda_monotone},
                 {"pass", g.pass}};
    out.pass = out.pass && g.pass;
    rows.push_back(j);
  }
  out.doc["metrics"] = rows;
  finish(out);
  return out;
}

CommandOutput run_verify_identities(const RunConfig& cfg) {
  RunConfig c = cfg;
  if (c.points <= 0) c.points = 100;
  CommandOutput out = begin("verify-identities", c);
  SuiteOptions opts;
  opts.order = c.order;
  if (c.tolerance > 0) opts.tolerance = c.tolerance;
  opts.threads = c.threads;
  auto suite = select_suite(c.suite);
  Json rows = Json::array();
  int n_pass = 0, n_fail = 0, n_skip = 0;
  for (const auto& name : metrics_for(c.metric)) {
    MetricModel m = build(name, c);
    for (const auto& r : run_suite(m, suite, c.points, c.seed, opts)) {
      if (r.status.rfind("skipped", 0) == 0)
        ++n_skip;
      else if (r.pass)
        ++n_pass;
      else
        ++n_fail;
      rows.push_back(to_json(r));
    }
  }
  out.pass = n_fail == 0;
  out.doc["reports"] = rows;
  out.doc["summary"] = {{"passed", n_pass}, {"failed", n_fail}, {"skipped", n_skip}};
  finish(out);
  return out;
}

CommandOutput run_petrov(const RunConfig& cfg) {
  RunConfig c = cfg;
  if (c.points <= 0) c.points = 20;
  CommandOutput out = begin("petrov", c);
  Json rows = Json::array();
  for (const auto& name : metrics_for(c.metric)) {
    MetricModel m = build(name, c);
    PetrovReport r = petrov_report(m, c.points, c.seed);
    auto matches = [](const std::string& declared, const PetrovSide& s) {
      if (s.type == "inconsistent") return false;
      return declared == "detect" || declared == s.type;
    };
    bool ok = matches(m.declared_petrov_plus, r.plus) && matches(m.declared_petrov_minus, r.minus);
    // a half-flat metric is flat on exactly one side under either labelling
    if (m.declared_petrov_plus == "detect")
      ok = ok && ((r.plus.type == "half-flat") != (r.minus.type == "half-flat"));
    out.pass = out.pass && ok;
    rows.push_back({{"metric", name},
                    {"plus", to_json(r.plus)},
                    {"minus", to_json(r.minus)},
                    {"plus_flipped", to_json(r.plus_flipped)},
                    {"minus_flipped", to_json(r.minus_flipped)},
                    {"label", r.plus.type + "+" + r.minus.type + "-"},
                    {"pass", ok}});
  }
  out.doc["metrics"] = rows;
  finish(out);
  return out;
}

CommandOutput run_charges(const RunConfig& cfg) {
  CommandOutput out = begin("charges", cfg);
  Json rows = Json::array();
  for (const auto& name : metrics_for(cfg.metric)) {
    MetricModel m = build(name, cfg);
    double total = 0;
    for (const auto& l : loci(m)) {
      FluxSeries s = charge(m, l, {0.1, 0.05, 0.025}, cfg.quad_nodes);
      SurfaceGravity sg = surface_gravities(m, l);
      Json j = to_json(s);
      j["metric"] = name;
      j["kappa"] = sg.is_nut ? Json::array({sg.kappa1, sg.kappa2}) : Json(sg.kappa);
      total += s.extrapolated;
      out.pass = out.pass && s.pass;
      rows.push_back(j);
    }
    rows.push_back({{"metric", name}, {"locus", "total"}, {"extrapolated", num(total)}});
  }
  out.doc["charges"] = rows;
  finish(out);
  return out;
}

CommandOutput run_balance(const RunConfig& cfg) {
  CommandOutput out = begin("balance", cfg);
  std::vector<int> signs;
  if (cfg.sign == "+" || cfg.sign == "both") signs.push_back(1);
  if (cfg.sign == "-" || cfg.sign == "both") signs.push_back(-1);
  if (signs.empty()) throw std::invalid_argument("sign must be +, - or both");
  Json ledgers = Json::array(), limits = Json::array(), checks = Json::array();
  for (const auto& name : metrics_for(cfg.metric)) {
    MetricModel m = build(name, cfg);
    for (int s : signs) {
      BalanceLedger b = global_balance(m, s, cfg.quad_nodes);
      ledgers.push_back(to_json(b));
      if (!b.applicable) continue;
      out.pass = out.pass && b.pass;
      for (const auto& l : loci(m)) {
        FixedPointLimits f = fixed_point_limits(m, l, s);
        Json j = to_json(f);
        j["metric"] = name;
        limits.push_back(j);
        out.pass = out.pass && f.pass;
      }
    }
    // Schwarzschild: the bolt and infinity terms cancel with kappa taken from the metric
    if (name == "schwarzschild") {
      SurfaceGravity sg = surface_gravities(m, "bolt:0");
      double mass = m.params.at("m");
      double pi = std::numbers::pi;
      double bolt = 4 * pi * pi * 2 / std::abs(sg.kappa);
      double inf = -2 * pi * (2 * pi / std::abs(sg.kappa)) * 2;
      double rel = std::abs(bolt + inf) / (32 * pi * pi * mass);
      double kappa_err = std::abs(sg.kappa - 1 / (4 * mass)) * 4 * mass;
      bool ok = rel < 1e-6 && kappa_err < 1e-6;
      checks.push_back({{"metric", name},
                        {"kappa", sg.kappa},
                        {"kappa_rel_err", kappa_err},
                        {"bolt_term", bolt},
                        {"infinity_term", inf},
                        {"rel_imbalance", rel},
                        {"expected_each", 32 * pi * pi * mass},
                        {"pass", ok}});
      out.pass = out.pass && ok;
    }
  }
  out.doc["ledgers"] = ledgers;
  out.doc["limits"] = limits;
  out.doc["closed_form_checks"] = checks;
  finish(out);
  return out;
}

CommandOutput run_classify(const RunConfig& cfg) {
  CommandOutput out = begin("classify", cfg);
  EnumerationOptions o;
  o.chi = cfg.chi;
  o.sign = cfg.csign;
  o.e = cfg.e;
  o.n_max = cfg.max_nuts;
  o.w_max = cfg.max_weight;
  o.with_bolts = cfg.with_bolts;
  o.bolts = cfg.bolts;
  o.threads = cfg.threads;
  auto configs = enumerate_configs(o);
  for (const auto& c : configs) out.lines.push_back({{"config", to_json(c)}});
  out.doc["summary"] = {{"count", configs.size()}};
  finish(out);
  return out;
}

CommandOutput run_case_analysis(const RunConfig& cfg) {
  CommandOutput out = begin("case-analysis", cfg);
  CaseReport r = case_analysis(cfg.topology, cfg.max_weight, cfg.max_nuts, cfg.bolts, cfg.threads);
  Json branches = Json::object();
  for (const auto& [k, v] : r.branches) branches[k] = {{"survives", v[0]}, {"eliminated", v[1]}};
  out.doc["summary"] = {{"topology", r.topology},
                        {"chi", r.chi},
                        {"sign", r.sign},
                        {"e", r.e},
                        {"admissible", r.n_admissible},
                        {"survivors", r.n_survivors},
                        {"eliminated", r.n_eliminated},
                        {"counterexamples", r.n_counterexamples},
                        {"nuts_only", r.n_nuts_only},
                        {"with_bolts", r.n_with_bolts}};
  if (!branches.empty()) out.doc["branches"] = branches;
  Json cex = Json::array();
  for (const auto& e : r.entries)
    if (e.status == "counterexample") cex.push_back(to_json(e));
  out.doc["counterexamples"] = cex;
  if (cfg.list) {
    Json all = Json::array();
    for (const auto& e : r.entries) all.push_back(to_json(e));
    out.doc["entries"] = all;
  }
  out.pass = r.n_counterexamples == 0;
  finish(out);
  return out;
}

CommandOutput run_decay(const RunConfig& cfg) {
  CommandOutput out = begin("decay", cfg);
  Json rows = Json::array();
  for (const auto& name : metrics_for(cfg.metric)) {
    DecayReport d = asymptotic_decay_suite(build(name, cfg));
    out.pass = out.pass && d.pass;
    rows.push_back(to_json(d));
  }
  out.doc["metrics"] = rows;
  finish(out);
  return out;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"list-metrics", "verify-identities", "petrov",
                                              "charges",      "balance",           "classify",
                                              "case-analysis", "decay"};
  return names;
}

CommandOutput run_command(const std::string& command, const RunConfig& cfg) {
  if (command == "list-metrics") return run_list_metrics(cfg);
  if (command == "verify-identities") return run_verify_identities(cfg);
  if (command == "petrov") return run_petrov(cfg);
  if (command == "charges") return run_charges(cfg);
  if (command == "balance") return run_balance(cfg);
  if (command == "classify") return run_classify(cfg);
  if (command == "case-analysis") return run_case_analysis(cfg);
  if (command == "decay") return run_decay(cfg);
  throw std::invalid_argument("unknown command '" + command + "'");
}

Json make_envelope(double wall_seconds) {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return {{"generated_at", os.str()}, {"wall_seconds", wall_seconds}};
}

std::string render_json(const CommandOutput& out, const Json* envelope) {
  std::string s;
  if (!out.lines.empty() || out.command == "classify") {
    for (const auto& l : out.lines) s += l.dump() + "\n";
    Json tail = out.doc;
    if (envelope) tail["envelope"] = *envelope;
    s += tail.dump() + "\n";
    return s;
  }
  Json doc = out.doc;
  if (envelope) doc["envelope"] = *envelope;
  return doc.dump(2) + "\n";
}

namespace {

std::string cell(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(6) << v.get<double>();
    return os.str();
  }
  if (v.is_array() && v.size() <= 4) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + cell(v[i]);
    return s + "]";
  }
  if (v.is_array()) return "(" + std::to_string(v.size()) + " values)";
  if (v.is_object()) return "{...}";
  return v.dump();
}

void table(std::ostringstream& os, const Json& rows) {
  std::vector<std::string> cols;
  for (const auto& r : rows)
    for (auto it = r.begin(); it != r.end(); ++it) {
      if (it.value().is_object() || (it.value().is_array() && it.value().size() > 4)) continue;
      if (std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
    }
  if (cols.empty()) return;
  os << "|";
  for (const auto& c : cols) os << " " << c << " |";
  os << "\n|";
  for (std::size_t i = 0; i < cols.size(); ++i) os << "---|";
  os << "\n";
  for (const auto& r : rows) {
    os << "|";
    for (const auto& c : cols) os << " " << (r.contains(c) ? cell(r[c]) : "") << " |";
    os << "\n";
  }
}

}  // namespace

std::string render_markdown(const CommandOutput& out) {
  std::ostringstream os;
  os << "# alfcheck " << out.command << "\n\n";
  os << "status: **" << (out.pass ? "pass" : "fail") << "**\n\n";
  if (out.command == "case-analysis") {
    const Json& s = out.doc["summary"];
    os << s["counterexamples"].get<int>() << " counterexamples\n\n";
  }
  for (auto it = out.doc["config"].begin(); it != out.doc["config"].end(); ++it)
    os << "- " << it.key() << ": " << cell(it.value()) << "\n";
  os << "\n";
  for (auto it = out.doc.begin(); it != out.doc.end(); ++it) {
    const std::string& k = it.key();
    if (k == "config" || k == "schema" || k == "pass" || k == "status") continue;
    const Json& v = it.value();
    os << "## " << k << "\n\n";
    if (v.is_array() && !v.empty() && v[0].is_object()) {
      table(os, v);
    } else if (v.is_object()) {
      Json rows = Json::array();
      bool nested = false;
      for (auto jt = v.begin(); jt != v.end(); ++jt) nested = nested || jt.value().is_object();
      if (nested) {
        for (auto jt = v.begin(); jt != v.end(); ++jt) {
          Json r = jt.value();
          r["name"] = jt.key();
          rows.push_back(r);
        }
        table(os, rows);
      } else {
        for (auto jt = v.begin(); jt != v.end(); ++jt)
          os << "- " << jt.key() << ": " << cell(jt.value()) << "\n";
      }
    } else {
      os << cell(v) << "\n";
    }
    os << "\n";
  }
  if (!out.lines.empty()) {
    os << "## configurations\n\n";
    for (const auto& l : out.lines) os << "- `" << l["config"]["text"].get<std::string>() << "`\n";
    os << "\n";
  }
  return os.str();
}

std::string strip_envelope(const std::string& text) {
  // one document, or one per line
  auto strip = [](const std::string& s) {
    Json j = Json::parse(s);
    j.erase("envelope");
    return j.dump();
  };
  std::string t = text;
  while (!t.empty() && (t.back() == '\n' || t.back() == ' ')) t.pop_back();
  try {
    return strip(t) + "\n";
  } catch (const Json::parse_error&) {
  }
  std::istringstream in(t);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out += strip(line) + "\n";
    } catch (const Json::parse_error&) {
      out += line + "\n";  // markdown carries no envelope
    }
  }
  return out;
}

}  // namespace alf
