#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <unistd.h>

#include "alf/report.hpp"

using namespace alf;

namespace {

// --config path: key=value lines become long flags of the chosen subcommand, unless the
// same flag is already on the command line. Unknown keys then fail as unknown flags.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  auto kv = read_key_values(path);
  for (const auto& [k, v] : kv) {
    std::string flag = "--" + k;
    bool given = false;
    for (const auto& a : rest) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
    if (given) continue;
    if (v == "true") {
      rest.push_back(flag);
    } else if (v != "false") {
      rest.push_back(flag);
      rest.push_back(v);
    }
  }
  return rest;
}

bool use_color() { return std::getenv("NO_COLOR") == nullptr && isatty(STDERR_FILENO); }

void status_line(const std::string& cmd, bool pass) {
  const char* word = pass ? "pass" : "FAIL";
  if (use_color())
    std::fprintf(stderr, "alfcheck %s: \033[%sm%s\033[0m\n", cmd.c_str(), pass ? "32" : "31", word);
  else
    std::fprintf(stderr, "alfcheck %s: %s\n", cmd.c_str(), word);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical and exact checks for circle-symmetric gravitational instantons"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string format = "json", out_path, sign_flag = "both", config_path;
  std::optional<double> m_param, a_param, n_param;
  std::vector<std::string> param_pairs;
  std::vector<int> bolt_chis;

  auto add_metric = [&](CLI::App* s) {
    s->add_option("--metric", cfg.metric, "metric name, or 'all'")->capture_default_str();
    s->add_option("--m", m_param, "mass parameter (schwarzschild, kerr)");
    s->add_option("--a", a_param, "rotation parameter (kerr)");
    s->add_option("--n", n_param, "NUT parameter (taub-nut, taub-bolt)");
    s->add_option("--param", param_pairs, "any other model parameter as key=value");
  };
  auto add_output = [&](CLI::App* s) {
    s->add_option("--format", format, "json or markdown")
        ->check(CLI::IsMember({"json", "markdown"}))
        ->capture_default_str();
    s->add_option("--out", out_path, "write the report here instead of stdout");
    s->add_option("--config", config_path, "key=value file; keys are the long flag names");
    s->add_option("--threads", cfg.threads, "worker threads (0: all cores)")->capture_default_str();
  };

  auto* list = app.add_subcommand("list-metrics", "catalogue with fixed-point data and gate residuals");
  add_output(list);

  auto* verify = app.add_subcommand("verify-identities", "evaluate the identity registry at sampled points");
  add_metric(verify);
  verify->add_option("--suite", cfg.suite, "registry prefix, full id, or 'all'")->capture_default_str();
  verify->add_option("--points", cfg.points, "sample points per metric (default 100)");
  verify->add_option("--seed", cfg.seed, "sampling seed")->capture_default_str();
  verify->add_option("--order", cfg.order, "jet order")->check(CLI::Range(3, 8))->capture_default_str();
  verify->add_option("--tolerance", cfg.tolerance, "relative tolerance override (0: per identity)");
  add_output(verify);

  auto* petrov = app.add_subcommand("petrov", "Petrov type of each Weyl side");
  add_metric(petrov);
  petrov->add_option("--points", cfg.points, "sample points (default 20)");
  petrov->add_option("--seed", cfg.seed, "sampling seed")->capture_default_str();
  add_output(petrov);

  auto* charges = app.add_subcommand("charges", "NUT charge of every nut and bolt");
  add_metric(charges);
  charges->add_option("--nodes", cfg.quad_nodes, "quadrature nodes per surface")->capture_default_str();
  add_output(charges);

  auto* balance = app.add_subcommand("balance", "boundary-term ledger of the divergence identity");
  add_metric(balance);
  balance->add_option("--sign", sign_flag, "+, - or both")
      ->check(CLI::IsMember({"+", "-", "both"}))
      ->capture_default_str();
  balance->add_option("--nodes", cfg.quad_nodes, "quadrature nodes per surface")->capture_default_str();
  add_output(balance);

  auto* classify = app.add_subcommand("classify", "fixed-point data allowed by the signature identity");
  classify->add_option("--chi", cfg.chi, "Euler characteristic")->capture_default_str();
  classify->add_option("--sign", cfg.csign, "signature")->capture_default_str();
  classify->add_option("--e", cfg.e, "Euler number at infinity")->capture_default_str();
  classify->add_option("--max-weight", cfg.max_weight, "largest weight")->check(CLI::PositiveNumber)->capture_default_str();
  classify->add_option("--max-nuts", cfg.max_nuts, "largest number of nuts")->check(CLI::NonNegativeNumber)->capture_default_str();
  classify->add_flag("--bolts", cfg.with_bolts, "also place bolts");
  add_output(classify);

  auto* cases = app.add_subcommand("case-analysis", "sign of the boundary sums over admissible data");
  cases->add_option("--topology", cfg.topology, "kerr, taubbolt or chenteo")
      ->check(CLI::IsMember({"kerr", "taubbolt", "chenteo"}))
      ->capture_default_str();
  cases->add_option("--max-weight", cfg.max_weight, "largest weight (default 12)");
  cases->add_option("--max-nuts", cfg.max_nuts, "largest number of nuts")->capture_default_str();
  cases->add_option("--bolt-chi", bolt_chis, "allowed bolt Euler characteristics (default 2 0 -2)");
  cases->add_option("--max-self-intersection", cfg.bolts.max_abs_self_intersection,
                    "bound on |B.B|")->capture_default_str();
  cases->add_option("--max-bolts", cfg.bolts.max_bolts, "bound on the number of bolts")->capture_default_str();
  cases->add_flag("--list", cfg.list, "include every configuration in the report");
  add_output(cases);

  auto* decay = app.add_subcommand("decay", "log-log decay fits along a ray");
  add_metric(decay);
  add_output(decay);

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "alfcheck: %s\n", e.what());
    return 2;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string command = sub->get_name();
  if (m_param) cfg.params["m"] = *m_param;
  if (a_param) cfg.params["a"] = *a_param;
  if (n_param) cfg.params["n"] = *n_param;
  for (const auto& p : param_pairs) {
    auto eq = p.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "alfcheck: --param expects key=value, got '%s'\n", p.c_str());
      return 2;
    }
    try {
      cfg.params[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    } catch (const std::exception&) {
      std::fprintf(stderr, "alfcheck: --param %s: not a number\n", p.c_str());
      return 2;
    }
  }
  cfg.sign = sign_flag;
  if (!bolt_chis.empty()) cfg.bolts.euler_chars = bolt_chis;
  if (command == "case-analysis" && cases->count("--max-weight") == 0) cfg.max_weight = 12;

  auto t0 = std::chrono::steady_clock::now();
  CommandOutput out;
  try {
    out = run_command(command, cfg);
  } catch (const CatalogueError& e) {
    std::fprintf(stderr, "alfcheck: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "alfcheck: %s\n", e.what());
    return 2;
  } catch (const SearchSpaceError& e) {
    std::fprintf(stderr, "alfcheck: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "alfcheck: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    // numerical failures still produce a report
    out.command = command;
    out.pass = false;
    out.doc = {{"schema", "alfcheck.report/1"},
               {"config", {{"command", command}}},
               {"pass", false},
               {"status", "fail"},
               {"error", e.what()}};
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Json env = make_envelope(wall);
  std::string text = format == "markdown" ? render_markdown(out) : render_json(out, &env);

  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::fprintf(stderr, "alfcheck: cannot write %s\n", out_path.c_str());
      return 2;
    }
    f << text;
  }
  status_line(command, out.pass);
  return out.pass ? 0 : 1;
}
