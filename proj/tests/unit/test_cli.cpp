#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "alf/report.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// stdout only; stderr goes to /dev/null unless asked for
Run run_cli(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string("NO_COLOR=1 ") + ALF_CLI_PATH + " " + args +
                    (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* p = popen(cmd.c_str(), "r");
  Run r;
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

void check_report(const nlohmann::json& doc, const std::string& command) {
  CHECK(doc["schema"] == "alfcheck.report/1");
  CHECK(doc["config"]["command"] == command);
  CHECK(doc.contains("pass"));
  CHECK(doc.contains("envelope"));
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run_cli("classify --chi 2 --sign 1 --max-weight 4 --max-nuts 3").code == 0);
  CHECK(run_cli("no-such-command").code == 2);
  CHECK(run_cli("petrov --metric nope").code == 2);
  CHECK(run_cli("verify-identities --order 12").code == 2);
  CHECK(run_cli("charges --metric kerr --a 5").code == 2);
  CHECK(run_cli("classify --max-weight 65").code == 2);
  CHECK(run_cli("").code == 2);
  // a suite that matches nothing is reported as a failure, not a usage error
  Run empty = run_cli("verify-identities --metric schwarzschild --suite zzz --points 2");
  CHECK(empty.code == 1);
}

TEST_CASE("config files fill in flags; unknown keys are usage errors") {
  auto good = temp_file("alf_cli_good.cfg", "# classify\nchi = 2\nsign = 1\nmax-weight = 3\nmax-nuts = 2\n");
  Run r = run_cli("classify --config " + good.string());
  CHECK(r.code == 0);
  auto bad = temp_file("alf_cli_bad.cfg", "colour = red\n");
  CHECK(run_cli("classify --config " + bad.string()).code == 2);
  CHECK(run_cli("classify --config /nonexistent/alf.cfg").code == 2);
}

TEST_CASE("reports are valid JSON with the shared schema") {
  Run lm = run_cli("list-metrics");
  REQUIRE(lm.code == 0);
  check_report(nlohmann::json::parse(lm.out), "list-metrics");

  Run pv = run_cli("petrov --metric taub-nut --points 20");
  REQUIRE(pv.code == 0);
  check_report(nlohmann::json::parse(pv.out), "petrov");

  Run cl = run_cli("classify --chi 3 --sign 1 --max-weight 3 --max-nuts 3");
  REQUIRE(cl.code == 0);
  std::istringstream lines(cl.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    CHECK_NOTHROW((void)nlohmann::json::parse(line));
    ++n;
  }
  CHECK(n >= 2);
}

TEST_CASE("JSON reports are byte-identical apart from the envelope") {
  const std::string args = "verify-identities --metric kerr --points 5 --seed 3";
  Run a = run_cli(args), b = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(alf::strip_envelope(a.out) == alf::strip_envelope(b.out));
  Run c = run_cli("classify --chi 2 --sign 0 --max-weight 5 --max-nuts 4");
  Run d = run_cli("classify --chi 2 --sign 0 --max-weight 5 --max-nuts 4");
  CHECK(alf::strip_envelope(c.out) == alf::strip_envelope(d.out));
  CHECK(alf::strip_envelope(c.out).find("envelope") == std::string::npos);
}

TEST_CASE("markdown and --out") {
  Run md = run_cli("case-analysis --topology kerr --max-weight 4 --max-nuts 3 --format markdown");
  CHECK(md.code == 0);
  CHECK(md.out.find("0 counterexamples") != std::string::npos);
  auto out = std::filesystem::temp_directory_path() / "alf_cli_out.json";
  std::filesystem::remove(out);
  Run w = run_cli("list-metrics --out " + out.string());
  CHECK(w.code == 0);
  CHECK(w.out.empty());
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  check_report(nlohmann::json::parse(ss.str()), "list-metrics");
}

TEST_CASE("status line honours NO_COLOR") {
  Run r = run_cli("classify --max-weight 2 --max-nuts 2", true);
  CHECK(r.out.find("alfcheck classify: pass") != std::string::npos);
  CHECK(r.out.find('\033') == std::string::npos);
}
