#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "alf/combinatorics.hpp"
#include "alf/flux.hpp"
#include "alf/identities.hpp"

namespace alf {

using Json = nlohmann::json;

// Everything a command needs; the CLI and the Python module both fill one of these.
struct RunConfig {
  std::string metric = "all";
  std::map<std::string, double> params;
  std::uint64_t seed = 1;
  int points = 0;            // 0: the command default
  int order = 4;             // jet order for the identity suite
  double tolerance = 0.0;    // 0: per-identity tolerance
  std::string suite = "all";
  std::string sign = "both"; // balance: +, - or both
  int quad_nodes = 32;
  // classify
  int chi = 2, csign = 0, e = 0;
  int max_weight = 6, max_nuts = 6;
  bool with_bolts = false;
  // case-analysis
  std::string topology = "kerr";
  bool list = false;
  BoltBounds bolts;
  unsigned threads = 0;
};

// A command's output: one document, or JSON lines for enumerations. Neither carries a
// timestamp; the CLI adds that in a separate "envelope" member.
struct CommandOutput {
  std::string command;
  Json doc;
  std::vector<Json> lines;
  bool pass = true;
};

Json to_json(const MetricModel& m);
Json to_json(const VerificationReport& r);
Json to_json(const PetrovSide& p);
Json to_json(const FluxSeries& s);
Json to_json(const FixedPointLimits& l);
Json to_json(const BalanceLedger& b);
Json to_json(const DecayReport& d);
Json to_json(const FixedPointConfig& c);
Json to_json(const CaseEntry& e);

// metric names behind "all" (the flat model carries no fixed points)
std::vector<std::string> metrics_for(const std::string& name);

CommandOutput run_list_metrics(const RunConfig& cfg);
CommandOutput run_verify_identities(const RunConfig& cfg);
CommandOutput run_petrov(const RunConfig& cfg);
CommandOutput run_charges(const RunConfig& cfg);
CommandOutput run_balance(const RunConfig& cfg);
CommandOutput run_classify(const RunConfig& cfg);
CommandOutput run_case_analysis(const RunConfig& cfg);
CommandOutput run_decay(const RunConfig& cfg);

// dispatch by subcommand name; throws std::invalid_argument for unknown names
CommandOutput run_command(const std::string& command, const RunConfig& cfg);
const std::vector<std::string>& command_names();

Json make_envelope(double wall_seconds);
std::string render_json(const CommandOutput& out, const Json* envelope = nullptr);
std::string render_markdown(const CommandOutput& out);
// drops every "envelope" member, line by line; other text passes through
std::string strip_envelope(const std::string& text);

}  // namespace alf
