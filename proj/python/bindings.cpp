#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "alf/report.hpp"

namespace py = pybind11;
using namespace alf;

namespace {

// keys mirror the CLI long flags, with dashes or underscores
RunConfig config_from_json(const std::string& command, const std::string& text) {
  RunConfig c;
  if (command == "case-analysis") c.max_weight = 12;
  Json j = text.empty() ? Json::object() : Json::parse(text);
  for (auto& [key, v] : j.items()) {
    std::string k = key;
    for (auto& ch : k)
      if (ch == '-') ch = '_';
    if (k == "metric") c.metric = v.get<std::string>();
    else if (k == "params") c.params = v.get<std::map<std::string, double>>();
    else if (k == "m" || k == "a" || k == "n") c.params[k] = v.get<double>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else if (k == "points") c.points = v.get<int>();
    else if (k == "order") c.order = v.get<int>();
    else if (k == "tolerance") c.tolerance = v.get<double>();
    else if (k == "suite") c.suite = v.get<std::string>();
    else if (k == "sign" && v.is_string()) c.sign = v.get<std::string>();
    else if (k == "sign") c.csign = v.get<int>();
    else if (k == "nodes") c.quad_nodes = v.get<int>();
    else if (k == "chi") c.chi = v.get<int>();
    else if (k == "e") c.e = v.get<int>();
    else if (k == "max_weight") c.max_weight = v.get<int>();
    else if (k == "max_nuts") c.max_nuts = v.get<int>();
    else if (k == "bolts") c.with_bolts = v.get<bool>();
    else if (k == "topology") c.topology = v.get<std::string>();
    else if (k == "list") c.list = v.get<bool>();
    else if (k == "bolt_chi") c.bolts.euler_chars = v.get<std::vector<int>>();
    else if (k == "max_self_intersection") c.bolts.max_abs_self_intersection = v.get<int>();
    else if (k == "max_bolts") c.bolts.max_bolts = v.get<int>();
    else if (k == "threads") c.threads = v.get<unsigned>();
    else throw ConfigError("unknown option '" + key + "'");
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "circle-symmetric instanton checks";

  py::register_exception<CatalogueError>(m, "CatalogueError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SearchSpaceError>(m, "SearchSpaceError", PyExc_ValueError);

  m.def("commands", &command_names);
  m.def("metric_names", &metric_names);

  // returns (pass, json text); enumerations come back as JSON lines
  m.def(
      "run",
      [](const std::string& command, const std::string& config_json) {
        RunConfig cfg = config_from_json(command, config_json);
        CommandOutput out;
        {
          py::gil_scoped_release release;
          out = run_command(command, cfg);
        }
        return py::make_tuple(out.pass, render_json(out));
      },
      py::arg("command"), py::arg("config_json") = "");

  m.def(
      "render_markdown",
      [](const std::string& command, const std::string& config_json) {
        RunConfig cfg = config_from_json(command, config_json);
        py::gil_scoped_release release;
        return render_markdown(run_command(command, cfg));
      },
      py::arg("command"), py::arg("config_json") = "");

  m.def(
      "signature_identity_holds",
      [](const std::vector<std::array<int, 3>>& nuts, const std::vector<std::array<int, 2>>& bolts,
         int e, int claimed) {
        FixedPointConfig c;
        for (const auto& n : nuts) c.nuts.push_back({n[0], n[1], n[2]});
        for (const auto& b : bolts) c.bolts.push_back({b[0], b[1]});
        c.e = e;
        return check_signature_identity(c, claimed).holds;
      },
      py::arg("nuts"), py::arg("bolts") = std::vector<std::array<int, 2>>{}, py::arg("e") = 0,
      py::arg("claimed"));

  m.def("strip_envelope", &strip_envelope);
}
