// Python bindings. Structured values cross the boundary as JSON text; the
// package wrapper turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "travelagent/agent.hpp"
#include "travelagent/analysis/sentiment.hpp"
#include "travelagent/analysis/text.hpp"
#include "travelagent/error.hpp"
#include "travelagent/scene.hpp"
#include "travelagent/sensors.hpp"
#include "travelagent/sim.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

std::string run_config(const std::string& config_json) {
  const ta::RunConfig cfg = ta::parse_run_config(json::parse(config_json));
  return ta::trace_to_string(ta::run(cfg.spec));
}

std::vector<std::string> run_matrix_config(const std::string& matrix_json, int parallelism) {
  const auto specs = ta::expand_matrix(ta::parse_matrix_config(json::parse(matrix_json)));
  const ta::MatrixResult m = [&] {
    py::gil_scoped_release release;
    return ta::run_matrix(specs, parallelism);
  }();
  std::vector<std::string> traces;
  traces.reserve(m.results.size());
  for (const auto& r : m.results) traces.push_back(ta::trace_to_string(r));
  return traces;
}

py::tuple parse_action(const std::string& text) {
  const ta::Action a = ta::parse_action(text);
  return py::make_tuple(std::string(ta::to_string(a.kind)), a.magnitude ? py::cast(*a.magnitude) : py::none());
}

py::object raycast(const std::string& scene_ref, double x, double y, double heading, double max_range) {
  const ta::Scene scene = ta::load_scene(scene_ref);
  const auto hit = ta::raycast(scene, {x, y}, ta::heading_vector(heading), max_range);
  if (!hit) return py::none();
  return py::make_tuple(std::string(ta::to_string(hit->cls)), hit->distance);
}

}  // namespace

PYBIND11_MODULE(_travelagent, m) {
  m.doc() = "TravelAgent simulation core";

  py::register_exception<ta::Error>(m, "Error");
  py::register_exception<ta::ParseError>(m, "ParseError", m.attr("Error"));
  py::register_exception<ta::ConfigError>(m, "ConfigError", m.attr("Error"));
  py::register_exception<ta::ValidationError>(m, "ValidationError", m.attr("Error"));
  py::register_exception<ta::SchemaError>(m, "SchemaError", m.attr("Error"));
  py::register_exception<ta::TraceError>(m, "TraceError", m.attr("Error"));
  py::register_exception<ta::BackendError>(m, "BackendError", m.attr("Error"));

  m.attr("prompt_version") = std::string(ta::kPromptVersion);
  m.attr("trace_schema_version") = ta::kTraceSchemaVersion;

  m.def("scene_ids", &ta::bundled_scene_ids, "Ids of the bundled scene fixtures.");
  m.def(
      "scene_json", [](const std::string& ref) { return ta::scene_to_json(ta::load_scene(ref)); },
      py::arg("ref"), "Scene document of a bundled id or file path, as JSON text.");
  m.def("raycast", &raycast, py::arg("scene"), py::arg("x"), py::arg("y"), py::arg("heading"),
        py::arg("max_range") = 100.0, "First hit along a heading as (class, distance), or None.");
  m.def(
      "compass_cue", [](double x, double y, double heading, double tx, double ty) {
        return ta::compass_cue({{x, y}, heading}, {tx, ty});
      },
      py::arg("x"), py::arg("y"), py::arg("heading"), py::arg("target_x"), py::arg("target_y"));

  m.def("parse_action", &parse_action, py::arg("text"), "Parses decide-stage text into (kind, magnitude).");
  m.def(
      "render_action",
      [](const std::string& kind, std::optional<double> magnitude) {
        const auto k = ta::parse_action_kind(kind);
        if (!k) throw ta::ParseError("unknown action kind '" + kind + "'");
        return ta::render_action({*k, magnitude});
      },
      py::arg("kind"), py::arg("magnitude") = py::none());

  m.def("run_config", &run_config, py::arg("config_json"), "Runs one simulation; returns its trace text.");
  m.def("run_matrix_config", &run_matrix_config, py::arg("matrix_json"), py::arg("parallelism") = 1,
        "Runs every simulation of a matrix; returns trace texts in spec order.");
  m.def("trace_hash", [](const std::string& text) { return ta::trace_hash(text); }, py::arg("text"));
  m.def(
      "normalize_trace", [](const std::string& text) { return ta::trace_to_string(ta::trace_from_string(text)); },
      py::arg("text"), "Parses and re-serializes a trace, validating it.");

  m.def("tokenize", &ta::analysis::tokenize, py::arg("text"));
  m.def(
      "sentiment",
      [](const std::string& text) {
        const auto l = ta::analysis::sentiment(text);
        return py::make_tuple(l.compound, std::string(ta::analysis::to_string(l.cls)));
      },
      py::arg("text"), "Compound score and class of a text.");
}
