// Python bindings: scenario parsing, config, running and the pure helpers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "layersim/detector.hpp"
#include "layersim/fusion.hpp"
#include "layersim/harness.hpp"

namespace py = pybind11;
using namespace layersim;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic layered intrusion-detection simulator";

  auto sim_error = py::register_exception<SimError>(m, "SimError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  (void)sim_error;

  py::class_<SimEvent>(m, "Event")
      .def_property_readonly("at", &SimEvent::at)
      .def_property_readonly("source", &SimEvent::source)
      .def_property_readonly("kind", &SimEvent::kind)
      .def_property_readonly("detail", &SimEvent::detail)
      .def("__repr__", [](const SimEvent& e) {
        return "Event(" + std::to_string(e.at()) + ", '" + e.source() + "', '" + e.kind() + "', '" + e.detail() +
               "')";
      });

  py::class_<HarnessConfig>(m, "Config")
      .def(py::init<>())
      .def_property_readonly("digest", [](const HarnessConfig& c) { return config_digest(c); })
      .def("__str__", [](const HarnessConfig& c) { return format_config(c); });

  m.def("parse_config", [](std::string_view text) { return parse_config(text); }, py::arg("text"));
  m.def("load_config", [](const std::filesystem::path& p) { return load_config_file(p); }, py::arg("path"));
  m.def("format_config", &format_config, py::arg("config"));

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("end_ms", &Scenario::end_ms)
      .def("__len__", [](const Scenario& s) { return s.stimuli.size(); })
      .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; })
      .def("__str__", [](const Scenario& s) { return format_scenario(s); });

  m.def("parse_scenario", [](std::string_view text) { return parse_scenario(text); }, py::arg("text"));
  m.def("format_scenario", &format_scenario, py::arg("scenario"));

  py::class_<Report>(m, "Report")
      .def_readonly("scenario", &Report::scenario)
      .def_readonly("config_digest", &Report::config_digest)
      .def_readonly("events", &Report::events)
      .def_readonly("counts", &Report::counts)
      .def_readonly("alarm_latched", &Report::alarm_latched)
      .def("__str__", [](const Report& r) { return format_report(r); });

  m.def(
      "run_scenario",
      [](const Scenario& s, const std::optional<HarnessConfig>& cfg) { return run_scenario(s, cfg.value_or(HarnessConfig{})); },
      py::arg("scenario"), py::arg("config") = py::none());
  m.def("audit_text", &audit_text, py::arg("report"));
  m.def("write_audit", &write_audit, py::arg("report"), py::arg("path"));

  m.def(
      "gate",
      [](bool mat_stop, bool ac_alarm, bool armed) {
        return is_high(gate(FusionInputs{to_level(mat_stop), to_level(ac_alarm), armed}));
      },
      py::arg("mat_stop"), py::arg("ac_alarm"), py::arg("armed"));

  // Samples as (ms, level) pairs.
  m.def(
      "debounce",
      [](const std::vector<std::pair<SimTime, bool>>& raw, SimTime stable_ms) {
        std::vector<Sample> samples;
        for (auto [at, high] : raw) samples.push_back({at, to_level(high)});
        std::vector<std::pair<SimTime, bool>> out;
        for (const auto& s : debounce(samples, DebounceConfig{stable_ms})) out.emplace_back(s.at, is_high(s.level));
        return out;
      },
      py::arg("samples"), py::arg("stable_ms") = 20);

  m.def(
      "coupling_signal",
      [](double mass_g, double distance_cm, double k, double min_distance_cm) {
        DetectorConfig cfg;
        cfg.coupling_k = k;
        cfg.min_distance_cm = min_distance_cm;
        return coupling_signal(MetalTarget{mass_g, distance_cm}, cfg);
      },
      py::arg("mass_g"), py::arg("distance_cm"), py::arg("k") = 1.0, py::arg("min_distance_cm") = 1.0);
}
