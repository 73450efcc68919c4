#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fclverify/adsl.hpp"
#include "fclverify/amhost.hpp"
#include "fclverify/analysis.hpp"
#include "fclverify/fcdsl.hpp"
#include "fclverify/loop.hpp"
#include "fclverify/offline.hpp"
#include "fclverify/online.hpp"
#include "fclverify/prompt.hpp"
#include "fclverify/runtime.hpp"
#include "fclverify/scenario.hpp"
#include "fclverify/trace.hpp"

namespace py = pybind11;
using namespace fclv;

namespace {

py::dict violation_to_dict(const fcl::Violation& v) {
  py::dict d;
  d["constraint"] = v.constraint;
  d["kind"] = v.kind == fcl::Violation::Kind::Generic ? "generic" : "functional";
  d["step"] = v.step;
  d["binding"] = v.binding;
  d["detail"] = v.detail;
  d["subformula"] = v.subformula;
  d["observed_true"] = v.observed_true;
  d["observed_false"] = v.observed_false;
  d["required"] = v.required;
  d["window"] = v.window;
  d["constraint_index"] = v.constraint_index;
  d["initial_state"] = v.initial_state;
  return d;
}

py::list violations_to_list(const std::vector<fcl::Violation>& vs) {
  py::list out;
  for (const auto& v : vs) out.append(violation_to_dict(v));
  return out;
}

fcl::Trace trace_from_records(const std::string& text) {
  std::istringstream in(text);
  return fcl::read_trace(in);
}

std::string trace_to_records(const fcl::Trace& t) {
  std::ostringstream out;
  fcl::write_trace(out, t);
  return out.str();
}

std::vector<fcl::Violation> offline_all(const fcl::ConstraintDocument& doc,
                                        const fcl::Trace& trace) {
  std::vector<fcl::Violation> out;
  for (std::size_t k = 0; k < doc.constraints.size(); ++k) {
    auto vs = fcl::offline_violations(doc.constraints[k], trace, static_cast<int>(k));
    out.insert(out.end(), vs.begin(), vs.end());
  }
  std::stable_sort(out.begin(), out.end(), fcl::report_less);
  return out;
}

std::vector<fcl::Violation> online_all(const fcl::ConstraintDocument& doc,
                                       const fcl::Trace& trace) {
  fcl::Monitor monitor(doc, fcl::MonitorOptions{.trusted_length = true});
  std::vector<fcl::Violation> out;
  for (const auto& s : trace.snapshots) {
    auto vs = monitor.step(s, trace.length());
    out.insert(out.end(), vs.begin(), vs.end());
  }
  auto vs = monitor.finish();
  out.insert(out.end(), vs.begin(), vs.end());
  std::stable_sort(out.begin(), out.end(), fcl::report_less);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Runtime verification engine for functional constraints over ensemble-based "
            "adaptive systems";

  py::register_exception<Error>(m, "FclvError");

  py::class_<fcl::ConstraintDocument>(m, "ConstraintDocument")
      .def_property_readonly("descriptions",
                             [](const fcl::ConstraintDocument& doc) {
                               std::vector<std::string> out;
                               for (const auto& c : doc.constraints) out.push_back(c.description);
                               return out;
                             })
      .def("__len__",
           [](const fcl::ConstraintDocument& doc) { return doc.constraints.size(); })
      .def("render", [](const fcl::ConstraintDocument& doc) { return fcl::render(doc); })
      .def("online_checkable", [](const fcl::ConstraintDocument& doc) {
        std::vector<bool> out;
        for (const auto& c : doc.constraints) out.push_back(fcl::classify(c).online_ok());
        return out;
      });

  py::class_<adsl::ArchitectureSpec>(m, "ArchitectureSpec")
      .def_property_readonly("component_types",
                             [](const adsl::ArchitectureSpec& s) {
                               std::vector<std::string> out;
                               for (const auto& c : s.components) out.push_back(c.name);
                               return out;
                             })
      .def_property_readonly("ensembles",
                             [](const adsl::ArchitectureSpec& s) {
                               std::vector<std::string> out;
                               for (const auto& e : s.ensembles) out.push_back(e.id);
                               return out;
                             })
      .def_property_readonly("methods",
                             [](const adsl::ArchitectureSpec& s) {
                               std::vector<std::string> out;
                               for (const auto& a : s.assignments) out.push_back(a.method);
                               return out;
                             })
      .def_property_readonly("initial_states",
                             [](const adsl::ArchitectureSpec& s) {
                               std::vector<std::string> out;
                               for (const auto& st : s.initial_states) out.push_back(st.name);
                               return out;
                             })
      .def_property_readonly("strategy",
                             [](const adsl::ArchitectureSpec& s) { return s.strategy; })
      .def("render", [](const adsl::ArchitectureSpec& s) { return adsl::render(s); });

  py::class_<fcl::Trace>(m, "Trace")
      .def_static("from_records", &trace_from_records)
      .def("__len__", [](const fcl::Trace& t) { return t.snapshots.size(); })
      .def("to_records", &trace_to_records);

  py::class_<fcl::Monitor>(m, "Monitor")
      .def(py::init([](const fcl::ConstraintDocument& doc, bool trusted_length) {
             return fcl::Monitor(doc, fcl::MonitorOptions{.trusted_length = trusted_length});
           }),
           py::arg("constraints"), py::arg("trusted_length") = false)
      .def(
          "step",
          [](fcl::Monitor& monitor, const std::string& record, py::object known_length) {
            std::optional<std::int64_t> length;
            if (!known_length.is_none()) length = known_length.cast<std::int64_t>();
            return violations_to_list(monitor.step(fcl::snapshot_from_record(record), length));
          },
          py::arg("snapshot_record"), py::arg("known_length") = py::none())
      .def("finish", [](fcl::Monitor& monitor) { return violations_to_list(monitor.finish()); })
      .def_property_readonly("finished", &fcl::Monitor::finished)
      .def_property_readonly("notes", &fcl::Monitor::notes);

  m.def("parse_constraints", &fcl::parse_constraints, py::arg("text"));
  m.def("parse_adsl", &adsl::parse_adsl, py::arg("text"));
  m.def(
      "verify_offline",
      [](const fcl::ConstraintDocument& doc, const fcl::Trace& t) {
        return violations_to_list(offline_all(doc, t));
      },
      py::arg("constraints"), py::arg("trace"));
  m.def(
      "verify_online",
      [](const fcl::ConstraintDocument& doc, const fcl::Trace& t) {
        return violations_to_list(online_all(doc, t));
      },
      py::arg("constraints"), py::arg("trace"));
  m.def("scenarios", [] {
    std::vector<std::string> out;
    for (const auto* s : scn::all_scenarios()) out.push_back(s->name());
    return out;
  });
  m.def("builtin_managers", [] {
    (void)scn::all_scenarios();
    return am::builtin_names();
  });
  m.def(
      "scenario_spec",
      [](const std::string& name) {
        const auto* s = scn::find_scenario(name);
        if (!s) throw Error("unknown scenario: " + name);
        return s->spec();
      },
      py::arg("scenario"));
  m.def(
      "scenario_constraints",
      [](const std::string& name) {
        const auto* s = scn::find_scenario(name);
        if (!s) throw Error("unknown scenario: " + name);
        return s->constraints();
      },
      py::arg("scenario"));
  m.def(
      "simulate",
      [](const std::string& scenario, const std::string& am_name, const std::string& state_name,
         std::int64_t seed, std::int64_t horizon) {
        const auto* sc = scn::find_scenario(scenario);
        if (!sc) throw Error("unknown scenario: " + scenario);
        adsl::InitialState init;
        if (state_name.empty()) {
          if (sc->spec().initial_states.empty()) throw Error("scenario has no initial states");
          init = sc->spec().initial_states.front();
        } else if (const auto* found = sc->spec().find_initial_state(state_name)) {
          init = *found;
        } else {
          throw Error("unknown initial state: " + state_name);
        }
        if (seed >= 0) init.random_seed = seed;
        am::AmEndpoint ep;
        ep.builtin_name = am_name;
        auto result = cas::run(*sc, ep, init, sc->constraints(),
                               horizon > 0 ? horizon : sc->default_horizon());
        py::dict out;
        out["trace_records"] = trace_to_records(result.trace);
        out["violations"] = violations_to_list(result.violations);
        out["metrics"] = result.metrics;
        out["notes"] = result.notes;
        out["stopped_on_generic"] = result.stopped_on_generic;
        return out;
      },
      py::arg("scenario"), py::arg("builtin_am"), py::arg("initial_state") = std::string{},
      py::arg("seed") = -1, py::arg("horizon") = 0);
  m.def(
      "generate_prompt",
      [](const adsl::ArchitectureSpec& spec, const std::string& domain,
         const fcl::ConstraintDocument& doc, const std::string& variant) {
        return gen::generate_prompt(spec, domain, doc, gen::variant_from_string(variant)).rendered;
      },
      py::arg("spec"), py::arg("domain_text"), py::arg("constraints"),
      py::arg("variant") = "with-constraints");
}
