#include "fclverify/runtime.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fclverify/errors.hpp"
#include "fclverify/offline.hpp"

namespace fclv::cas {

using nlohmann::json;

std::vector<fcl::Violation> check_generic(const adsl::ArchitectureSpec& spec,
                                          const adsl::Assignment& assignment,
                                          const std::vector<std::string>& view_ids,
                                          const am::AssignResponse& response, std::int64_t step) {
  std::vector<fcl::Violation> out;
  auto add = [&](const char* rule, std::string detail) {
    fcl::Violation v;
    v.kind = fcl::Violation::Kind::Generic;
    v.constraint = rule;
    v.step = step;
    v.detail = std::move(detail);
    out.push_back(std::move(v));
  };

  if (response.error) {
    std::string detail = "in " + assignment.method + ": " + response.error->message;
    if (!response.error->traceback.empty()) detail += "\n" + response.error->traceback;
    add(kRuleRuntimeException, std::move(detail));
    return out;
  }

  std::set<std::string> legal_groups;
  for (const auto& eid : assignment.ensembles) {
    if (const auto* e = spec.find_ensemble(eid)) legal_groups.insert(e->name);
  }
  std::set<std::string> view(view_ids.begin(), view_ids.end());
  std::map<std::string, std::set<std::string>> groups_of;  // component -> distinct groups
  for (const auto& [cid, gid] : response.assignments) {
    if (!legal_groups.count(gid)) {
      add(kRuleOnlyAppropriate, "in " + assignment.method + ": component " + cid +
                                    " assigned to group \"" + gid +
                                    "\" which is not among this assignment's groups");
      continue;
    }
    if (!view.count(cid)) {
      add(kRuleExactlyOne, "in " + assignment.method + ": assignment references component " + cid +
                               " which is not part of this view");
      continue;
    }
    groups_of[cid].insert(gid);
  }
  for (const auto& [cid, gids] : groups_of) {
    if (gids.size() > 1) {
      std::string list;
      for (const auto& g : gids) {
        if (!list.empty()) list += ", ";
        list += "\"" + g + "\"";
      }
      add(kRuleExactlyOne,
          "in " + assignment.method + ": component " + cid + " assigned to " +
              std::to_string(gids.size()) + " groups (" + list + ")");
    }
  }
  for (const auto& cid : view_ids) {
    if (!groups_of.count(cid)) {
      add(kRuleExactlyOne,
          "in " + assignment.method + ": component " + cid + " was not assigned to any group");
    }
  }
  return out;
}

namespace {

std::vector<std::string> filter_view(const adsl::ArchitectureSpec& spec,
                                     const adsl::Assignment& assignment, const fcl::Snapshot& s) {
  std::set<std::string> accessors;
  for (const auto& bc : spec.beyond_control) accessors.insert(bc.accessor);
  std::vector<std::string> ids;
  for (const auto& [id, comp] : s.components) {
    if (comp.type != assignment.component_type || accessors.count(id)) continue;
    if (assignment.filter) {
      fcl::StateContext ctx;
      ctx.step = s.step;
      ctx.length = s.step + 1;
      ctx.vars[adsl::kFilterVar] = fcl::ComponentRef{id};
      if (!fcl::eval_state(*assignment.filter, s, ctx)) continue;
    }
    ids.push_back(id);
  }
  return ids;
}

fcl::AttrMap declared_attrs(const adsl::ArchitectureSpec& spec, const std::string& type,
                            const fcl::AttrMap& attrs) {
  const adsl::ComponentDecl* decl = spec.find_component(type);
  if (!decl) return attrs;
  fcl::AttrMap out;
  for (const auto& a : decl->attributes) {
    auto it = attrs.find(a.id);
    if (it != attrs.end()) out.emplace(it->first, it->second);
  }
  return out;
}

}  // namespace

RunResult run(const scn::Scenario& scenario, const am::AmEndpoint& endpoint,
              const adsl::InitialState& initial, const fcl::ConstraintDocument& constraints,
              std::int64_t horizon) {
  if (horizon < 1) throw Error("horizon must be at least 1");
  auto param_problems = scenario.validate_params(initial);
  if (!param_problems.empty()) throw Error(param_problems.front());

  const adsl::ArchitectureSpec& spec = scenario.spec();
  RunResult result;
  result.initial_state = initial.name;

  auto run_state = scenario.start(initial);
  fcl::Monitor monitor(constraints);
  auto session = am::open_session(endpoint);

  std::map<std::string, std::set<std::string>> empty_update;
  fcl::Snapshot s0 = run_state->snapshot(0, empty_update);
  result.trace.snapshots.push_back(s0);
  auto push = [&](std::vector<fcl::Violation> vs) {
    for (auto& v : vs) {
      v.initial_state = initial.name;
      result.violations.push_back(std::move(v));
    }
  };
  push(monitor.step(s0, horizon + 1));

  std::int64_t step = 0;
  for (step = 1; step <= horizon && !run_state->terminal(); ++step) {
    const fcl::Snapshot& cur = result.trace.snapshots.back();
    std::map<std::string, std::set<std::string>> update;
    std::vector<fcl::Violation> generic;

    for (const auto& assignment : spec.assignments) {
      std::vector<std::string> view = filter_view(spec, assignment, cur);
      am::AssignRequest req;
      req.method = assignment.method;
      req.step = step;
      for (const auto& id : view) {
        req.components.emplace_back(id,
                                    declared_attrs(spec, assignment.component_type,
                                                   cur.components.at(id).attrs));
      }
      req.beyond_control = cur.beyond_control;
      for (const auto& eid : assignment.ensembles) {
        if (const auto* e = spec.find_ensemble(eid)) req.group_ids.push_back(e->name);
      }
      am::AssignResponse resp = session->invoke(req);
      auto problems = check_generic(spec, assignment, view, resp, step);
      if (!problems.empty()) {
        generic.insert(generic.end(), problems.begin(), problems.end());
        continue;
      }
      for (const auto& [cid, gid] : resp.assignments) {
        if (auto eid = spec.ensemble_for_group(assignment, gid)) update[*eid].insert(cid);
      }
    }

    if (!generic.empty()) {
      // the run is stopped; the trace ends before this step's update
      push(std::move(generic));
      result.stopped_on_generic = true;
      --step;
      break;
    }

    run_state->apply(update, step);
    fcl::Snapshot snap = run_state->snapshot(step, update);
    result.trace.snapshots.push_back(snap);
    push(monitor.step(snap));
  }
  if (step > horizon) step = horizon;

  push(monitor.finish());
  result.notes = monitor.notes();
  result.metrics = run_state->metrics(result.trace.snapshots.back().step);
  std::stable_sort(result.violations.begin(), result.violations.end(), fcl::report_less);
  return result;
}

ViolationReport run_batch(const scn::Scenario& scenario, const am::AmEndpoint& endpoint,
                          const std::vector<adsl::InitialState>& initial_states,
                          const fcl::ConstraintDocument& constraints, std::int64_t horizon,
                          bool dedup) {
  ViolationReport report;
  for (const auto& state : initial_states) {
    RunResult r = run(scenario, endpoint, state, constraints, horizon);
    RunSummary summary;
    summary.initial_state = state.name;
    summary.metrics = r.metrics;
    summary.trace_length = r.trace.length();
    summary.stopped_on_generic = r.stopped_on_generic;
    report.runs.push_back(std::move(summary));
    report.violations.insert(report.violations.end(), r.violations.begin(), r.violations.end());
    report.notes.insert(report.notes.end(), r.notes.begin(), r.notes.end());
  }
  if (dedup) report.violations = fcl::dedup_violations(std::move(report.violations));
  std::stable_sort(report.violations.begin(), report.violations.end(), fcl::report_less);
  return report;
}

void write_report(std::ostream& out, const ViolationReport& report) {
  json header;
  header["type"] = "report";
  json runs = json::array();
  for (const auto& r : report.runs) {
    runs.push_back(json{{"initial_state", r.initial_state},
                        {"metrics", r.metrics},
                        {"trace_length", r.trace_length},
                        {"stopped_on_generic", r.stopped_on_generic}});
  }
  header["runs"] = runs;
  header["notes"] = report.notes;
  out << header.dump() << "\n";
  for (const auto& v : report.violations) out << fcl::violation_to_record(v) << "\n";
}

ViolationReport read_report(std::istream& in) {
  ViolationReport report;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!have_header) {
      json j = json::parse(line);
      if (j.value("type", std::string{}) != "report") throw Error("missing report header");
      for (const auto& r : j.at("runs")) {
        RunSummary s;
        s.initial_state = r.at("initial_state").get<std::string>();
        for (const auto& [k, val] : r.at("metrics").items()) s.metrics[k] = val.get<double>();
        s.trace_length = r.value("trace_length", std::int64_t{0});
        s.stopped_on_generic = r.value("stopped_on_generic", false);
        report.runs.push_back(std::move(s));
      }
      if (j.contains("notes")) {
        for (const auto& n : j["notes"]) report.notes.push_back(n.get<std::string>());
      }
      have_header = true;
      continue;
    }
    report.violations.push_back(fcl::violation_from_record(line));
  }
  if (!have_header) throw Error("empty report file");
  return report;
}

void save_report(const std::string& path, const ViolationReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open report file for writing: " + path);
  write_report(out, report);
}

ViolationReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open report file: " + path);
  return read_report(in);
}

std::string report_to_text(const ViolationReport& report) {
  std::ostringstream out;
  for (const auto& r : report.runs) {
    out << "run \"" << r.initial_state << "\": trace length " << r.trace_length;
    if (r.stopped_on_generic) out << " (stopped on a generic violation)";
    for (const auto& [k, v] : r.metrics) out << ", " << k << "=" << v;
    out << "\n";
  }
  if (report.violations.empty()) {
    out << "no violations\n";
  } else {
    out << fcl::render_violations_text(report.violations);
  }
  return out.str();
}

}  // namespace fclv::cas
