#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fclverify/adsl.hpp"
#include "fclverify/amhost.hpp"
#include "fclverify/backend.hpp"
#include "fclverify/errors.hpp"
#include "fclverify/fcdsl.hpp"
#include "fclverify/loop.hpp"
#include "fclverify/offline.hpp"
#include "fclverify/online.hpp"
#include "fclverify/prompt.hpp"
#include "fclverify/runtime.hpp"
#include "fclverify/scenario.hpp"
#include "fclverify/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fclv::Error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fclv::Error("cannot open file for writing: " + path);
  out << content;
}

fclv::am::AmEndpoint parse_am(const std::string& text) {
  fclv::am::AmEndpoint ep;
  if (text.rfind("builtin:", 0) == 0) {
    ep.kind = fclv::am::AmEndpoint::Kind::Builtin;
    ep.builtin_name = text.substr(8);
    return ep;
  }
  if (text.rfind("cmd:", 0) == 0) {
    ep.kind = fclv::am::AmEndpoint::Kind::Subprocess;
    std::istringstream in(text.substr(4));
    std::string word;
    while (in >> word) ep.command.push_back(word);
    if (ep.command.empty()) throw fclv::Error("cmd: endpoint needs an executable");
    return ep;
  }
  throw fclv::Error("--am must be builtin:<name> or cmd:<executable and args>");
}

const fclv::scn::Scenario& need_scenario(const std::string& name) {
  const fclv::scn::Scenario* s = fclv::scn::find_scenario(name);
  if (!s) {
    std::string names;
    for (const auto* sc : fclv::scn::all_scenarios()) {
      if (!names.empty()) names += ", ";
      names += sc->name();
    }
    throw fclv::Error("unknown scenario " + name + " (available: " + names + ")");
  }
  return *s;
}

struct VerdictKey {
  int constraint_index;
  std::int64_t step;
  std::map<std::string, std::string> binding;
  auto operator<=>(const VerdictKey&) const = default;
};

std::set<VerdictKey> verdict_set(const std::vector<fclv::fcl::Violation>& vs) {
  std::set<VerdictKey> out;
  for (const auto& v : vs) out.insert({v.constraint_index, v.step, v.binding});
  return out;
}

int cmd_check(const std::string& spec_path, const std::string& constraints_path,
              const std::string& scenario_name) {
  auto spec = fclv::adsl::parse_adsl(read_file(spec_path));
  auto doc = fclv::fcl::parse_constraints(read_file(constraints_path));
  std::vector<std::string> problems = fclv::adsl::validate(spec);
  for (const auto& c : doc.constraints) {
    for (const auto& p : fclv::fcl::validate(c)) {
      problems.push_back("constraint \"" + c.description + "\": " + p);
    }
  }
  fclv::adsl::AttributeSchema schema;
  const fclv::adsl::AttributeSchema* schema_ptr = nullptr;
  if (!scenario_name.empty()) {
    schema = need_scenario(scenario_name).runtime_schema();
    schema_ptr = &schema;
  }
  auto cross = fclv::adsl::cross_validate(spec, doc, schema_ptr);
  problems.insert(problems.end(), cross.begin(), cross.end());
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "error: " << p << "\n";
    return kExitUsage;
  }
  std::cout << "ok: " << spec.components.size() << " component type(s), "
            << spec.ensembles.size() << " ensemble(s), " << spec.assignments.size()
            << " assignment(s), " << doc.constraints.size() << " constraint(s)\n";
  for (const auto& c : doc.constraints) {
    auto shape = fclv::fcl::classify(c);
    std::cout << (shape.online_ok() ? "  [online] " : "  [offline-only] ") << c.description
              << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runtime verification and vibe-coding harness for ensemble-based adaptive systems"};
  app.require_subcommand(1);
  std::function<int()> action;

  // check
  {
    auto* cmd = app.add_subcommand("check", "Parse and validate a spec and a constraint file");
    auto spec = std::make_shared<std::string>();
    auto constraints = std::make_shared<std::string>();
    auto scenario = std::make_shared<std::string>();
    cmd->add_option("spec", *spec, "architecture specification (.adsl)")->required();
    cmd->add_option("constraints", *constraints, "functional constraints (.fcl)")->required();
    cmd->add_option("--scenario", *scenario, "include this scenario's runtime attribute schema");
    cmd->callback([=, &action] {
      action = [=] { return cmd_check(*spec, *constraints, *scenario); };
    });
  }

  // simulate
  {
    auto* cmd = app.add_subcommand("simulate", "Run one adaptation loop and record the trace");
    auto scenario = std::make_shared<std::string>();
    auto am = std::make_shared<std::string>("builtin:dragon_baseline");
    auto state = std::make_shared<std::string>();
    auto seed = std::make_shared<std::int64_t>(-1);
    auto horizon = std::make_shared<std::int64_t>(0);
    auto trace_out = std::make_shared<std::string>();
    auto report_out = std::make_shared<std::string>();
    auto constraints_path = std::make_shared<std::string>();
    cmd->add_option("--scenario", *scenario, "dragon or farm")->required();
    cmd->add_option("--am", *am, "builtin:<name> or cmd:<executable>");
    cmd->add_option("--initial-state", *state, "initial state name (default: first)");
    cmd->add_option("--seed", *seed, "override the state's random seed");
    cmd->add_option("--horizon", *horizon, "adaptation steps (default: scenario)");
    cmd->add_option("--trace", *trace_out, "write the trace here");
    cmd->add_option("--report", *report_out, "write the violation report here");
    cmd->add_option("--constraints", *constraints_path, "constraint file (default: shipped)");
    cmd->callback([=, &action] {
      action = [=] {
        const auto& sc = need_scenario(*scenario);
        fclv::adsl::InitialState init;
        if (state->empty()) {
          if (sc.spec().initial_states.empty()) throw fclv::Error("scenario has no initial states");
          init = sc.spec().initial_states.front();
        } else if (const auto* found = sc.spec().find_initial_state(*state)) {
          init = *found;
        } else {
          throw fclv::Error("unknown initial state \"" + *state + "\"");
        }
        if (*seed >= 0) init.random_seed = *seed;
        fclv::fcl::ConstraintDocument doc = constraints_path->empty()
                                                ? sc.constraints()
                                                : fclv::fcl::parse_constraints(
                                                      read_file(*constraints_path));
        const std::int64_t steps = *horizon > 0 ? *horizon : sc.default_horizon();
        auto result = fclv::cas::run(sc, parse_am(*am), init, doc, steps);
        if (!trace_out->empty()) fclv::fcl::save_trace(*trace_out, result.trace);
        if (!report_out->empty()) {
          fclv::cas::ViolationReport report;
          report.runs.push_back({result.initial_state, result.metrics, result.trace.length(),
                                 result.stopped_on_generic});
          report.violations = result.violations;
          report.notes = result.notes;
          fclv::cas::save_report(*report_out, report);
        }
        std::cout << "trace length " << result.trace.length() << ", violations "
                  << result.violations.size();
        for (const auto& [k, v] : result.metrics) std::cout << ", " << k << "=" << v;
        std::cout << "\n";
        for (const auto& v : result.violations) std::cout << "- " << v.constraint << ": " << v.detail << "\n";
        return result.violations.empty() ? kExitOk : kExitViolations;
      };
    });
  }

  // verify
  {
    auto* cmd = app.add_subcommand("verify", "Check a recorded trace against constraints");
    auto trace_path = std::make_shared<std::string>();
    auto constraints_path = std::make_shared<std::string>();
    auto online = std::make_shared<bool>(false);
    auto offline = std::make_shared<bool>(false);
    auto both = std::make_shared<bool>(false);
    auto no_dedup = std::make_shared<bool>(false);
    auto records = std::make_shared<std::string>("text");
    cmd->add_option("--trace", *trace_path)->required();
    cmd->add_option("--constraints", *constraints_path)->required();
    cmd->add_flag("--online", *online, "online monitor only");
    cmd->add_flag("--offline", *offline, "offline oracle only");
    cmd->add_flag("--both", *both, "run both and compare verdicts");
    cmd->add_flag("--no-dedup", *no_dedup, "keep every violation, not the earliest per binding");
    cmd->add_option("--format", *records, "text or records");
    cmd->callback([=, &action] {
      action = [=] {
        auto trace = fclv::fcl::load_trace(*trace_path);
        auto doc = fclv::fcl::parse_constraints(read_file(*constraints_path));
        const bool run_online = *online || *both || (!*offline && !*online);
        const bool run_offline = *offline || *both;

        std::vector<fclv::fcl::Violation> online_vs;
        std::vector<fclv::fcl::Violation> offline_vs;
        if (run_online) {
          fclv::fcl::Monitor monitor(doc, fclv::fcl::MonitorOptions{.trusted_length = true});
          for (const auto& s : trace.snapshots) {
            auto vs = monitor.step(s, trace.length());
            online_vs.insert(online_vs.end(), vs.begin(), vs.end());
          }
          auto vs = monitor.finish();
          online_vs.insert(online_vs.end(), vs.begin(), vs.end());
          if (!*no_dedup) online_vs = fclv::fcl::dedup_violations(std::move(online_vs));
        }
        if (run_offline) {
          for (std::size_t k = 0; k < doc.constraints.size(); ++k) {
            auto vs = fclv::fcl::offline_violations(doc.constraints[k], trace,
                                                    static_cast<int>(k));
            offline_vs.insert(offline_vs.end(), vs.begin(), vs.end());
          }
          std::stable_sort(offline_vs.begin(), offline_vs.end(), fclv::fcl::report_less);
        }
        if (*both) {
          auto a = verdict_set(fclv::fcl::dedup_violations(online_vs));
          auto b = verdict_set(fclv::fcl::dedup_violations(offline_vs));
          if (a != b) {
            std::cerr << "oracle divergence: online found " << a.size() << " verdict(s), offline "
                      << b.size() << "\n";
            return kExitDivergence;
          }
          std::cout << "oracle agreement (" << a.size() << " violated check(s))\n";
        }
        const auto& vs = run_online ? online_vs : offline_vs;
        if (*records == "records") {
          for (const auto& v : vs) std::cout << fclv::fcl::violation_to_record(v) << "\n";
        } else {
          std::cout << fclv::fcl::render_violations_text(vs);
        }
        return vs.empty() ? kExitOk : kExitViolations;
      };
    });
  }

  // prompt
  {
    auto* cmd = app.add_subcommand("prompt", "Render the generation prompt");
    auto spec_path = std::make_shared<std::string>();
    auto domain_path = std::make_shared<std::string>();
    auto constraints_path = std::make_shared<std::string>();
    auto variant = std::make_shared<std::string>("with-constraints");
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--spec", *spec_path)->required();
    cmd->add_option("--domain", *domain_path)->required();
    cmd->add_option("--constraints", *constraints_path);
    cmd->add_option("--variant", *variant, "with-constraints or without-constraints");
    cmd->add_option("--out", *out_path, "write the prompt here instead of stdout");
    cmd->callback([=, &action] {
      action = [=] {
        auto spec = fclv::adsl::parse_adsl(read_file(*spec_path));
        fclv::fcl::ConstraintDocument doc;
        if (!constraints_path->empty()) {
          doc = fclv::fcl::parse_constraints(read_file(*constraints_path));
        }
        auto bundle = fclv::gen::generate_prompt(spec, read_file(*domain_path), doc,
                                                 fclv::gen::variant_from_string(*variant));
        for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
        if (out_path->empty()) {
          std::cout << bundle.rendered;
        } else {
          write_file(*out_path, bundle.rendered);
        }
        return kExitOk;
      };
    });
  }

  // loop
  {
    auto* cmd = app.add_subcommand("loop", "Run the generation-verification feedback loop");
    auto scenario = std::make_shared<std::string>();
    auto backend = std::make_shared<std::string>();
    auto mode = std::make_shared<std::string>("generic+functional");
    auto variant = std::make_shared<std::string>("with-constraints");
    auto max_iter = std::make_shared<int>(10);
    auto workdir = std::make_shared<std::string>("loop-work");
    auto fresh = std::make_shared<bool>(false);
    auto model = std::make_shared<std::string>("gpt-5-nano-2025-08-07");
    auto base_url = std::make_shared<std::string>("https://api.openai.com/v1");
    auto key_env = std::make_shared<std::string>("OPENAI_API_KEY");
    cmd->add_option("--scenario", *scenario)->required();
    cmd->add_option("--backend", *backend, "mock:<fixture-dir> or http")->required();
    cmd->add_option("--mode", *mode, "generic+functional, generic-only or metrics");
    cmd->add_option("--variant", *variant, "with-constraints or without-constraints");
    cmd->add_option("--max-iter", *max_iter);
    cmd->add_option("--workdir", *workdir);
    cmd->add_flag("--fresh-start", *fresh, "restart the conversation after stagnation");
    cmd->add_option("--model", *model);
    cmd->add_option("--base-url", *base_url);
    cmd->add_option("--api-key-env", *key_env);
    cmd->callback([=, &action] {
      action = [=] {
        fclv::gen::LoopConfig config;
        const auto& sc = need_scenario(*scenario);
        config.scenario = &sc;
        config.mode = fclv::gen::mode_from_string(*mode);
        config.variant = fclv::gen::variant_from_string(*variant);
        config.max_iterations = *max_iter;
        config.workdir = *workdir;
        config.fresh_start_on_stagnation = *fresh;
        std::unique_ptr<fclv::gen::GenBackend> gen;
        if (backend->rfind("mock:", 0) == 0) {
          gen = std::make_unique<fclv::gen::MockBackend>(backend->substr(5));
        } else if (*backend == "http") {
          fclv::gen::HttpChatConfig http;
          http.base_url = *base_url;
          http.model = *model;
          http.api_key_env = *key_env;
          gen = std::make_unique<fclv::gen::HttpChatBackend>(http);
        } else {
          throw fclv::Error("--backend must be mock:<dir> or http");
        }
        auto result = fclv::gen::run_loop(config, *gen);
        std::cout << "iterations " << result.iterations << ", valid "
                  << (result.valid ? "true" : "false");
        if (!result.abort_reason.empty()) std::cout << ", aborted (" << result.abort_reason << ")";
        if (result.stagnation) std::cout << ", stagnation detected";
        std::cout << "\n";
        for (const auto& it : result.per_iteration) {
          std::cout << "  iteration " << it.index << ": response " << it.response_digest << ", "
                    << (it.valid ? "valid" : std::to_string(it.violation_count) + " violation(s)")
                    << "\n";
        }
        return result.valid ? kExitOk : kExitViolations;
      };
    });
  }

  // experiment
  {
    auto* cmd = app.add_subcommand("experiment", "Run the modes x variants experiment matrix");
    auto scenario = std::make_shared<std::string>();
    auto backend = std::make_shared<std::string>();
    auto repeats = std::make_shared<int>(10);
    auto max_iter = std::make_shared<int>(10);
    auto out_path = std::make_shared<std::string>();
    auto workdir = std::make_shared<std::string>("experiment-work");
    auto jobs = std::make_shared<int>(1);
    cmd->add_option("--scenario", *scenario)->required();
    cmd->add_option("--backend", *backend, "mock:<fixture-dir>")->required();
    cmd->add_option("--repeats", *repeats);
    cmd->add_option("--max-iter", *max_iter);
    cmd->add_option("--out", *out_path, "write the result table here")->required();
    cmd->add_option("--workdir", *workdir);
    cmd->add_option("--jobs", *jobs, "parallel cells");
    cmd->callback([=, &action] {
      action = [=] {
        if (backend->rfind("mock:", 0) != 0) {
          throw fclv::Error("experiment currently runs against mock:<dir> backends");
        }
        const std::string fixture = backend->substr(5);
        fclv::gen::LoopConfig base;
        const auto& sc = need_scenario(*scenario);
        base.scenario = &sc;
        base.max_iterations = *max_iter;
        base.workdir = *workdir;
        auto rows = fclv::gen::run_experiment(
            base,
            {fclv::gen::FeedbackMode::GenericAndFunctional, fclv::gen::FeedbackMode::GenericOnly,
             fclv::gen::FeedbackMode::MetricsBaseline},
            {fclv::gen::PromptVariant::WithConstraints,
             fclv::gen::PromptVariant::WithoutConstraints},
            *repeats, [&] { return std::make_unique<fclv::gen::MockBackend>(fixture); }, *jobs);
        write_file(*out_path, fclv::gen::experiment_table(rows));
        std::cout << fclv::gen::experiment_histogram(rows, *max_iter);
        return kExitOk;
      };
    });
  }

  // report
  {
    auto* cmd = app.add_subcommand("report", "Render a violation report");
    auto in_path = std::make_shared<std::string>();
    auto render = std::make_shared<std::string>("text");
    cmd->add_option("--in", *in_path)->required();
    cmd->add_option("--render", *render, "text or feedback:<mode>");
    cmd->callback([=, &action] {
      action = [=] {
        auto report = fclv::cas::load_report(*in_path);
        if (*render == "text") {
          std::cout << fclv::cas::report_to_text(report);
        } else if (render->rfind("feedback:", 0) == 0) {
          std::cout << fclv::gen::format_feedback(report,
                                                  fclv::gen::mode_from_string(render->substr(9)));
        } else {
          throw fclv::Error("--render must be text or feedback:<mode>");
        }
        return kExitOk;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    return action ? action() : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
