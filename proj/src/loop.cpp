#include "fclverify/loop.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "fclverify/amhost.hpp"
#include "fclverify/errors.hpp"

namespace fclv::gen {

const char* to_string(FeedbackMode m) {
  switch (m) {
    case FeedbackMode::GenericAndFunctional: return "generic+functional";
    case FeedbackMode::GenericOnly: return "generic-only";
    default: return "metrics";
  }
}

FeedbackMode mode_from_string(const std::string& s) {
  if (s == "generic+functional" || s == "full") return FeedbackMode::GenericAndFunctional;
  if (s == "generic-only" || s == "generic") return FeedbackMode::GenericOnly;
  if (s == "metrics" || s == "metrics-baseline") return FeedbackMode::MetricsBaseline;
  throw Error("unknown feedback mode: " + s);
}

std::string fnv1a_digest(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string metrics_feedback(const cas::ViolationReport& report) {
  std::ostringstream out;
  bool any_win_metric = false;
  double wins = 0;
  double win_steps = 0;
  double win_count = 0;
  bool any_damage = false;
  double damage_sum = 0;
  for (const auto& r : report.runs) {
    if (auto it = r.metrics.find("win"); it != r.metrics.end()) {
      any_win_metric = true;
      wins += it->second;
      if (it->second > 0) {
        ++win_count;
        if (auto s = r.metrics.find("steps_to_win"); s != r.metrics.end()) win_steps += s->second;
      }
    }
    if (auto it = r.metrics.find("damage_rate"); it != r.metrics.end()) {
      any_damage = true;
      damage_sum += it->second;
    }
  }
  const double n = static_cast<double>(report.runs.size());
  if (any_win_metric && n > 0) {
    out << "win rate: " << static_cast<int>(std::llround(wins / n * 100.0)) << "%\n";
    if (win_count > 0) {
      out << "average steps to win: " << win_steps / win_count << "\n";
    } else {
      out << "number of steps to win: -\n";
    }
  }
  if (any_damage && n > 0) {
    out << "damage rate: " << damage_sum / n << "%\n";
  }
  for (const auto& r : report.runs) {
    out << "run \"" << r.initial_state << "\":";
    for (const auto& [k, v] : r.metrics) out << " " << k << "=" << v;
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::string format_feedback(const cas::ViolationReport& report, FeedbackMode mode) {
  std::ostringstream out;
  if (mode == FeedbackMode::MetricsBaseline) {
    out << "The adaptation manager was tested by running the system. Results:\n";
    out << metrics_feedback(report);
    out << "\nFix the adaptation manager. Provide the complete updated code.\n";
    return out.str();
  }
  std::vector<fcl::Violation> shown;
  for (const auto& v : report.violations) {
    if (mode == FeedbackMode::GenericOnly && v.kind != fcl::Violation::Kind::Generic) continue;
    shown.push_back(v);
  }
  out << "The adaptation manager was verified by running the system from " << report.runs.size()
      << " initial state(s). ";
  if (shown.empty()) {
    out << "It did not pass verification.\n";
  } else {
    out << "The following constraints were violated:\n";
    out << fcl::render_violations_text(shown);
  }
  out << "\nFix the adaptation manager. Provide the complete updated code.\n";
  return out.str();
}

LoopResult run_loop(const LoopConfig& config, GenBackend& backend) {
  if (!config.scenario) throw Error("run_loop needs a scenario");
  const scn::Scenario& scenario = *config.scenario;
  const std::int64_t horizon =
      config.horizon > 0 ? config.horizon : scenario.default_horizon();

  PromptBundle bundle = generate_prompt(scenario.spec(), scenario.domain_text(),
                                        scenario.constraints(), config.variant);
  std::vector<Message> conversation = bundle.messages;

  LoopResult result;
  std::string prev_report_text;

  for (int k = 1; k <= config.max_iterations; ++k) {
    std::string response;
    bool got_response = false;
    for (int attempt = 0; attempt <= config.transport_retries; ++attempt) {
      try {
        response = backend.complete(conversation);
        got_response = true;
        break;
      } catch (const TransportError&) {
        if (attempt == config.transport_retries) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(100 * (attempt + 1)));
      }
    }
    if (!got_response) {
      result.iterations = k - 1;
      result.abort_reason = "transport-failure";
      return result;
    }
    conversation.push_back({"assistant", response});

    const std::string scratch =
        (config.workdir.empty() ? std::string(".") : config.workdir) + "/iter" + std::to_string(k);
    am::MaterializeResult mat = am::materialize_generated_am(response, scratch, scenario.spec(),
                                                             config.python_exe);
    cas::ViolationReport report;
    if (mat.error) {
      fcl::Violation v;
      v.kind = fcl::Violation::Kind::Generic;
      v.constraint = cas::kRuleCodeLevel;
      v.step = 0;
      v.detail = *mat.error;
      report.violations.push_back(std::move(v));
    } else {
      report = cas::run_batch(scenario, mat.endpoint, scenario.spec().initial_states,
                              scenario.constraints(), horizon);
    }
    if (!mat.note.empty()) report.notes.push_back(mat.note);

    LoopIteration it;
    it.index = k;
    it.response_digest = fnv1a_digest(response);
    it.valid = report.empty();
    it.violation_count = report.violations.size();
    it.report_text = cas::report_to_text(report);
    result.per_iteration.push_back(it);

    if (report.empty()) {
      result.iterations = k;
      result.valid = true;
      return result;
    }

    if (k >= 2 && it.report_text == prev_report_text) result.stagnation = true;
    prev_report_text = it.report_text;

    if (result.stagnation && config.fresh_start_on_stagnation) {
      conversation = bundle.messages;
    } else {
      conversation.push_back({"user", format_feedback(report, config.mode)});
    }
  }
  result.iterations = config.max_iterations;
  result.valid = false;
  result.abort_reason = "max-iterations";
  return result;
}

std::vector<ExperimentRow> run_experiment(const LoopConfig& base,
                                          const std::vector<FeedbackMode>& modes,
                                          const std::vector<PromptVariant>& variants, int repeats,
                                          const BackendFactory& make_backend, int jobs) {
  struct Task {
    FeedbackMode mode;
    PromptVariant variant;
    int repeat;
  };
  std::vector<Task> tasks;
  for (const auto& mode : modes) {
    for (const auto& variant : variants) {
      for (int r = 1; r <= repeats; ++r) tasks.push_back({mode, variant, r});
    }
  }
  std::vector<ExperimentRow> rows(tasks.size());

  auto worker_body = [&](std::size_t idx) {
    const Task& t = tasks[idx];
    LoopConfig config = base;
    config.mode = t.mode;
    config.variant = t.variant;
    config.workdir = (base.workdir.empty() ? std::string(".") : base.workdir) + "/" +
                     to_string(t.mode) + "_" + to_string(t.variant) + "_rep" +
                     std::to_string(t.repeat);
    auto backend = make_backend();
    LoopResult r = run_loop(config, *backend);
    rows[idx] = {to_string(t.mode), to_string(t.variant), t.repeat, r.iterations, r.valid};
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) worker_body(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, static_cast<int>(tasks.size()));
    for (int w = 0; w < n; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t idx = next.fetch_add(1);
          if (idx >= tasks.size()) return;
          worker_body(idx);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string experiment_table(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << "mode\tvariant\trepeat\titerations\tvalid\n";
  for (const auto& r : rows) {
    out << r.mode << "\t" << r.variant << "\t" << r.repeat << "\t" << r.iterations << "\t"
        << (r.valid ? "true" : "false") << "\n";
  }
  return out.str();
}

std::vector<ExperimentRow> parse_experiment_table(const std::string& text) {
  std::vector<ExperimentRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream ls(line);
    ExperimentRow r;
    std::string valid;
    std::string repeat;
    std::string iterations;
    std::getline(ls, r.mode, '\t');
    std::getline(ls, r.variant, '\t');
    std::getline(ls, repeat, '\t');
    std::getline(ls, iterations, '\t');
    std::getline(ls, valid, '\t');
    r.repeat = std::stoi(repeat);
    r.iterations = std::stoi(iterations);
    r.valid = valid == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string experiment_histogram(const std::vector<ExperimentRow>& rows, int max_iterations) {
  std::map<std::pair<std::string, std::string>, std::vector<int>> cells;
  for (const auto& r : rows) {
    auto& counts = cells[{r.mode, r.variant}];
    if (counts.empty()) counts.assign(static_cast<std::size_t>(max_iterations) + 1, 0);
    if (r.valid && r.iterations >= 1 && r.iterations <= max_iterations) {
      ++counts[static_cast<std::size_t>(r.iterations - 1)];
    } else {
      ++counts.back();  // aborted
    }
  }
  std::ostringstream out;
  out << "iterations";
  for (int i = 1; i <= max_iterations; ++i) out << "\t" << i;
  out << "\taborted\n";
  for (const auto& [key, counts] : cells) {
    out << key.first << "/" << key.second;
    for (int c : counts) out << "\t" << c;
    out << "\n";
  }
  return out.str();
}

}  // namespace fclv::gen
