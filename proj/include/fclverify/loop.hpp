#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fclverify/backend.hpp"
#include "fclverify/prompt.hpp"
#include "fclverify/runtime.hpp"
#include "fclverify/scenario.hpp"

namespace fclv::gen {

enum class FeedbackMode { GenericAndFunctional, GenericOnly, MetricsBaseline };

const char* to_string(FeedbackMode m);
FeedbackMode mode_from_string(const std::string& s);

/// Render the violation report as the feedback block inserted into prompts.
/// generic+functional lists every violation with step, binding, counts and
/// the constraint's description; generic-only filters to the generic rules;
/// metrics renders system domain metrics only.
std::string format_feedback(const cas::ViolationReport& report, FeedbackMode mode);

struct LoopIteration {
  int index = 0;
  std::string response_digest;
  bool valid = false;
  std::size_t violation_count = 0;
  std::string report_text;
};

struct LoopResult {
  int iterations = 0;
  bool valid = false;
  std::vector<LoopIteration> per_iteration;
  std::string abort_reason;  // empty, "max-iterations" or "transport-failure"
  bool stagnation = false;   // two consecutive byte-identical reports
};

struct LoopConfig {
  const scn::Scenario* scenario = nullptr;
  FeedbackMode mode = FeedbackMode::GenericAndFunctional;
  PromptVariant variant = PromptVariant::WithConstraints;
  int max_iterations = 10;
  std::string workdir;  // scratch space for materialized managers
  bool fresh_start_on_stagnation = false;
  std::string python_exe = "python3";
  std::int64_t horizon = 0;  // 0 = scenario default
  int transport_retries = 3;
};

/// The generation-verification feedback loop: prompt, materialize, verify
/// over all initial states, feed violations back; abort after max_iterations.
LoopResult run_loop(const LoopConfig& config, GenBackend& backend);

struct ExperimentRow {
  std::string mode;
  std::string variant;
  int repeat = 0;
  int iterations = 0;
  bool valid = false;
};

using BackendFactory = std::function<std::unique_ptr<GenBackend>()>;

/// modes x variants x repeats; a fresh backend per repeat. jobs > 1 runs cells
/// in parallel (rows come back in deterministic order regardless).
std::vector<ExperimentRow> run_experiment(const LoopConfig& base,
                                          const std::vector<FeedbackMode>& modes,
                                          const std::vector<PromptVariant>& variants, int repeats,
                                          const BackendFactory& make_backend, int jobs = 1);

/// Tab-separated table with a header row: mode, variant, repeat, iterations, valid.
std::string experiment_table(const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> parse_experiment_table(const std::string& text);

/// Per-cell histogram of iteration counts (plus an aborted bucket).
std::string experiment_histogram(const std::vector<ExperimentRow>& rows, int max_iterations);

std::string fnv1a_digest(const std::string& text);

}  // namespace fclv::gen
