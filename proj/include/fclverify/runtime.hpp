#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fclverify/amhost.hpp"
#include "fclverify/online.hpp"
#include "fclverify/scenario.hpp"
#include "fclverify/trace.hpp"
#include "fclverify/violation.hpp"

namespace fclv::cas {

// Stable generic rule ids (they appear verbatim in feedback text).
inline constexpr const char* kRuleCodeLevel = "code-level validity";
inline constexpr const char* kRuleRuntimeException = "runtime exception";
inline constexpr const char* kRuleOnlyAppropriate = "only appropriate ensembles";
inline constexpr const char* kRuleExactlyOne = "exactly one ensemble";

/// Check one assignment response against the generic architecture rules:
/// only groups declared for this assignment, every component of the view
/// assigned to exactly one group, no foreign component ids.
std::vector<fcl::Violation> check_generic(const adsl::ArchitectureSpec& spec,
                                          const adsl::Assignment& assignment,
                                          const std::vector<std::string>& view_ids,
                                          const am::AssignResponse& response, std::int64_t step);

struct RunResult {
  fcl::Trace trace;
  std::vector<fcl::Violation> violations;  // generic + functional, report order
  scn::Metrics metrics;
  std::vector<std::string> notes;
  bool stopped_on_generic = false;
  std::string initial_state;
};

/// Drive one adaptation run: per step, invoke the AM per assignment on the
/// filtered view, check generic rules, apply the update, feed the monitor.
/// A generic violation stops the run; functional violations are collected
/// through finish().
RunResult run(const scn::Scenario& scenario, const am::AmEndpoint& endpoint,
              const adsl::InitialState& initial, const fcl::ConstraintDocument& constraints,
              std::int64_t horizon);

struct RunSummary {
  std::string initial_state;
  scn::Metrics metrics;
  std::int64_t trace_length = 0;
  bool stopped_on_generic = false;
};

/// Aggregated verification result over a set of initial states. Empty
/// violations <=> the adaptation manager is valid.
struct ViolationReport {
  std::vector<RunSummary> runs;
  std::vector<fcl::Violation> violations;
  std::vector<std::string> notes;
  bool empty() const { return violations.empty(); }
};

ViolationReport run_batch(const scn::Scenario& scenario, const am::AmEndpoint& endpoint,
                          const std::vector<adsl::InitialState>& initial_states,
                          const fcl::ConstraintDocument& constraints, std::int64_t horizon,
                          bool dedup = true);

// Report file: header line with per-run metrics, then one violation per line.
void write_report(std::ostream& out, const ViolationReport& report);
ViolationReport read_report(std::istream& in);
void save_report(const std::string& path, const ViolationReport& report);
ViolationReport load_report(const std::string& path);
std::string report_to_text(const ViolationReport& report);

}  // namespace fclv::cas
