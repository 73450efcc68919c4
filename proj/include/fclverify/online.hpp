#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fclverify/analysis.hpp"
#include "fclverify/ast.hpp"
#include "fclverify/trace.hpp"
#include "fclverify/violation.hpp"

namespace fclv::fcl {

/// A pending check that a subformula holds at least n times within a resolved
/// window. Early resolution: satisfied once true n times, violated once false
/// more than t'-n' times (when that is sound under the available length info).
struct TemporalObligation {
  enum class Status { Pending, Satisfied, Violated, Cancelled };

  int constraint_index = -1;
  std::int64_t anchor = 0;
  std::map<std::string, std::string> binding;
  std::int64_t required = -1;  // resolved n'; -1 while the length is unknown
  std::int64_t window = -1;    // resolved t'; -1 while the length is unknown
  std::int64_t observed_true = 0;
  std::int64_t observed_false = 0;
  Status status = Status::Pending;
};

struct MonitorOptions {
  /// The announced trace length is exact (replaying a recorded trace). Enables
  /// exact early resolution and live evaluation of state-level endcounts;
  /// without it, a run may stop before the announced horizon and constraints
  /// whose state formulas need the length are replayed at finish().
  bool trusted_length = false;
};

/// Incremental constraint monitor for the online-checkable subset:
/// no nested within, at most one implication, forward windows only top-level
/// or in the consequent, backward windows only in the antecedent.
class Monitor {
 public:
  /// Throws SubsetError when a constraint falls outside the subset and Error
  /// on malformed constraints.
  explicit Monitor(ConstraintDocument doc, MonitorOptions options = {});
  ~Monitor();
  Monitor(Monitor&&) noexcept;
  Monitor& operator=(Monitor&&) noexcept;

  /// Feed the next snapshot (snapshots must arrive in step order). Pass the
  /// trace length when the scenario has a fixed horizon; otherwise MAX-bounded
  /// obligations stay pending until finish().
  std::vector<Violation> step(const Snapshot& s,
                              std::optional<std::int64_t> known_length = std::nullopt);

  /// Resolve every pending obligation with the window truncated at trace end.
  /// After finish() no obligation is pending. Idempotent.
  std::vector<Violation> finish();

  bool finished() const;
  std::int64_t steps_seen() const;
  const std::vector<std::string>& notes() const;
  std::vector<TemporalObligation> obligations() const;
  std::vector<Violation> all_violations() const;  // report order
  std::size_t pending_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Violation report rendering (one record per line) and the text block
/// inserted into feedback prompts; stable order: by step, then constraint.
std::string violation_to_record(const Violation& v);
Violation violation_from_record(const std::string& line);
std::string render_violations_text(const std::vector<Violation>& vs);

}  // namespace fclv::fcl
