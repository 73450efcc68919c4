#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fclv::fcl {

/// One constraint violation, functional (FCL) or generic (architecture rule).
/// Detail strings are deterministic given the trace so feedback is reproducible.
struct Violation {
  enum class Kind { Functional, Generic };

  std::string constraint;  // constraint description, or generic rule id
  Kind kind = Kind::Functional;
  std::int64_t step = 0;   // anchor step of the failed check
  std::map<std::string, std::string> binding;
  std::string detail;

  // machine detail
  std::string subformula;
  std::int64_t observed_true = 0;
  std::int64_t observed_false = 0;
  std::int64_t required = 0;
  std::int64_t window = 0;
  int constraint_index = -1;
  std::string initial_state;

  bool operator==(const Violation&) const = default;
};

std::string binding_text(const std::map<std::string, std::string>& binding);

/// Stable report order: by step, then constraint order, then binding.
bool report_less(const Violation& a, const Violation& b);

/// De-duplicate by (constraint, binding), keeping the earliest step.
std::vector<Violation> dedup_violations(std::vector<Violation> all);

}  // namespace fclv::fcl
