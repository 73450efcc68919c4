#pragma once

#include <string>
#include <vector>

#include "fclverify/ast.hpp"

namespace fclv::fcl {

/// Static classification of a constraint body. Both evaluation engines share
/// this so the anchor discipline is identical:
///   - TopWithin: a future `within` under an optional forall-prefix; checked
///     once per binding, at the step the binding enters its domain.
///   - Implication: one top-level implication under the prefix; the antecedent
///     is evaluated at every anchor and a true antecedent triggers the
///     consequent check (state formula now, future `within` as an obligation).
///   - State: everything else; checked at every anchor.
struct ConstraintShape {
  enum class Core { TopWithin, Implication, State };

  std::vector<std::pair<std::string, SetExprPtr>> prefix;  // forall chain
  Core core = Core::State;
  const Formula* core_formula = nullptr;

  // TopWithin / Implication-with-within
  const Formula* within_node = nullptr;
  const Formula* antecedent = nullptr;
  const Formula* consequent = nullptr;
  bool consequent_is_within = false;

  // backward-window withins sitting in state-evaluated positions
  std::vector<const Formula*> negative_withins;
  // endcount expressions appear anywhere in the constraint body
  bool state_uses_endcount = false;
  // evaluating state-level parts needs the exact trace length (endcount
  // expressions, or MAX-dependent counts on backward windows); the monitor
  // defers such constraints to finish() and replays them with the actual L
  bool state_needs_length = false;

  std::vector<std::string> online_rejections;
  bool online_ok() const { return online_rejections.empty(); }
};

ConstraintShape classify(const Constraint& c);

/// Well-formedness checks independent of the online subset: INF misuse,
/// negative or fractional misused bounds, unbound variables, duplicate lets.
/// Returns human-readable problems; empty means well-formed.
std::vector<std::string> validate(const Constraint& c);

/// True when the bound's resolved value depends on MAX (grows with trace length).
bool depends_on_max(const Bound& b);

}  // namespace fclv::fcl
