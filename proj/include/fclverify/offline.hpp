#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fclverify/analysis.hpp"
#include "fclverify/ast.hpp"
#include "fclverify/trace.hpp"
#include "fclverify/violation.hpp"

namespace fclv::fcl {

enum class BoundKind { CountN, WindowT };

/// Resolve a bound at anchor step i of a trace of length L.
///   MAX -> L-1-i, BEG -> i, INF (window) -> L-1-i, scaled -> floor(factor * endcount).
/// Window literals are clamped to the available steps: forward to MAX, backward
/// to BEG; window BEG denotes the backward window reaching the trace start, so
/// the returned window value is signed (negative = backward).
/// INF in count position takes its value from the paired window (globally);
/// rejected by validate() when the window is a finite literal.
std::int64_t resolve_bound(const Bound& b, std::int64_t i, std::int64_t L, BoundKind kind,
                           const Bound* paired_window = nullptr);

/// Variable bindings and step context for single-snapshot evaluation.
struct StateContext {
  std::int64_t step = 0;
  std::int64_t length = 1;
  const std::vector<std::pair<std::string, SetExprPtr>>* lets = nullptr;
  std::map<std::string, Value> vars;
};

/// Classical first-order evaluation over one snapshot. The formula must not
/// contain `within`; quantifier domains are materialized from the snapshot.
bool eval_state(const Formula& f, const Snapshot& s, const StateContext& ctx);
Value eval_expr(const Expr& e, const Snapshot& s, const StateContext& ctx);
std::set<std::string> eval_set(const SetExpr& se, const Snapshot& s, const StateContext& ctx);

struct Verdict {
  bool satisfied = true;
  std::optional<Violation> witness;  // earliest (step, binding, subformula)
};

/// Whole-trace brute-force verdict; the oracle the online monitor is checked
/// against. Handles any well-formed formula, including nesting the monitor
/// rejects.
Verdict eval_offline(const Constraint& c, const Trace& tr);

/// All violations of one constraint, de-duplicated per binding (earliest
/// anchor), in report order.
std::vector<Violation> offline_violations(const Constraint& c, const Trace& tr,
                                          int constraint_index = -1);

enum class LtlOp { Next, Future, Globally };

/// next -> within(1,1), future -> within(1,INF), globally -> within(INF,INF).
FormulaPtr ltl_bridge(LtlOp op, FormulaPtr phi);

}  // namespace fclv::fcl
