#pragma once

// Internal single-snapshot evaluation core shared by the offline oracle and
// the online monitor. Not installed; include from src/ only.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "fclverify/ast.hpp"
#include "fclverify/errors.hpp"
#include "fclverify/trace.hpp"

namespace fclv::fcl::detail {

using IdSet = std::set<std::string>;
using LetSets = std::map<std::string, IdSet>;
using Binding = std::map<std::string, Value>;

struct Scope;

/// How a `within` encountered during state evaluation is resolved. The offline
/// engine counts over the trace; the online monitor consults history buffers.
using WithinHandler = std::function<bool(const Formula& within_node, const Scope& sc)>;

struct Scope {
  const Snapshot* snap = nullptr;
  std::int64_t step = 0;
  std::int64_t L = 1;
  const LetSets* lets = nullptr;
  Binding* vars = nullptr;
  const WithinHandler* within = nullptr;  // null: temporal operators are an error
};

Value do_expr(const Expr& e, const Scope& sc);
IdSet do_set(const SetExpr& se, const Scope& sc);
bool do_formula(const Formula& f, const Scope& sc);

LetSets materialize_lets(const std::vector<std::pair<std::string, SetExprPtr>>& lets,
                         const Snapshot& snap, std::int64_t step, std::int64_t L,
                         const WithinHandler* within = nullptr);

std::string binding_key(const Binding& b);
std::map<std::string, std::string> binding_names(const Binding& b);

/// Enumerate prefix bindings at one step (domains may depend on earlier vars).
std::vector<Binding> enumerate_prefix(const std::vector<std::pair<std::string, SetExprPtr>>& prefix,
                                      const Scope& base);

}  // namespace fclv::fcl::detail
