#pragma once

#include <string>

#include "fclverify/ast.hpp"

namespace fclv::fcl {

/// Parse a functional-constraints document:
///
///   constraint "<description>"
///     let <Name> = { <var> in <Set> | <predicate> }
///     <formula>
///
/// Formula syntax: within[n, t] f; forall/exists v in S: f; count(S);
/// and/or/not/implies; comparisons == != < <= > >=; membership `v in S`;
/// bounds MAX BEG INF, scaled 0.8*MAX, negative windows within[10, -10].
/// Bodies are indented at least two spaces; blank lines and # comments allowed.
ConstraintDocument parse_constraints(const std::string& text);

}  // namespace fclv::fcl
