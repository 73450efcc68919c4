#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fclverify/ast.hpp"

namespace fclv::adsl {

struct Attribute {
  std::string id;
  std::string display;
  std::string description;
  bool operator==(const Attribute&) const = default;
};

struct ComponentDecl {
  std::string name;
  std::string display;
  std::vector<Attribute> attributes;
  bool operator==(const ComponentDecl&) const = default;
};

struct EnsembleDecl {
  std::string id;       // identifier used in constraint formulas and traces
  std::string name;     // group id string used in prompts and on the wire
  std::string description;
  bool operator==(const EnsembleDecl&) const = default;
};

struct BeyondControlDecl {
  std::string type;
  std::string accessor;  // environment.<accessor>
  std::string description;
  bool operator==(const BeyondControlDecl&) const = default;
};

struct Assignment {
  std::string component_type;
  std::string description;          // human description of the filtered view
  std::string filter_text;          // empty = no filter (all instances)
  fcl::FormulaPtr filter;           // bare identifiers denote candidate attributes
  std::vector<std::string> ensembles;  // declared ensemble ids
  std::string method;
};

bool equals(const Assignment& a, const Assignment& b);

struct AmInterface {
  std::string class_name;
  std::string base_module;
  std::string base_class;
  bool operator==(const AmInterface&) const = default;
};

/// Named, seeded scenario configuration for one verification run.
struct InitialState {
  std::string name;
  std::int64_t random_seed = 0;
  std::map<std::string, double> params;
  bool operator==(const InitialState&) const = default;
};

struct ArchitectureSpec {
  std::vector<ComponentDecl> components;
  std::vector<EnsembleDecl> ensembles;
  std::vector<BeyondControlDecl> beyond_control;
  std::vector<Assignment> assignments;
  std::string strategy;
  std::optional<AmInterface> am_interface;
  std::vector<InitialState> initial_states;

  const EnsembleDecl* find_ensemble(const std::string& id) const;
  const ComponentDecl* find_component(const std::string& name) const;
  const InitialState* find_initial_state(const std::string& name) const;
  /// Group name -> ensemble id within one assignment's scope.
  std::optional<std::string> ensemble_for_group(const Assignment& a, const std::string& group) const;
};

bool equals(const ArchitectureSpec& a, const ArchitectureSpec& b);

/// The variable the filter predicate's bare identifiers are rebound to.
inline constexpr const char* kFilterVar = "__component";

ArchitectureSpec parse_adsl(const std::string& text);

/// Standalone initial-state blocks (rejects any other section).
std::vector<InitialState> parse_initial_states(const std::string& text);

std::string render(const ArchitectureSpec& spec);

/// Structural problems: duplicate ids, assignments naming undeclared
/// ensembles or component types, missing seeds. Empty = valid.
std::vector<std::string> validate(const ArchitectureSpec& spec);

/// Per-type runtime attributes a scenario maintains beyond the declared,
/// prompt-exposed ones (e.g. a location the assignment filters on).
struct AttributeSchema {
  std::map<std::string, std::set<std::string>> attrs_by_type;
};

/// Resolve every name a constraint document uses against the spec (plus the
/// optional runtime schema for attributes). Empty = all names resolve.
std::vector<std::string> cross_validate(const ArchitectureSpec& spec,
                                        const fcl::ConstraintDocument& doc,
                                        const AttributeSchema* runtime_schema = nullptr);

}  // namespace fclv::adsl
