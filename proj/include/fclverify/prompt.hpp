#pragma once

#include <string>
#include <vector>

#include "fclverify/adsl.hpp"
#include "fclverify/ast.hpp"

namespace fclv::gen {

struct Message {
  std::string role;  // system | user | assistant
  std::string content;
  bool operator==(const Message&) const = default;
};

enum class PromptVariant { WithConstraints, WithoutConstraints };

const char* to_string(PromptVariant v);
PromptVariant variant_from_string(const std::string& s);

struct PromptBundle {
  std::vector<Message> messages;  // system message plus the rendered user prompt
  PromptVariant variant = PromptVariant::WithConstraints;
  std::string rendered;  // the user prompt text
  std::vector<std::string> warnings;
};

/// Render the generation prompt from the architecture specification and the
/// domain description: task statement with the exactly-one-group rule, the
/// generated abstract class, per-assignment group and attribute lists, the
/// beyond-control section, the strategy, and (with-constraints variant only)
/// the functional requirement descriptions.
PromptBundle generate_prompt(const adsl::ArchitectureSpec& spec, const std::string& domain_text,
                             const fcl::ConstraintDocument& constraints, PromptVariant variant,
                             const std::string& language = "Python");

}  // namespace fclv::gen
