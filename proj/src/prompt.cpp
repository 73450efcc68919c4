#include "fclverify/prompt.hpp"

#include <sstream>

#include "fclverify/amhost.hpp"
#include "fclverify/errors.hpp"

namespace fclv::gen {

const char* to_string(PromptVariant v) {
  return v == PromptVariant::WithConstraints ? "with-constraints" : "without-constraints";
}

PromptVariant variant_from_string(const std::string& s) {
  if (s == "with-constraints" || s == "with") return PromptVariant::WithConstraints;
  if (s == "without-constraints" || s == "without") return PromptVariant::WithoutConstraints;
  throw Error("unknown prompt variant: " + s);
}

namespace {

constexpr const char* kReadOnlyNote =
    "with the following attributes (note that the attributes are read-only and they do not "
    "update when a component is assigned to a group):";

void attribute_lines(std::ostringstream& out, const adsl::ComponentDecl& decl) {
  for (const auto& attr : decl.attributes) {
    out << "- `" << attr.id << "`: " << (attr.display.empty() ? attr.id : attr.display);
    if (!attr.description.empty()) out << " (" << attr.description << ")";
    out << "\n";
  }
}

}  // namespace

PromptBundle generate_prompt(const adsl::ArchitectureSpec& spec, const std::string& domain_text,
                             const fcl::ConstraintDocument& constraints, PromptVariant variant,
                             const std::string& language) {
  if (!spec.am_interface) throw Error("architecture specification has no am_interface");
  PromptBundle bundle;
  bundle.variant = variant;

  std::ostringstream out;
  out << domain_text;
  if (!domain_text.empty() && domain_text.back() != '\n') out << "\n";
  out << "\n";
  out << "Suggest an adaptation manager. The goal is to assign the components into groups. "
         "Note that each component must be assigned to exactly one group. If a component is "
         "supposed to remain in the same group (continue performing the same action), it must "
         "always be explicitly re-assigned to that group.\n\n";
  out << "The adaptation manager must be written in " << language << " and it must be a class "
      << "named `" << spec.am_interface->class_name << "` derived from this base class (can be "
      << "imported from `" << spec.am_interface->base_module << "`):\n";
  out << "```\n" << am::render_base_class(spec) << "```\n";
  out << "To perform the group assignments, use the `environment.assign_group(component, "
         "group_id)` method. The `group_id` must be exactly as listed below.\n";

  for (const auto& assignment : spec.assignments) {
    out << "---\n";
    out << "In `" << assignment.method << "`, your goal is to divide the "
        << assignment.description << " (`components`) into the following groups:\n";
    for (const auto& eid : assignment.ensembles) {
      const adsl::EnsembleDecl* e = spec.find_ensemble(eid);
      if (!e) throw Error("assignment " + assignment.method + " references unknown ensemble " + eid);
      out << "- A group named \"" << e->name << "\": " << e->description << "\n";
    }
    out << "\nThe `group_ids` argument is a list of all valid group names.\n\n";
    const adsl::ComponentDecl* decl = spec.find_component(assignment.component_type);
    if (decl && !decl->attributes.empty()) {
      out << "For each component, the following attributes are available (note that the "
             "attributes are read-only and they do not update when a component is assigned to a "
             "group):\n";
      attribute_lines(out, *decl);
    }
  }

  if (!spec.beyond_control.empty()) {
    out << "---\n";
    out << "Further, you can access the following beyond-control components, which are only "
           "observable and cannot be assigned to groups.\n\n";
    for (const auto& bc : spec.beyond_control) {
      out << bc.description << " (accessible via `environment." << bc.accessor << "`) "
          << kReadOnlyNote << "\n";
      if (const adsl::ComponentDecl* decl = spec.find_component(bc.type)) {
        attribute_lines(out, *decl);
      }
    }
  }

  out << "---\n";
  if (spec.strategy.empty()) {
    bundle.warnings.push_back("architecture specification has no strategy text");
  } else {
    out << spec.strategy << "\n";
  }

  if (variant == PromptVariant::WithConstraints) {
    out << "\nThe adaptation strategy must adhere to the following functional requirements:\n";
    for (const auto& c : constraints.constraints) {
      out << "- " << c.description << "\n";
    }
  }

  out << "\nThink step by step. First, reason about the task and analyze the problem. Then, "
         "describe the adaptation manager. After that, write the " << language
      << " code for the adaptation manager.\n";

  bundle.rendered = out.str();
  bundle.messages.push_back(
      {"system",
       "You are an expert software engineer. Follow the task instructions and the output format "
       "exactly."});
  bundle.messages.push_back({"user", bundle.rendered});
  return bundle;
}

}  // namespace fclv::gen
