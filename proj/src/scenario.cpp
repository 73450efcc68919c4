#include "fclverify/scenario.hpp"

#include <mutex>

#include "scenarios_internal.hpp"

namespace fclv::scn {

double param_or(const adsl::InitialState& state, const std::string& name, double fallback) {
  auto it = state.params.find(name);
  return it == state.params.end() ? fallback : it->second;
}

std::vector<std::string> Scenario::validate_params(const adsl::InitialState& state) const {
  std::vector<std::string> problems;
  const auto specs = parameters();
  for (const auto& [name, value] : state.params) {
    const ParamSpec* found = nullptr;
    for (const auto& p : specs) {
      if (p.name == name) {
        found = &p;
        break;
      }
    }
    if (!found) {
      problems.push_back("unknown parameter " + name + " for scenario " + this->name());
      continue;
    }
    if (value < found->min_value || value > found->max_value) {
      problems.push_back("parameter " + name + "=" + std::to_string(value) +
                         " outside the valid range for scenario " + this->name());
    }
  }
  return problems;
}

namespace {
std::once_flag g_registry_once;
std::vector<const Scenario*> g_scenarios;
}  // namespace

const std::vector<const Scenario*>& all_scenarios() {
  std::call_once(g_registry_once, [] {
    g_scenarios = {&dragon_scenario(), &farm_scenario()};
    register_dragon_builtins();
    register_farm_builtins();
  });
  return g_scenarios;
}

const Scenario* find_scenario(const std::string& name) {
  for (const Scenario* s : all_scenarios()) {
    if (s->name() == name) return s;
  }
  return nullptr;
}

}  // namespace fclv::scn

namespace fclv::am {
void ensure_default_builtins() { (void)scn::all_scenarios(); }
}  // namespace fclv::am
