#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fclverify/adsl.hpp"
#include "fclverify/ast.hpp"
#include "fclverify/trace.hpp"

namespace fclv::scn {

using Metrics = std::map<std::string, double>;

struct ParamSpec {
  std::string name;
  double default_value = 0;
  double min_value = 0;
  double max_value = 0;
  std::string help;
};

/// One run's mutable, seeded state. The runtime calls apply() with the
/// resolved update for each adaptation step and records the snapshot after it.
class Run {
 public:
  virtual ~Run() = default;
  /// Apply one architecture update (ensemble id -> members) and advance the
  /// dynamics. The update may be pruned (components that die this step are
  /// removed from all ensemble sets before the snapshot is taken).
  virtual void apply(std::map<std::string, std::set<std::string>>& update, std::int64_t step) = 0;
  virtual fcl::Snapshot snapshot(std::int64_t step,
                                 const std::map<std::string, std::set<std::string>>& update) const = 0;
  virtual bool terminal() const = 0;
  virtual Metrics metrics(std::int64_t final_step) const = 0;
};

/// A deterministic, seeded case study: embedded architecture spec, domain
/// text, shipped constraints, parameter registry and dynamics.
class Scenario {
 public:
  virtual ~Scenario() = default;
  virtual std::string name() const = 0;
  virtual const adsl::ArchitectureSpec& spec() const = 0;
  virtual std::string domain_text() const = 0;
  virtual const fcl::ConstraintDocument& constraints() const = 0;
  virtual std::vector<ParamSpec> parameters() const = 0;
  virtual adsl::AttributeSchema runtime_schema() const = 0;
  virtual std::int64_t default_horizon() const = 0;
  virtual std::unique_ptr<Run> start(const adsl::InitialState& state) const = 0;

  /// Unknown names and out-of-range values for this scenario's parameters.
  std::vector<std::string> validate_params(const adsl::InitialState& state) const;
};

const std::vector<const Scenario*>& all_scenarios();
const Scenario* find_scenario(const std::string& name);

}  // namespace fclv::scn
