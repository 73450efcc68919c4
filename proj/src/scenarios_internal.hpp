#pragma once

#include <cstdint>
#include <random>

#include "fclverify/scenario.hpp"

namespace fclv::scn {

/// Explicit per-run randomness; mt19937_64 output is identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::int64_t below(std::int64_t n) {
    return n <= 0 ? 0 : static_cast<std::int64_t>(engine_() % static_cast<std::uint64_t>(n));
  }

 private:
  std::mt19937_64 engine_;
};

const Scenario& dragon_scenario();
const Scenario& farm_scenario();
void register_dragon_builtins();
void register_farm_builtins();

double param_or(const adsl::InitialState& state, const std::string& name, double fallback);

}  // namespace fclv::scn
