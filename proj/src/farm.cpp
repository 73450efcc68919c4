#include <algorithm>
#include <array>

#include "fclverify/amhost.hpp"
#include "fclverify/fcdsl.hpp"
#include "generated_assets.hpp"
#include "scenarios_internal.hpp"

namespace fclv::scn {

namespace {

constexpr int kFieldCount = 3;
constexpr double kFieldArea = 100.0;

struct Drone {
  std::string id;
  std::int64_t pos = 0;
  std::int64_t target = 0;
};

class FarmRun final : public Run {
 public:
  FarmRun(std::int64_t drone_count, std::int64_t bird_count, double move_prob, std::uint64_t seed)
      : rng_(seed), move_prob_(move_prob) {
    for (std::int64_t k = 0; k < drone_count; ++k) {
      const std::int64_t home = k % kFieldCount;
      drones_.push_back({"drone" + std::to_string(k + 1), home, home});
    }
    for (std::int64_t b = 0; b < bird_count; ++b) {
      birds_.push_back(rng_.below(kFieldCount));
    }
  }

  void apply(std::map<std::string, std::set<std::string>>& update, std::int64_t step) override {
    (void)step;
    // targets follow the assignment; Idle holds position
    for (int f = 0; f < kFieldCount; ++f) {
      const std::string eid = "ProtectField" + std::to_string(f + 1);
      auto it = update.find(eid);
      if (it == update.end()) continue;
      for (const auto& id : it->second) {
        if (Drone* d = find(id)) d->target = f;
      }
    }
    if (auto it = update.find("Idle"); it != update.end()) {
      for (const auto& id : it->second) {
        if (Drone* d = find(id)) d->target = d->pos;
      }
    }
    for (auto& d : drones_) {
      if (d.pos < d.target) ++d.pos;
      else if (d.pos > d.target) --d.pos;
    }
    // the flock drifts between fields
    for (auto& b : birds_) {
      if (rng_.unit() < move_prob_) b = (b + 1 + rng_.below(kFieldCount - 1)) % kFieldCount;
    }
    // unprotected birds feed
    for (int f = 0; f < kFieldCount; ++f) {
      std::int64_t protectors = 0;
      for (const auto& d : drones_) {
        if (d.pos == f) ++protectors;
      }
      std::int64_t birds_here = 0;
      for (const auto& b : birds_) {
        if (b == f) ++birds_here;
      }
      const double excess = static_cast<double>(std::max<std::int64_t>(0, birds_here - protectors));
      damage_[static_cast<std::size_t>(f)] =
          std::min(kFieldArea, damage_[static_cast<std::size_t>(f)] + excess);
    }
  }

  fcl::Snapshot snapshot(std::int64_t step,
                         const std::map<std::string, std::set<std::string>>& update) const override {
    fcl::Snapshot s;
    s.step = step;
    for (const auto& d : drones_) {
      s.components[d.id] = fcl::Component{"Drone", {{"position", d.pos}}};
    }
    for (int f = 0; f < kFieldCount; ++f) {
      std::int64_t birds_here = 0;
      for (const auto& b : birds_) {
        if (b == f) ++birds_here;
      }
      const std::string id = "field" + std::to_string(f + 1);
      s.components[id] = fcl::Component{"Field",
                                        {{"position", static_cast<std::int64_t>(f)},
                                         {"birds", birds_here},
                                         {"damage", damage_[static_cast<std::size_t>(f)]},
                                         {"area", kFieldArea}}};
      s.beyond_control[id] = {{"position", static_cast<std::int64_t>(f)}, {"birds", birds_here}};
    }
    s.ensembles = update;
    return s;
  }

  bool terminal() const override { return false; }

  Metrics metrics(std::int64_t final_step) const override {
    Metrics m;
    double total = 0;
    for (double d : damage_) total += d;
    m["total_damage"] = total;
    m["damage_rate"] = total / (kFieldArea * kFieldCount) * 100.0;
    m["final_step"] = static_cast<double>(final_step);
    return m;
  }

 private:
  Drone* find(const std::string& id) {
    for (auto& d : drones_) {
      if (d.id == id) return &d;
    }
    return nullptr;
  }

  Rng rng_;
  double move_prob_;
  std::vector<Drone> drones_;
  std::vector<std::int64_t> birds_;  // field index per bird
  std::array<double, kFieldCount> damage_{};
};

class FarmScenario final : public Scenario {
 public:
  std::string name() const override { return "farm"; }

  const adsl::ArchitectureSpec& spec() const override {
    static const adsl::ArchitectureSpec s = adsl::parse_adsl(assets::kFarmAdsl);
    return s;
  }

  std::string domain_text() const override { return assets::kFarmDomain; }

  const fcl::ConstraintDocument& constraints() const override {
    static const fcl::ConstraintDocument doc = fcl::parse_constraints(assets::kFarmFcl);
    return doc;
  }

  std::vector<ParamSpec> parameters() const override {
    return {
        {"drone_count", 3, 0, 10, "drones in the fleet"},
        {"bird_count", 5, 0, 30, "birds in the flock"},
        {"bird_move_prob", 0.15, 0, 1, "per-step chance a bird changes fields"},
    };
  }

  adsl::AttributeSchema runtime_schema() const override {
    adsl::AttributeSchema schema;
    schema.attrs_by_type["Drone"] = {"position"};
    schema.attrs_by_type["Field"] = {"position", "birds", "damage", "area"};
    return schema;
  }

  std::int64_t default_horizon() const override { return 30; }

  std::unique_ptr<Run> start(const adsl::InitialState& state) const override {
    return std::make_unique<FarmRun>(static_cast<std::int64_t>(param_or(state, "drone_count", 3)),
                                     static_cast<std::int64_t>(param_or(state, "bird_count", 5)),
                                     param_or(state, "bird_move_prob", 0.15),
                                     static_cast<std::uint64_t>(state.random_seed));
  }
};

// --- builtin adaptation managers ------------------------------------------

struct FieldView {
  std::int64_t pos = 0;
  std::int64_t birds = 0;
};

std::array<FieldView, kFieldCount> fields_of(const am::AssignRequest& req) {
  std::array<FieldView, kFieldCount> fields{};
  for (int f = 0; f < kFieldCount; ++f) {
    const std::string key = "field" + std::to_string(f + 1);
    auto it = req.beyond_control.find(key);
    fields[static_cast<std::size_t>(f)].pos = f;
    if (it == req.beyond_control.end()) continue;
    if (auto b = it->second.find("birds"); b != it->second.end() && fcl::is_int(b->second)) {
      fields[static_cast<std::size_t>(f)].birds = std::get<std::int64_t>(b->second);
    }
  }
  return fields;
}

std::string protect_group(int field_index) {
  return "protect field " + std::to_string(field_index + 1);
}

/// Greedy coordinator: first step surveys the home fields, then every birded
/// field gets its nearest drone and the rest pile onto the busiest fields.
class FarmBaselineAm final : public am::AmSession {
 public:
  am::AssignResponse invoke(const am::AssignRequest& req) override {
    am::AssignResponse resp;
    const auto fields = fields_of(req);
    const std::size_t n = req.components.size();
    std::vector<std::int64_t> pos(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      auto it = req.components[k].second.find("position");
      if (it != req.components[k].second.end() && fcl::is_int(it->second)) {
        pos[k] = std::get<std::int64_t>(it->second);
      }
    }
    std::vector<int> target(n, -1);
    if (req.step == 1) {
      for (std::size_t k = 0; k < n; ++k) target[k] = static_cast<int>(k % kFieldCount);
    } else {
      std::vector<int> order;
      for (int f = 0; f < kFieldCount; ++f) {
        if (fields[static_cast<std::size_t>(f)].birds > 0) order.push_back(f);
      }
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& fa = fields[static_cast<std::size_t>(a)];
        const auto& fb = fields[static_cast<std::size_t>(b)];
        return fa.birds != fb.birds ? fa.birds > fb.birds : a < b;
      });
      std::array<std::int64_t, kFieldCount> allocated{};
      // one nearest drone per birded field, busiest first
      for (int f : order) {
        int best = -1;
        std::int64_t best_dist = 0;
        for (std::size_t k = 0; k < n; ++k) {
          if (target[k] != -1) continue;
          const std::int64_t dist = std::abs(pos[k] - f);
          if (best < 0 || dist < best_dist) {
            best = static_cast<int>(k);
            best_dist = dist;
          }
        }
        if (best >= 0) {
          target[static_cast<std::size_t>(best)] = f;
          ++allocated[static_cast<std::size_t>(f)];
        }
      }
      // leftovers chase the highest birds-per-protector ratio
      for (std::size_t k = 0; k < n; ++k) {
        if (target[k] != -1) continue;
        if (order.empty()) {
          target[k] = static_cast<int>(k % kFieldCount);
          continue;
        }
        int best = order.front();
        double best_ratio = -1;
        for (int f : order) {
          const double ratio = static_cast<double>(fields[static_cast<std::size_t>(f)].birds) /
                               static_cast<double>(allocated[static_cast<std::size_t>(f)] + 1);
          if (ratio > best_ratio) {
            best = f;
            best_ratio = ratio;
          }
        }
        target[k] = best;
        ++allocated[static_cast<std::size_t>(best)];
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      resp.assignments.emplace_back(req.components[k].first, protect_group(target[k]));
    }
    return resp;
  }
};

/// Fixed home assignment; never reacts to the flock.
class FarmStaticAm final : public am::AmSession {
 public:
  am::AssignResponse invoke(const am::AssignRequest& req) override {
    am::AssignResponse resp;
    for (std::size_t k = 0; k < req.components.size(); ++k) {
      resp.assignments.emplace_back(req.components[k].first,
                                    protect_group(static_cast<int>(k % kFieldCount)));
    }
    return resp;
  }
};

}  // namespace

const Scenario& farm_scenario() {
  static const FarmScenario s;
  return s;
}

void register_farm_builtins() {
  am::register_builtin("farm_baseline", [] { return std::make_unique<FarmBaselineAm>(); });
  am::register_builtin("farm_static", [] { return std::make_unique<FarmStaticAm>(); });
}

}  // namespace fclv::scn
