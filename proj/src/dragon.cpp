#include <algorithm>

#include "fclverify/amhost.hpp"
#include "fclverify/fcdsl.hpp"
#include "generated_assets.hpp"
#include "scenarios_internal.hpp"

namespace fclv::scn {

namespace {

struct Villager {
  std::string id;
  bool warrior = false;
  std::int64_t hp = 0;
  bool in_cave = false;
};

constexpr std::int64_t kFarmerHp = 4;
constexpr std::int64_t kWarriorHp = 6;
constexpr std::int64_t kFarmerWheat = 5;
constexpr std::int64_t kWarriorWheat = 2;
constexpr std::int64_t kFarmerCost = 10;
constexpr std::int64_t kWarriorCost = 12;
constexpr std::int64_t kFarmerDamage = 1;
constexpr std::int64_t kWarriorDamage = 3;
constexpr std::int64_t kDragonHp = 50;

class DragonRun final : public Run {
 public:
  DragonRun(std::int64_t farmers, std::int64_t warriors, double counter_prob,
            std::int64_t counter_damage, std::uint64_t seed)
      : rng_(seed), counter_prob_(counter_prob), counter_damage_(counter_damage) {
    for (std::int64_t k = 1; k <= farmers; ++k) {
      villagers_.push_back({"farmer" + std::to_string(k), false, kFarmerHp, false});
    }
    for (std::int64_t k = 1; k <= warriors; ++k) {
      villagers_.push_back({"warrior" + std::to_string(k), true, kWarriorHp, false});
    }
    next_farmer_ = farmers + 1;
    next_warrior_ = warriors + 1;
  }

  void apply(std::map<std::string, std::set<std::string>>& update, std::int64_t step) override {
    (void)step;
    auto members = [&](const char* eid) -> const std::set<std::string>& {
      static const std::set<std::string> empty;
      auto it = update.find(eid);
      return it == update.end() ? empty : it->second;
    };
    auto find = [&](const std::string& id) -> Villager* {
      for (auto& v : villagers_) {
        if (v.id == id) return &v;
      }
      return nullptr;
    };

    // farming
    for (const auto& id : members("Farm")) {
      if (const Villager* v = find(id)) wheat_ += v->warrior ? kWarriorWheat : kFarmerWheat;
    }
    // spawning: farmers before warriors; a slot needs two group members and wheat
    auto spawn = [&](const char* eid, std::int64_t cost, bool warrior) {
      const std::int64_t slots = static_cast<std::int64_t>(members(eid).size()) / 2;
      for (std::int64_t k = 0; k < slots && wheat_ >= cost; ++k) {
        wheat_ -= cost;
        std::int64_t& counter = warrior ? next_warrior_ : next_farmer_;
        villagers_.push_back({(warrior ? "warrior" : "farmer") + std::to_string(counter++), warrior,
                              warrior ? kWarriorHp : kFarmerHp, false});
      }
    };
    spawn("SpawnFarmer", kFarmerCost, false);
    spawn("SpawnWarrior", kWarriorCost, true);
    // movement
    for (const auto& id : members("GoToCave")) {
      if (Villager* v = find(id)) v->in_cave = true;
    }
    for (const auto& id : members("GoToVillage")) {
      if (Villager* v = find(id)) v->in_cave = false;
    }
    // attack
    std::vector<std::string> attackers;
    std::int64_t damage = 0;
    for (const auto& id : members("Attack")) {
      if (const Villager* v = find(id)) {
        attackers.push_back(id);
        damage += v->warrior ? kWarriorDamage : kFarmerDamage;
      }
    }
    dragon_hp_ -= damage;
    // counterattack: a surviving, attacked dragon strikes one attacker
    if (!attackers.empty() && dragon_hp_ > 0 && rng_.unit() < counter_prob_) {
      const std::string target = attackers[static_cast<std::size_t>(
          rng_.below(static_cast<std::int64_t>(attackers.size())))];
      if (Villager* v = find(target)) {
        v->hp -= counter_damage_;
        if (v->hp <= 0) {
          villagers_.erase(std::remove_if(villagers_.begin(), villagers_.end(),
                                          [&](const Villager& w) { return w.id == target; }),
                           villagers_.end());
          for (auto& [eid, ids] : update) {
            (void)eid;
            ids.erase(target);
          }
        }
      }
    }
    if (dragon_hp_ <= 0) won_ = true;
  }

  fcl::Snapshot snapshot(std::int64_t step,
                         const std::map<std::string, std::set<std::string>>& update) const override {
    fcl::Snapshot s;
    s.step = step;
    for (const auto& v : villagers_) {
      fcl::Component c;
      c.type = "Villager";
      c.attrs["role"] = std::string(v.warrior ? "Warrior" : "Farmer");
      c.attrs["hp"] = v.hp;
      c.attrs["location"] = std::string(v.in_cave ? "Cave" : "Village");
      s.components[v.id] = std::move(c);
    }
    s.components["dragon"] = fcl::Component{"Dragon", {{"hp", dragon_hp_}}};
    s.components["farm"] = fcl::Component{"FarmSilo", {{"wheat", wheat_}}};
    s.ensembles = update;
    s.beyond_control["dragon"] = {{"hp", dragon_hp_}};
    s.beyond_control["farm"] = {{"wheat", wheat_}};
    return s;
  }

  bool terminal() const override { return won_; }

  Metrics metrics(std::int64_t final_step) const override {
    Metrics m;
    m["win"] = won_ ? 1 : 0;
    m["steps_to_win"] = won_ ? static_cast<double>(final_step) : 0;
    m["final_step"] = static_cast<double>(final_step);
    m["dragon_hp"] = static_cast<double>(dragon_hp_);
    m["villagers_alive"] = static_cast<double>(villagers_.size());
    return m;
  }

 private:
  Rng rng_;
  double counter_prob_;
  std::int64_t counter_damage_;
  std::vector<Villager> villagers_;
  std::int64_t dragon_hp_ = kDragonHp;
  std::int64_t wheat_ = 0;
  std::int64_t next_farmer_ = 1;
  std::int64_t next_warrior_ = 1;
  bool won_ = false;
};

class DragonScenario final : public Scenario {
 public:
  std::string name() const override { return "dragon"; }

  const adsl::ArchitectureSpec& spec() const override {
    static const adsl::ArchitectureSpec s = adsl::parse_adsl(assets::kDragonAdsl);
    return s;
  }

  std::string domain_text() const override { return assets::kDragonDomain; }

  const fcl::ConstraintDocument& constraints() const override {
    static const fcl::ConstraintDocument doc = fcl::parse_constraints(assets::kDragonFcl);
    return doc;
  }

  std::vector<ParamSpec> parameters() const override {
    return {
        {"farmer_count", 2, 0, 50, "farmers at the start"},
        {"warrior_count", 1, 0, 50, "warriors at the start"},
        {"counter_probability", 0.4, 0, 1, "chance the attacked dragon strikes back"},
        {"counter_damage", 2, 0, 10, "hit points a counterattack removes"},
    };
  }

  adsl::AttributeSchema runtime_schema() const override {
    adsl::AttributeSchema schema;
    schema.attrs_by_type["Villager"] = {"role", "hp", "location"};
    schema.attrs_by_type["Dragon"] = {"hp"};
    schema.attrs_by_type["FarmSilo"] = {"wheat"};
    return schema;
  }

  std::int64_t default_horizon() const override { return 30; }

  std::unique_ptr<Run> start(const adsl::InitialState& state) const override {
    return std::make_unique<DragonRun>(
        static_cast<std::int64_t>(param_or(state, "farmer_count", 2)),
        static_cast<std::int64_t>(param_or(state, "warrior_count", 1)),
        param_or(state, "counter_probability", 0.4),
        static_cast<std::int64_t>(param_or(state, "counter_damage", 2)),
        static_cast<std::uint64_t>(state.random_seed));
  }
};

// --- builtin adaptation managers ------------------------------------------

std::int64_t wheat_of(const am::AssignRequest& req) {
  auto it = req.beyond_control.find("farm");
  if (it == req.beyond_control.end()) return 0;
  auto w = it->second.find("wheat");
  if (w == it->second.end() || !fcl::is_int(w->second)) return 0;
  return std::get<std::int64_t>(w->second);
}

bool is_warrior(const fcl::AttrMap& attrs) {
  auto it = attrs.find("role");
  return it != attrs.end() && fcl::is_string(it->second) &&
         std::get<std::string>(it->second) == "Warrior";
}

/// Warriors head to the cave and attack; farmers farm and run the spawn plan
/// (three warrior spawns and three farmer spawns, warriors first, alternating).
class DragonBaselineAm final : public am::AmSession {
 public:
  am::AssignResponse invoke(const am::AssignRequest& req) override {
    am::AssignResponse resp;
    if (req.method == "assign_in_cave") {
      last_cave_count_ = static_cast<std::int64_t>(req.components.size());
      for (const auto& [id, attrs] : req.components) {
        (void)attrs;
        resp.assignments.emplace_back(id, "attack");
      }
      return resp;
    }
    std::vector<std::string> farmers;
    bool village_has_warrior = false;
    for (const auto& [id, attrs] : req.components) {
      if (is_warrior(attrs)) {
        resp.assignments.emplace_back(id, "cave");
        village_has_warrior = true;
      } else {
        farmers.push_back(id);
      }
    }
    const std::int64_t wheat = wheat_of(req);
    bool spawn_warrior = false;
    bool spawn_farmer = false;
    if (spawned_warriors_ < 3 || spawned_farmers_ < 3) {
      const bool warrior_turn =
          spawned_farmers_ >= 3 ||
          (spawned_warriors_ < 3 && spawned_warriors_ <= spawned_farmers_);
      if (warrior_turn) {
        spawn_warrior = wheat >= kWarriorCost;
      } else {
        spawn_farmer = wheat >= kFarmerCost;
      }
    } else if (last_cave_count_ == 0 && !village_has_warrior && wheat >= kWarriorCost) {
      spawn_warrior = true;  // every warrior died; restock
    }
    const char* group = "farm";
    if (farmers.size() >= 2 && spawn_warrior) {
      group = "spawn warrior";
      ++spawned_warriors_;
    } else if (farmers.size() >= 2 && spawn_farmer) {
      group = "spawn farmer";
      ++spawned_farmers_;
    }
    for (const auto& id : farmers) resp.assignments.emplace_back(id, group);
    return resp;
  }

 private:
  int spawned_warriors_ = 0;
  int spawned_farmers_ = 0;
  std::int64_t last_cave_count_ = -1;
};

/// Everyone farms forever; cave dwellers stay put. Loses and violates the
/// functional constraints without breaking any generic rule.
class DragonIdleAm final : public am::AmSession {
 public:
  am::AssignResponse invoke(const am::AssignRequest& req) override {
    am::AssignResponse resp;
    const char* group = req.method == "assign_in_cave" ? "cave" : "farm";
    for (const auto& [id, attrs] : req.components) {
      (void)attrs;
      resp.assignments.emplace_back(id, group);
    }
    return resp;
  }
};

/// Assigns the first villager to two groups at once.
class DragonDoubleAssignAm final : public am::AmSession {
 public:
  am::AssignResponse invoke(const am::AssignRequest& req) override {
    am::AssignResponse resp;
    const char* group = req.method == "assign_in_cave" ? "attack" : "farm";
    for (const auto& [id, attrs] : req.components) {
      (void)attrs;
      resp.assignments.emplace_back(id, group);
    }
    if (req.method == "assign_in_village" && !req.components.empty()) {
      resp.assignments.emplace_back(req.components.front().first, "cave");
    }
    return resp;
  }
};

/// Sends everyone to the cave, then assigns cave villagers to "farm", which
/// is not among assign_in_cave's groups.
class DragonWrongEnsembleAm final : public am::AmSession {
 public:
  am::AssignResponse invoke(const am::AssignRequest& req) override {
    am::AssignResponse resp;
    const char* group = req.method == "assign_in_cave" ? "farm" : "cave";
    for (const auto& [id, attrs] : req.components) {
      (void)attrs;
      resp.assignments.emplace_back(id, group);
    }
    return resp;
  }
};

}  // namespace

const Scenario& dragon_scenario() {
  static const DragonScenario s;
  return s;
}

void register_dragon_builtins() {
  am::register_builtin("dragon_baseline",
                       [] { return std::make_unique<DragonBaselineAm>(); });
  am::register_builtin("dragon_idle", [] { return std::make_unique<DragonIdleAm>(); });
  am::register_builtin("dragon_double_assign",
                       [] { return std::make_unique<DragonDoubleAssignAm>(); });
  am::register_builtin("dragon_wrong_ensemble",
                       [] { return std::make_unique<DragonWrongEnsembleAm>(); });
}

}  // namespace fclv::scn
