#include "fclverify/online.hpp"

#include <algorithm>

#include <json.hpp>

#include "eval_core.hpp"
#include "fclverify/errors.hpp"
#include "fclverify/offline.hpp"

namespace fclv::fcl {

using detail::Binding;
using detail::LetSets;
using detail::Scope;
using nlohmann::json;

namespace {

struct Ob {
  int cidx = -1;
  std::int64_t anchor = 0;
  Binding binding;
  Bound count_b;
  Bound window_b;
  const Formula* within_node = nullptr;
  std::int64_t trues = 0;
  std::int64_t falses = 0;
  TemporalObligation::Status status = TemporalObligation::Status::Pending;
  bool frozen = false;
  std::int64_t window_last = -1;  // absolute index of the nominal window end, -1 unknown
  bool can_early_violate = true;
};

struct Loaded {
  Constraint c;
  ConstraintShape shape;
  bool deferred = false;
  std::set<std::string> prev_keys;
  std::map<const Formula*, int> neg_index;
  std::vector<std::int64_t> neg_cap;  // ring capacity per backward within; -1 unbounded
  std::map<std::pair<int, std::string>, std::deque<char>> buffers;
};

}  // namespace

struct Monitor::Impl {
  MonitorOptions options;
  ConstraintDocument doc;
  std::vector<Loaded> cons;
  std::vector<Ob> obligations;
  std::vector<Violation> emitted;
  std::vector<std::string> notes;
  std::int64_t next_step = 0;
  std::optional<std::int64_t> L_known;
  bool finished = false;
  bool any_deferred = false;
  std::vector<Snapshot> retained;

  explicit Impl(ConstraintDocument d, MonitorOptions opts) : options(opts), doc(std::move(d)) {
    for (std::size_t k = 0; k < doc.constraints.size(); ++k) {
      const Constraint& c = doc.constraints[k];
      auto problems = validate(c);
      if (!problems.empty()) {
        throw Error("constraint \"" + c.description + "\" is malformed: " + problems.front());
      }
      Loaded lc;
      lc.c = c;  // shares the formula graph; shape pointers stay valid
      lc.shape = classify(lc.c);
      if (!lc.shape.online_ok()) {
        throw SubsetError(c.description, lc.shape.online_rejections);
      }
      for (std::size_t ni = 0; ni < lc.shape.negative_withins.size(); ++ni) {
        const Formula* node = lc.shape.negative_withins[ni];
        lc.neg_index[node] = static_cast<int>(ni);
        const Bound& w = std::get<Formula::Within>(node->node).window;
        lc.neg_cap.push_back(w.kind == Bound::Kind::Literal ? -w.literal : -1);
      }
      cons.push_back(std::move(lc));
    }
  }

  std::int64_t eval_length() const {
    // only used by state evaluation when endcounts are trusted-live
    return L_known ? *L_known : next_step + 1;
  }

  bool binding_missing(const Binding& b, const Snapshot& s) const {
    for (const auto& [var, val] : b) {
      (void)var;
      if (is_ref(val) && s.components.find(std::get<ComponentRef>(val).id) == s.components.end()) {
        return true;
      }
    }
    return false;
  }

  // n' upper bound under the best available length information; nullopt when
  // it cannot be bounded yet (MAX-dependent with no announced length).
  std::optional<std::int64_t> count_upper(const Ob& ob) const {
    if (!depends_on_max(ob.count_b)) {
      return resolve_bound(ob.count_b, ob.anchor, std::max<std::int64_t>(next_step, ob.anchor + 1),
                           BoundKind::CountN, &ob.window_b);
    }
    if (L_known) return resolve_bound(ob.count_b, ob.anchor, *L_known, BoundKind::CountN, &ob.window_b);
    return std::nullopt;
  }

  // slack upper bound t'-n' (sound for the gate-allowed combinations)
  std::optional<std::int64_t> slack_upper(const Ob& ob) const {
    if (L_known) {
      const std::int64_t n = resolve_bound(ob.count_b, ob.anchor, *L_known, BoundKind::CountN,
                                           &ob.window_b);
      const std::int64_t t = resolve_bound(ob.window_b, ob.anchor, *L_known, BoundKind::WindowT);
      return t - n;
    }
    if (ob.window_b.kind == Bound::Kind::Literal && !depends_on_max(ob.count_b)) {
      const std::int64_t n = resolve_bound(ob.count_b, ob.anchor, ob.anchor + 1, BoundKind::CountN,
                                           &ob.window_b);
      return ob.window_b.literal - n;
    }
    return std::nullopt;
  }

  void try_resolve(Ob& ob, std::vector<Violation>& out) {
    if (ob.status != TemporalObligation::Status::Pending) return;
    auto n_up = count_upper(ob);
    if (n_up && *n_up <= 0) {
      ob.status = TemporalObligation::Status::Satisfied;
      return;
    }
    if (n_up && ob.trues >= *n_up) {
      ob.status = TemporalObligation::Status::Satisfied;
      return;
    }
    if (ob.can_early_violate || options.trusted_length) {
      auto slack = slack_upper(ob);
      if (slack && ob.falses > *slack) {
        ob.status = TemporalObligation::Status::Violated;
        out.push_back(obligation_violation(ob, n_up.value_or(-1)));
      }
    }
  }

  Violation obligation_violation(const Ob& ob, std::int64_t required) const {
    const Loaded& lc = cons[static_cast<std::size_t>(ob.cidx)];
    Violation v;
    v.constraint = lc.c.description;
    v.kind = Violation::Kind::Functional;
    v.step = ob.anchor;
    v.binding = detail::binding_names(ob.binding);
    v.constraint_index = ob.cidx;
    v.subformula = render(*ob.within_node);
    v.observed_true = ob.trues;
    v.observed_false = ob.falses;
    v.required = required;
    v.window = ob.window_last >= 0 ? ob.window_last - ob.anchor : -1;
    std::string what;
    if (lc.shape.core == ConstraintShape::Core::Implication) {
      what = render(*lc.shape.antecedent) + " held but " + v.subformula + " does not";
    } else {
      what = v.subformula + " does not hold";
    }
    if (!v.binding.empty()) what += " [" + binding_text(v.binding) + "]";
    what += " (observed " + std::to_string(ob.trues) + " true of required " +
            (required >= 0 ? std::to_string(required) : std::string("n")) + " in a window of " +
            (v.window >= 0 ? std::to_string(v.window) : std::string("MAX")) + " step(s) at step " +
            std::to_string(ob.anchor) + ")";
    v.detail = what;
    return v;
  }

  Violation state_violation(const Loaded& lc, int cidx, std::int64_t anchor, const Binding& tuple,
                            const std::string& what, const std::string& sub) const {
    Violation v;
    v.constraint = lc.c.description;
    v.kind = Violation::Kind::Functional;
    v.step = anchor;
    v.binding = detail::binding_names(tuple);
    v.constraint_index = cidx;
    v.subformula = sub;
    std::string d = what;
    if (!tuple.empty()) d += " [" + binding_text(v.binding) + "]";
    d += " (at step " + std::to_string(anchor) + ")";
    v.detail = d;
    return v;
  }

  void spawn(int cidx, std::int64_t anchor, const Binding& tuple, const Formula* within_node,
             std::vector<Violation>& out) {
    const auto& w = std::get<Formula::Within>(within_node->node);
    Ob ob;
    ob.cidx = cidx;
    ob.anchor = anchor;
    ob.binding = tuple;
    ob.count_b = w.count;
    ob.window_b = w.window;
    ob.within_node = within_node;
    ob.can_early_violate = !(depends_on_max(w.count) && !depends_on_max(w.window));
    if (L_known) {
      ob.window_last = anchor + resolve_bound(w.window, anchor, *L_known, BoundKind::WindowT);
    } else if (w.window.kind == Bound::Kind::Literal) {
      ob.window_last = anchor + w.window.literal;
    }
    try_resolve(ob, out);
    obligations.push_back(std::move(ob));
  }

  // Antecedents and state formulas: backward withins read the history buffers.
  bool eval_online_state(Loaded& lc, const Formula& f, const Snapshot& snap, std::int64_t i,
                         const LetSets& lets, Binding& vars) {
    detail::WithinHandler handler = [&](const Formula& node, const Scope& sc) -> bool {
      auto it = lc.neg_index.find(&node);
      if (it == lc.neg_index.end()) {
        throw EvalError("unexpected temporal operator in online state evaluation", "within",
                        sc.step);
      }
      const auto& w = std::get<Formula::Within>(node.node);
      const std::int64_t L_eff = eval_length();
      const std::int64_t n = resolve_bound(w.count, i, L_eff, BoundKind::CountN, &w.window);
      std::int64_t t = resolve_bound(w.window, i, L_eff, BoundKind::WindowT);
      if (t > 0) t = 0;  // backward windows only
      const std::int64_t want = -t;
      if (n <= 0) return true;
      Binding proj;
      for (const auto& [var, domain] : lc.shape.prefix) {
        (void)domain;
        auto vit = sc.vars->find(var);
        if (vit != sc.vars->end()) proj[var] = vit->second;
      }
      auto bit = lc.buffers.find({it->second, detail::binding_key(proj)});
      const std::int64_t have =
          bit == lc.buffers.end() ? 0 : static_cast<std::int64_t>(bit->second.size());
      const std::int64_t width = std::min(want, have);
      if (n > width) return false;
      std::int64_t trues = 0;
      for (std::int64_t k = have - width; k < have; ++k) {
        if (bit->second[static_cast<std::size_t>(k)]) ++trues;
      }
      return trues >= n;
    };
    Scope sc{&snap, i, eval_length(), &lets, &vars, &handler};
    return detail::do_formula(f, sc);
  }

  std::vector<Violation> step(const Snapshot& s, std::optional<std::int64_t> known_length) {
    if (finished) throw Error("monitor already finished");
    if (s.step != next_step) {
      throw EvalError("snapshots must arrive in step order", "step " + std::to_string(s.step),
                      next_step);
    }
    if (next_step == 0) {
      L_known = known_length;
      for (auto& lc : cons) {
        lc.deferred = lc.shape.state_needs_length && !(options.trusted_length && L_known);
        any_deferred = any_deferred || lc.deferred;
      }
    } else if (known_length && L_known != known_length) {
      throw Error("announced trace length changed mid-run");
    }
    if (L_known && next_step >= *L_known) {
      throw Error("more steps than the announced trace length");
    }

    const std::int64_t i = next_step;
    std::vector<Violation> out;
    if (any_deferred) retained.push_back(s);

    // lets are shared between obligation feeding and anchor evaluation
    std::vector<LetSets> lets_now(cons.size());
    std::vector<bool> lets_ready(cons.size(), false);
    auto lets_for = [&](std::size_t k) -> const LetSets& {
      if (!lets_ready[k]) {
        lets_now[k] = detail::materialize_lets(cons[k].c.lets, s, i, eval_length());
        lets_ready[k] = true;
      }
      return lets_now[k];
    };

    // feed pending obligations anchored before this step
    for (auto& ob : obligations) {
      if (ob.status != TemporalObligation::Status::Pending || ob.frozen) continue;
      if (ob.anchor >= i) continue;
      if (ob.window_last >= 0 && i > ob.window_last) continue;
      if (binding_missing(ob.binding, s)) {
        ob.frozen = true;
        continue;
      }
      const auto& w = std::get<Formula::Within>(ob.within_node->node);
      Binding vars = ob.binding;
      Scope sc{&s, i, eval_length(), &lets_for(static_cast<std::size_t>(ob.cidx)), &vars, nullptr};
      const bool v = detail::do_formula(*w.body, sc);
      v ? ++ob.trues : ++ob.falses;
      try_resolve(ob, out);
    }

    // anchor evaluation per constraint
    for (std::size_t k = 0; k < cons.size(); ++k) {
      Loaded& lc = cons[k];
      if (lc.deferred) continue;
      const LetSets& lets = lets_for(k);
      Binding base_vars;
      Scope base{&s, i, eval_length(), &lets, &base_vars, nullptr};
      std::vector<Binding> tuples = detail::enumerate_prefix(lc.shape.prefix, base);
      std::set<std::string> keys_now;
      for (const auto& t : tuples) keys_now.insert(detail::binding_key(t));

      for (const auto& tuple : tuples) {
        const std::string key = detail::binding_key(tuple);
        Binding vars = tuple;
        switch (lc.shape.core) {
          case ConstraintShape::Core::TopWithin: {
            const bool entering = i == 0 || lc.prev_keys.count(key) == 0;
            if (entering) spawn(static_cast<int>(k), i, tuple, lc.shape.within_node, out);
            break;
          }
          case ConstraintShape::Core::Implication: {
            if (!eval_online_state(lc, *lc.shape.antecedent, s, i, lets, vars)) break;
            if (lc.shape.consequent_is_within) {
              spawn(static_cast<int>(k), i, tuple, lc.shape.within_node, out);
            } else if (!eval_online_state(lc, *lc.shape.consequent, s, i, lets, vars)) {
              out.push_back(state_violation(lc, static_cast<int>(k), i, tuple,
                                            render(*lc.shape.antecedent) + " held but " +
                                                render(*lc.shape.consequent) + " is false",
                                            render(*lc.shape.core_formula)));
            }
            break;
          }
          case ConstraintShape::Core::State: {
            if (!eval_online_state(lc, *lc.shape.core_formula, s, i, lets, vars)) {
              out.push_back(state_violation(lc, static_cast<int>(k), i, tuple,
                                            render(*lc.shape.core_formula) + " is false",
                                            render(*lc.shape.core_formula)));
            }
            break;
          }
        }
      }

      // push history for this step; a gap in domain membership resets it
      if (!lc.neg_index.empty()) {
        for (auto it = lc.buffers.begin(); it != lc.buffers.end();) {
          if (keys_now.count(it->first.second) == 0) {
            it = lc.buffers.erase(it);
          } else {
            ++it;
          }
        }
        for (const auto& tuple : tuples) {
          const std::string key = detail::binding_key(tuple);
          for (const auto& [node, idx] : lc.neg_index) {
            const auto& w = std::get<Formula::Within>(node->node);
            Binding vars = tuple;
            Scope sc{&s, i, eval_length(), &lets, &vars, nullptr};
            const bool v = detail::do_formula(*w.body, sc);
            auto& buf = lc.buffers[{idx, key}];
            buf.push_back(v ? 1 : 0);
            const std::int64_t cap = lc.neg_cap[static_cast<std::size_t>(idx)];
            if (cap >= 0 && static_cast<std::int64_t>(buf.size()) > cap) buf.pop_front();
          }
        }
      }
      lc.prev_keys = std::move(keys_now);
    }

    ++next_step;
    std::stable_sort(out.begin(), out.end(), report_less);
    emitted.insert(emitted.end(), out.begin(), out.end());
    return out;
  }

  std::vector<Violation> do_finish() {
    if (finished) return {};
    finished = true;
    const std::int64_t L = next_step;
    std::vector<Violation> out;

    if (any_deferred && L > 0) {
      ConstraintDocument sub_doc;
      std::vector<int> sub2main;
      for (std::size_t k = 0; k < cons.size(); ++k) {
        if (cons[k].deferred) {
          sub_doc.constraints.push_back(cons[k].c);
          sub2main.push_back(static_cast<int>(k));
        }
      }
      Monitor sub(std::move(sub_doc), MonitorOptions{.trusted_length = true});
      std::vector<Violation> sub_out;
      for (const auto& snap : retained) {
        auto vs = sub.step(snap, L);
        sub_out.insert(sub_out.end(), vs.begin(), vs.end());
      }
      auto vs = sub.finish();
      sub_out.insert(sub_out.end(), vs.begin(), vs.end());
      for (auto& v : sub_out) {
        v.constraint_index = sub2main[static_cast<std::size_t>(v.constraint_index)];
        out.push_back(std::move(v));
      }
      for (auto& ob : sub.impl_->obligations) {
        ob.cidx = sub2main[static_cast<std::size_t>(ob.cidx)];
        obligations.push_back(std::move(ob));
      }
      for (const auto& n : sub.impl_->notes) notes.push_back(n);
    }

    for (auto& ob : obligations) {
      if (ob.status != TemporalObligation::Status::Pending) continue;
      const std::int64_t n = L > ob.anchor
                                 ? resolve_bound(ob.count_b, ob.anchor, L, BoundKind::CountN,
                                                 &ob.window_b)
                                 : 0;
      const std::int64_t t = L > ob.anchor
                                 ? resolve_bound(ob.window_b, ob.anchor, L, BoundKind::WindowT)
                                 : 0;
      ob.window_last = ob.anchor + t;
      if (n <= 0 || ob.trues >= n) {
        ob.status = TemporalObligation::Status::Satisfied;
        continue;
      }
      if (ob.frozen) {
        if (ob.falses > t - n) {
          ob.status = TemporalObligation::Status::Violated;
          out.push_back(obligation_violation(ob, n));
        } else {
          ob.status = TemporalObligation::Status::Cancelled;
          const Loaded& lc = cons[static_cast<std::size_t>(ob.cidx)];
          notes.push_back("obligation cancelled (component removed): \"" + lc.c.description +
                          "\" anchor " + std::to_string(ob.anchor) + " [" +
                          binding_text(detail::binding_names(ob.binding)) + "]");
        }
        continue;
      }
      ob.status = TemporalObligation::Status::Violated;
      out.push_back(obligation_violation(ob, n));
    }

    std::stable_sort(out.begin(), out.end(), report_less);
    emitted.insert(emitted.end(), out.begin(), out.end());
    return out;
  }
};

Monitor::Monitor(ConstraintDocument doc, MonitorOptions options)
    : impl_(std::make_unique<Impl>(std::move(doc), options)) {}
Monitor::~Monitor() = default;
Monitor::Monitor(Monitor&&) noexcept = default;
Monitor& Monitor::operator=(Monitor&&) noexcept = default;

std::vector<Violation> Monitor::step(const Snapshot& s, std::optional<std::int64_t> known_length) {
  return impl_->step(s, known_length);
}

std::vector<Violation> Monitor::finish() { return impl_->do_finish(); }

bool Monitor::finished() const { return impl_->finished; }
std::int64_t Monitor::steps_seen() const { return impl_->next_step; }
const std::vector<std::string>& Monitor::notes() const { return impl_->notes; }

std::vector<TemporalObligation> Monitor::obligations() const {
  std::vector<TemporalObligation> out;
  for (const auto& ob : impl_->obligations) {
    TemporalObligation t;
    t.constraint_index = ob.cidx;
    t.anchor = ob.anchor;
    t.binding = detail::binding_names(ob.binding);
    t.observed_true = ob.trues;
    t.observed_false = ob.falses;
    t.status = ob.status;
    if (impl_->L_known || impl_->finished) {
      const std::int64_t L = impl_->finished ? impl_->next_step : *impl_->L_known;
      if (L > ob.anchor) {
        t.required = resolve_bound(ob.count_b, ob.anchor, L, BoundKind::CountN, &ob.window_b);
        t.window = resolve_bound(ob.window_b, ob.anchor, L, BoundKind::WindowT);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Violation> Monitor::all_violations() const {
  auto out = impl_->emitted;
  std::stable_sort(out.begin(), out.end(), report_less);
  return out;
}

std::size_t Monitor::pending_count() const {
  std::size_t n = 0;
  for (const auto& ob : impl_->obligations) {
    if (ob.status == TemporalObligation::Status::Pending) ++n;
  }
  return n;
}

// --------------------------------------------------------------------------
// violation records

std::string violation_to_record(const Violation& v) {
  json j;
  j["type"] = "violation";
  j["constraint"] = v.constraint;
  j["kind"] = v.kind == Violation::Kind::Generic ? "generic" : "functional";
  j["step"] = v.step;
  j["binding"] = v.binding;
  j["detail"] = v.detail;
  j["subformula"] = v.subformula;
  j["observed_true"] = v.observed_true;
  j["observed_false"] = v.observed_false;
  j["required"] = v.required;
  j["window"] = v.window;
  j["constraint_index"] = v.constraint_index;
  j["initial_state"] = v.initial_state;
  return j.dump();
}

Violation violation_from_record(const std::string& line) {
  json j = json::parse(line);
  Violation v;
  v.constraint = j.at("constraint").get<std::string>();
  v.kind = j.at("kind").get<std::string>() == "generic" ? Violation::Kind::Generic
                                                        : Violation::Kind::Functional;
  v.step = j.at("step").get<std::int64_t>();
  for (const auto& [key, val] : j.at("binding").items()) v.binding[key] = val.get<std::string>();
  v.detail = j.at("detail").get<std::string>();
  v.subformula = j.value("subformula", std::string{});
  v.observed_true = j.value("observed_true", std::int64_t{0});
  v.observed_false = j.value("observed_false", std::int64_t{0});
  v.required = j.value("required", std::int64_t{0});
  v.window = j.value("window", std::int64_t{0});
  v.constraint_index = j.value("constraint_index", -1);
  v.initial_state = j.value("initial_state", std::string{});
  return v;
}

std::string render_violations_text(const std::vector<Violation>& vs) {
  auto sorted = vs;
  std::stable_sort(sorted.begin(), sorted.end(), report_less);
  std::string out;
  for (const auto& v : sorted) {
    out += "- ";
    out += v.kind == Violation::Kind::Generic ? "[generic] " : "[functional] ";
    if (!v.initial_state.empty()) out += "(initial state \"" + v.initial_state + "\") ";
    out += v.constraint;
    out += ": ";
    out += v.detail;
    out += "\n";
  }
  return out;
}

}  // namespace fclv::fcl
