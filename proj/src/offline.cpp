#include "fclverify/offline.hpp"

#include <algorithm>
#include <cmath>

#include "eval_core.hpp"
#include "fclverify/errors.hpp"

namespace fclv::fcl {

using detail::Binding;
using detail::IdSet;
using detail::LetSets;
using detail::Scope;

std::int64_t resolve_bound(const Bound& b, std::int64_t i, std::int64_t L, BoundKind kind,
                           const Bound* paired_window) {
  const std::int64_t max_v = L - 1 - i;
  const std::int64_t beg_v = i;
  auto scaled = [&](const Bound& s) {
    const std::int64_t base = s.base == EndcountKind::Max ? max_v : beg_v;
    return static_cast<std::int64_t>(std::floor(s.factor * static_cast<double>(base)));
  };
  if (kind == BoundKind::CountN) {
    switch (b.kind) {
      case Bound::Kind::Literal: return b.literal;
      case Bound::Kind::Max: return max_v;
      case Bound::Kind::Beg: return beg_v;
      case Bound::Kind::Scaled: return scaled(b);
      case Bound::Kind::Inf:
        if (paired_window == nullptr ||
            (paired_window->kind != Bound::Kind::Inf && paired_window->kind != Bound::Kind::Max)) {
          throw EvalError("INF as a count requires an INF or MAX window", "INF", i);
        }
        return max_v;  // globally: same value as the resolved window
    }
  }
  // window position: signed, negative = backward; clamped to the trace
  switch (b.kind) {
    case Bound::Kind::Literal:
      if (b.literal >= 0) return std::min(b.literal, max_v);
      return -std::min(-b.literal, beg_v);
    case Bound::Kind::Max:
    case Bound::Kind::Inf: return max_v;
    case Bound::Kind::Beg: return -beg_v;
    case Bound::Kind::Scaled:
      return b.base == EndcountKind::Max ? scaled(b) : -scaled(b);
  }
  return 0;
}

bool eval_state(const Formula& f, const Snapshot& s, const StateContext& ctx) {
  static const std::vector<std::pair<std::string, SetExprPtr>> no_lets;
  LetSets lets = detail::materialize_lets(ctx.lets ? *ctx.lets : no_lets, s, ctx.step, ctx.length);
  Binding vars = ctx.vars;
  return detail::do_formula(f, Scope{&s, ctx.step, ctx.length, &lets, &vars, nullptr});
}

Value eval_expr(const Expr& e, const Snapshot& s, const StateContext& ctx) {
  static const std::vector<std::pair<std::string, SetExprPtr>> no_lets;
  LetSets lets = detail::materialize_lets(ctx.lets ? *ctx.lets : no_lets, s, ctx.step, ctx.length);
  Binding vars = ctx.vars;
  return detail::do_expr(e, Scope{&s, ctx.step, ctx.length, &lets, &vars, nullptr});
}

std::set<std::string> eval_set(const SetExpr& se, const Snapshot& s, const StateContext& ctx) {
  static const std::vector<std::pair<std::string, SetExprPtr>> no_lets;
  LetSets lets = detail::materialize_lets(ctx.lets ? *ctx.lets : no_lets, s, ctx.step, ctx.length);
  Binding vars = ctx.vars;
  return detail::do_set(se, Scope{&s, ctx.step, ctx.length, &lets, &vars, nullptr});
}

// --------------------------------------------------------------------------
// whole-trace evaluation

namespace {

enum class Outcome { Satisfied, Violated, Cancelled };

struct WithinResult {
  Outcome outcome = Outcome::Satisfied;
  std::int64_t trues = 0;
  std::int64_t falses = 0;
  std::int64_t required = 0;
  std::int64_t window = 0;
};

struct OfflineEval {
  const Constraint& c;
  const Trace& tr;
  ConstraintShape shape;
  std::int64_t L;

  std::vector<LetSets> lets_by_step;
  std::vector<std::vector<Binding>> tuples_by_step;
  std::vector<std::set<std::string>> tuple_keys_by_step;
  std::map<std::tuple<const Formula*, std::int64_t, std::string>, bool> body_cache;
  detail::WithinHandler within_handler;

  OfflineEval(const Constraint& c, const Trace& tr)
      : c(c), tr(tr), shape(classify(c)), L(tr.length()) {
    within_handler = [this](const Formula& node, const Scope& sc) {
      const auto& w = std::get<Formula::Within>(node.node);
      WithinResult r = eval_within(w, sc.step, *sc.vars, /*obligation=*/false);
      return r.outcome == Outcome::Satisfied;
    };
    lets_by_step.reserve(static_cast<std::size_t>(L));
    tuples_by_step.resize(static_cast<std::size_t>(L));
    tuple_keys_by_step.resize(static_cast<std::size_t>(L));
    for (std::int64_t i = 0; i < L; ++i) {
      lets_by_step.push_back(detail::materialize_lets(c.lets, tr.at(i), i, L));
      Binding vars;
      Scope base = scope_at(i, vars);
      tuples_by_step[static_cast<std::size_t>(i)] = detail::enumerate_prefix(shape.prefix, base);
      for (const auto& t : tuples_by_step[static_cast<std::size_t>(i)]) {
        tuple_keys_by_step[static_cast<std::size_t>(i)].insert(detail::binding_key(t));
      }
    }
  }

  Scope scope_at(std::int64_t step, Binding& vars) {
    return Scope{&tr.at(step),        step, L, &lets_by_step[static_cast<std::size_t>(step)],
                 &vars,               &within_handler};
  }

  bool eval_formula(const Formula& f, std::int64_t step, Binding& vars) {
    Scope sc = scope_at(step, vars);
    return detail::do_formula(f, sc);
  }

  bool eval_body_cached(const Formula& f, std::int64_t step, Binding& vars) {
    auto key = std::make_tuple(&f, step, detail::binding_key(vars));
    if (auto it = body_cache.find(key); it != body_cache.end()) return it->second;
    bool v = eval_formula(f, step, vars);
    body_cache.emplace(std::move(key), v);
    return v;
  }

  bool binding_missing(const Binding& vars, std::int64_t step) const {
    const auto& comps = tr.at(step).components;
    for (const auto& [var, val] : vars) {
      (void)var;
      if (is_ref(val) && comps.find(std::get<ComponentRef>(val).id) == comps.end()) return true;
    }
    return false;
  }

  // Earliest step e <= anchor such that the prefix binding was in its domain
  // at every step of [e, anchor]. History for backward windows starts there;
  // matches the online monitor's per-binding ring buffers.
  std::int64_t domain_run_start(const Binding& vars, std::int64_t anchor) const {
    if (shape.prefix.empty()) return 0;
    Binding proj;
    for (const auto& [var, domain] : shape.prefix) {
      (void)domain;
      auto it = vars.find(var);
      if (it != vars.end()) proj[var] = it->second;
    }
    const std::string key = detail::binding_key(proj);
    if (tuple_keys_by_step[static_cast<std::size_t>(anchor)].count(key) == 0) return 0;
    std::int64_t e = anchor;
    while (e > 0 && tuple_keys_by_step[static_cast<std::size_t>(e - 1)].count(key) > 0) --e;
    return e;
  }

  WithinResult eval_within(const Formula::Within& w, std::int64_t anchor, Binding& vars,
                           bool obligation) {
    WithinResult r;
    const std::int64_t n = resolve_bound(w.count, anchor, L, BoundKind::CountN, &w.window);
    const std::int64_t t = resolve_bound(w.window, anchor, L, BoundKind::WindowT);
    r.required = n;
    r.window = t < 0 ? -t : t;
    if (n <= 0) return r;  // vacuously satisfied
    std::int64_t first;
    std::int64_t last;
    if (t >= 0) {
      first = anchor + 1;
      last = anchor + t;
    } else {
      first = anchor + t;
      last = anchor - 1;
      std::int64_t run = domain_run_start(vars, anchor);
      if (first < run) first = run;
      r.window = last - first + 1;
    }
    const std::int64_t width = last - first + 1;
    if (n > width) {
      r.outcome = Outcome::Violated;
      return r;
    }
    for (std::int64_t j = first; j <= last; ++j) {
      if (obligation && binding_missing(vars, j)) {
        r.outcome = Outcome::Cancelled;
        return r;
      }
      const bool v = eval_body_cached(*w.body, j, vars);
      v ? ++r.trues : ++r.falses;
      if (r.trues >= n) return r;  // Satisfied
      if (r.falses > width - n) {
        r.outcome = Outcome::Violated;
        return r;
      }
    }
    r.outcome = r.trues >= n ? Outcome::Satisfied : Outcome::Violated;
    return r;
  }

  Violation make_violation(std::int64_t anchor, const Binding& tuple, const std::string& sub,
                           const std::string& what, const WithinResult* wr, int cindex) const {
    Violation v;
    v.constraint = c.description;
    v.kind = Violation::Kind::Functional;
    v.step = anchor;
    v.binding = detail::binding_names(tuple);
    v.subformula = sub;
    v.constraint_index = cindex;
    std::string detail_text = what;
    if (!tuple.empty()) detail_text += " [" + binding_text(v.binding) + "]";
    if (wr) {
      v.observed_true = wr->trues;
      v.observed_false = wr->falses;
      v.required = wr->required;
      v.window = wr->window;
      detail_text += " (observed " + std::to_string(wr->trues) + " true of required " +
                     std::to_string(wr->required) + " in a window of " + std::to_string(wr->window) +
                     " step(s) at step " + std::to_string(anchor) + ")";
    } else {
      detail_text += " (at step " + std::to_string(anchor) + ")";
    }
    v.detail = detail_text;
    return v;
  }

  std::vector<Violation> run(int cindex) {
    std::vector<Violation> all;
    std::set<std::string> violated_bindings;

    for (std::int64_t i = 0; i < L; ++i) {
      for (const auto& tuple : tuples_by_step[static_cast<std::size_t>(i)]) {
        const std::string key = detail::binding_key(tuple);
        if (violated_bindings.count(key)) continue;
        Binding vars = tuple;
        switch (shape.core) {
          case ConstraintShape::Core::TopWithin: {
            const bool entering =
                i == 0 || tuple_keys_by_step[static_cast<std::size_t>(i - 1)].count(key) == 0;
            if (!entering) break;
            const auto& w = std::get<Formula::Within>(shape.within_node->node);
            WithinResult r = eval_within(w, i, vars, /*obligation=*/true);
            if (r.outcome == Outcome::Violated) {
              all.push_back(make_violation(i, tuple, render(*shape.within_node),
                                           render(*shape.within_node) + " does not hold", &r,
                                           cindex));
              violated_bindings.insert(key);
            }
            break;
          }
          case ConstraintShape::Core::Implication: {
            if (!eval_formula(*shape.antecedent, i, vars)) break;
            if (shape.consequent_is_within) {
              const auto& w = std::get<Formula::Within>(shape.within_node->node);
              WithinResult r = eval_within(w, i, vars, /*obligation=*/true);
              if (r.outcome == Outcome::Violated) {
                all.push_back(make_violation(i, tuple, render(*shape.core_formula),
                                             render(*shape.antecedent) + " held but " +
                                                 render(*shape.within_node) + " does not",
                                             &r, cindex));
                violated_bindings.insert(key);
              }
            } else if (!eval_formula(*shape.consequent, i, vars)) {
              all.push_back(make_violation(i, tuple, render(*shape.core_formula),
                                           render(*shape.antecedent) + " held but " +
                                               render(*shape.consequent) + " is false",
                                           nullptr, cindex));
              violated_bindings.insert(key);
            }
            break;
          }
          case ConstraintShape::Core::State: {
            if (!eval_formula(*shape.core_formula, i, vars)) {
              all.push_back(make_violation(i, tuple, render(*shape.core_formula),
                                           render(*shape.core_formula) + " is false", nullptr,
                                           cindex));
              violated_bindings.insert(key);
            }
            break;
          }
        }
      }
    }
    std::stable_sort(all.begin(), all.end(), report_less);
    return all;
  }
};

}  // namespace

std::vector<Violation> offline_violations(const Constraint& c, const Trace& tr, int cindex) {
  if (tr.length() < 1) throw Error("trace must contain at least the initial snapshot");
  OfflineEval ev(c, tr);
  return ev.run(cindex);
}

Verdict eval_offline(const Constraint& c, const Trace& tr) {
  Verdict v;
  auto violations = offline_violations(c, tr, -1);
  if (!violations.empty()) {
    v.satisfied = false;
    v.witness = violations.front();
  }
  return v;
}

FormulaPtr ltl_bridge(LtlOp op, FormulaPtr phi) {
  switch (op) {
    case LtlOp::Next:
      return make_formula(Formula::Within{Bound::lit(1), Bound::lit(1), std::move(phi)});
    case LtlOp::Future:
      return make_formula(Formula::Within{Bound::lit(1), Bound::inf(), std::move(phi)});
    default:
      return make_formula(Formula::Within{Bound::inf(), Bound::inf(), std::move(phi)});
  }
}

}  // namespace fclv::fcl
