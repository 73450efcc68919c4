#include "eval_core.hpp"

#include <algorithm>

namespace fclv::fcl::detail {

std::string binding_key(const Binding& b) {
  std::string key;
  for (const auto& [var, val] : b) {
    key += var;
    key += '=';
    key += is_ref(val) ? std::get<ComponentRef>(val).id : to_text(val);
    key += ';';
  }
  return key;
}

std::map<std::string, std::string> binding_names(const Binding& b) {
  std::map<std::string, std::string> out;
  for (const auto& [var, val] : b) {
    out[var] = is_ref(val) ? std::get<ComponentRef>(val).id : to_text(val);
  }
  return out;
}

namespace {

IdSet type_set(const Snapshot& s, const std::string& name) {
  IdSet out;
  for (const auto& [id, c] : s.components) {
    if (c.type == name || c.type + "s" == name) out.insert(id);
  }
  return out;
}

bool known_type(const Snapshot& s, const std::string& name) {
  for (const auto& [id, c] : s.components) {
    (void)id;
    if (c.type == name || c.type + "s" == name) return true;
  }
  return false;
}

// RAII rebinding of one variable.
struct Rebind {
  Binding* vars;
  std::string name;
  std::optional<Value> saved;
  Rebind(Binding* vars, std::string name, Value v) : vars(vars), name(std::move(name)) {
    if (auto it = vars->find(this->name); it != vars->end()) saved = it->second;
    (*vars)[this->name] = std::move(v);
  }
  ~Rebind() {
    if (saved) {
      (*vars)[name] = *saved;
    } else {
      vars->erase(name);
    }
  }
};

}  // namespace

IdSet do_set(const SetExpr& se, const Scope& sc) {
  if (auto* n = std::get_if<SetExpr::Named>(&se.node)) {
    if (sc.lets) {
      auto it = sc.lets->find(n->name);
      if (it != sc.lets->end()) return it->second;
    }
    auto it = sc.snap->ensembles.find(n->name);
    if (it != sc.snap->ensembles.end()) return it->second;
    if (known_type(*sc.snap, n->name)) return type_set(*sc.snap, n->name);
    throw EvalError("unknown set", n->name, sc.step);
  }
  if (auto* n = std::get_if<SetExpr::Comprehension>(&se.node)) {
    IdSet source = do_set(*n->source, sc);
    IdSet out;
    for (const auto& id : source) {
      Rebind rb(sc.vars, n->var, ComponentRef{id});
      if (do_formula(*n->predicate, sc)) out.insert(id);
    }
    return out;
  }
  if (auto* n = std::get_if<SetExpr::Intersect>(&se.node)) {
    IdSet l = do_set(*n->lhs, sc);
    IdSet r = do_set(*n->rhs, sc);
    IdSet out;
    std::set_intersection(l.begin(), l.end(), r.begin(), r.end(), std::inserter(out, out.end()));
    return out;
  }
  const auto& n = std::get<SetExpr::Union>(se.node);
  IdSet l = do_set(*n.lhs, sc);
  IdSet r = do_set(*n.rhs, sc);
  IdSet out;
  std::set_union(l.begin(), l.end(), r.begin(), r.end(), std::inserter(out, out.end()));
  return out;
}

Value do_expr(const Expr& e, const Scope& sc) {
  if (auto* n = std::get_if<Expr::Literal>(&e.node)) return n->value;
  if (auto* n = std::get_if<Expr::Var>(&e.node)) {
    auto it = sc.vars->find(n->name);
    if (it != sc.vars->end()) return it->second;
    if (sc.snap->beyond_control.count(n->name)) return ComponentRef{n->name};
    throw EvalError("unbound variable", n->name, sc.step);
  }
  if (auto* n = std::get_if<Expr::Attr>(&e.node)) {
    Value obj = do_expr(*n->object, sc);
    if (!is_ref(obj)) {
      throw EvalError("attribute access on a non-component value", n->name, sc.step);
    }
    const std::string& id = std::get<ComponentRef>(obj).id;
    if (auto it = sc.snap->components.find(id); it != sc.snap->components.end()) {
      if (auto a = it->second.attrs.find(n->name); a != it->second.attrs.end()) return a->second;
      throw EvalError("unknown attribute", id + "." + n->name, sc.step);
    }
    if (auto it = sc.snap->beyond_control.find(id); it != sc.snap->beyond_control.end()) {
      if (auto a = it->second.find(n->name); a != it->second.end()) return a->second;
      throw EvalError("unknown attribute", id + "." + n->name, sc.step);
    }
    throw EvalError("unknown component", id, sc.step);
  }
  if (auto* n = std::get_if<Expr::Card>(&e.node)) {
    return static_cast<std::int64_t>(do_set(*n->set, sc).size());
  }
  if (auto* n = std::get_if<Expr::Endcount>(&e.node)) {
    return n->kind == EndcountKind::Max ? sc.L - 1 - sc.step : sc.step;
  }
  const auto& n = std::get<Expr::Arith>(e.node);
  Value l = do_expr(*n.lhs, sc);
  Value r = do_expr(*n.rhs, sc);
  if (!is_numeric(l) || !is_numeric(r)) {
    throw EvalError(
        "arithmetic over non-numeric operands (" + type_name(l) + ", " + type_name(r) + ")",
        to_string(n.op), sc.step);
  }
  if (is_int(l) && is_int(r)) {
    std::int64_t a = std::get<std::int64_t>(l);
    std::int64_t b = std::get<std::int64_t>(r);
    switch (n.op) {
      case ArithOp::Add: return a + b;
      case ArithOp::Sub: return a - b;
      default: return a * b;
    }
  }
  double a = as_real(l);
  double b = as_real(r);
  switch (n.op) {
    case ArithOp::Add: return a + b;
    case ArithOp::Sub: return a - b;
    default: return a * b;
  }
}

static bool do_compare(const Value& l, CmpOp op, const Value& r, const Scope& sc) {
  if (is_numeric(l) && is_numeric(r)) {
    if (is_int(l) && is_int(r)) {
      std::int64_t a = std::get<std::int64_t>(l);
      std::int64_t b = std::get<std::int64_t>(r);
      switch (op) {
        case CmpOp::Eq: return a == b;
        case CmpOp::Ne: return a != b;
        case CmpOp::Lt: return a < b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Gt: return a > b;
        default: return a >= b;
      }
    }
    double a = as_real(l);
    double b = as_real(r);
    switch (op) {
      case CmpOp::Eq: return a == b;
      case CmpOp::Ne: return a != b;
      case CmpOp::Lt: return a < b;
      case CmpOp::Le: return a <= b;
      case CmpOp::Gt: return a > b;
      default: return a >= b;
    }
  }
  const bool same_family = (is_string(l) && is_string(r)) || (is_bool(l) && is_bool(r)) ||
                           (is_ref(l) && is_ref(r));
  if (!same_family) {
    throw EvalError("type mismatch in comparison (" + type_name(l) + " vs " + type_name(r) + ")",
                    to_string(op), sc.step);
  }
  if (op == CmpOp::Eq) return l == r;
  if (op == CmpOp::Ne) return l != r;
  throw EvalError("ordering comparison requires numeric operands (" + type_name(l) + ")",
                  to_string(op), sc.step);
}

bool do_formula(const Formula& f, const Scope& sc) {
  if (auto* n = std::get_if<Formula::BoolConst>(&f.node)) return n->value;
  if (auto* n = std::get_if<Formula::Compare>(&f.node)) {
    return do_compare(do_expr(*n->lhs, sc), n->op, do_expr(*n->rhs, sc), sc);
  }
  if (auto* n = std::get_if<Formula::Member>(&f.node)) {
    Value v = do_expr(*n->element, sc);
    if (!is_ref(v)) {
      throw EvalError("membership test requires a component value, got " + type_name(v), "in",
                      sc.step);
    }
    return do_set(*n->set, sc).count(std::get<ComponentRef>(v).id) > 0;
  }
  if (auto* n = std::get_if<Formula::Not>(&f.node)) return !do_formula(*n->body, sc);
  if (auto* n = std::get_if<Formula::And>(&f.node)) {
    return do_formula(*n->lhs, sc) && do_formula(*n->rhs, sc);
  }
  if (auto* n = std::get_if<Formula::Or>(&f.node)) {
    return do_formula(*n->lhs, sc) || do_formula(*n->rhs, sc);
  }
  if (auto* n = std::get_if<Formula::Implies>(&f.node)) {
    return !do_formula(*n->lhs, sc) || do_formula(*n->rhs, sc);
  }
  if (auto* n = std::get_if<Formula::Quantified>(&f.node)) {
    IdSet domain = do_set(*n->domain, sc);
    for (const auto& id : domain) {
      Rebind rb(sc.vars, n->var, ComponentRef{id});
      bool v = do_formula(*n->body, sc);
      if (n->universal && !v) return false;
      if (!n->universal && v) return true;
    }
    return n->universal;
  }
  if (sc.within) return (*sc.within)(f, sc);
  throw EvalError("temporal operator in single-snapshot evaluation", "within", sc.step);
}

LetSets materialize_lets(const std::vector<std::pair<std::string, SetExprPtr>>& lets,
                         const Snapshot& snap, std::int64_t step, std::int64_t L,
                         const WithinHandler* within) {
  LetSets out;
  Binding vars;
  Scope sc{&snap, step, L, &out, &vars, within};
  for (const auto& [name, set] : lets) {
    try {
      out.emplace(name, do_set(*set, sc));
    } catch (const EvalError& e) {
      throw EvalError(std::string("let ") + name + " failed to materialize: " + e.what(), name,
                      step);
    }
  }
  return out;
}

std::vector<Binding> enumerate_prefix(const std::vector<std::pair<std::string, SetExprPtr>>& prefix,
                                      const Scope& base) {
  std::vector<Binding> tuples{Binding{}};
  for (const auto& [var, domain] : prefix) {
    std::vector<Binding> next;
    for (auto& t : tuples) {
      Binding vars = t;
      Scope sc = base;
      sc.vars = &vars;
      IdSet ids = do_set(*domain, sc);
      for (const auto& id : ids) {
        Binding ext = t;
        ext[var] = ComponentRef{id};
        next.push_back(std::move(ext));
      }
    }
    tuples = std::move(next);
  }
  return tuples;
}

}  // namespace fclv::fcl::detail
