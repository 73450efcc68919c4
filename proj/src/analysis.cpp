#include "fclverify/analysis.hpp"

#include <functional>
#include <set>

namespace fclv::fcl {

bool depends_on_max(const Bound& b) {
  switch (b.kind) {
    case Bound::Kind::Max:
    case Bound::Kind::Inf: return true;
    case Bound::Kind::Scaled: return b.base == EndcountKind::Max;
    default: return false;
  }
}

// Forward window: the steps after the anchor. Backward: the steps before it.
static bool backward_window(const Bound& w) {
  if (w.kind == Bound::Kind::Literal) return w.literal < 0;
  if (w.kind == Bound::Kind::Beg) return true;
  if (w.kind == Bound::Kind::Scaled) return w.base == EndcountKind::Beg;
  return false;
}

namespace {

struct Walker {
  std::function<void(const Formula&)> on_formula;
  std::function<void(const Expr&)> on_expr;

  void visit(const Expr& e) {
    if (on_expr) on_expr(e);
    if (auto* n = std::get_if<Expr::Attr>(&e.node)) visit(*n->object);
    if (auto* n = std::get_if<Expr::Card>(&e.node)) visit(*n->set);
    if (auto* n = std::get_if<Expr::Arith>(&e.node)) {
      visit(*n->lhs);
      visit(*n->rhs);
    }
  }

  void visit(const SetExpr& s) {
    if (auto* n = std::get_if<SetExpr::Comprehension>(&s.node)) {
      visit(*n->source);
      visit(*n->predicate);
    }
    if (auto* n = std::get_if<SetExpr::Intersect>(&s.node)) {
      visit(*n->lhs);
      visit(*n->rhs);
    }
    if (auto* n = std::get_if<SetExpr::Union>(&s.node)) {
      visit(*n->lhs);
      visit(*n->rhs);
    }
  }

  void visit(const Formula& f) {
    if (on_formula) on_formula(f);
    if (auto* n = std::get_if<Formula::Compare>(&f.node)) {
      visit(*n->lhs);
      visit(*n->rhs);
    } else if (auto* n = std::get_if<Formula::Member>(&f.node)) {
      visit(*n->element);
      visit(*n->set);
    } else if (auto* n = std::get_if<Formula::Not>(&f.node)) {
      visit(*n->body);
    } else if (auto* n = std::get_if<Formula::And>(&f.node)) {
      visit(*n->lhs);
      visit(*n->rhs);
    } else if (auto* n = std::get_if<Formula::Or>(&f.node)) {
      visit(*n->lhs);
      visit(*n->rhs);
    } else if (auto* n = std::get_if<Formula::Implies>(&f.node)) {
      visit(*n->lhs);
      visit(*n->rhs);
    } else if (auto* n = std::get_if<Formula::Quantified>(&f.node)) {
      visit(*n->domain);
      visit(*n->body);
    } else if (auto* n = std::get_if<Formula::Within>(&f.node)) {
      visit(*n->body);
    }
  }
};

void walk(const Formula& f, std::function<void(const Formula&)> on_formula,
          std::function<void(const Expr&)> on_expr = nullptr) {
  Walker w{std::move(on_formula), std::move(on_expr)};
  w.visit(f);
}

void walk(const SetExpr& s, std::function<void(const Formula&)> on_formula,
          std::function<void(const Expr&)> on_expr = nullptr) {
  Walker w{std::move(on_formula), std::move(on_expr)};
  w.visit(s);
}

bool contains_within(const Formula& f) {
  bool found = false;
  walk(f, [&](const Formula& g) {
    if (std::holds_alternative<Formula::Within>(g.node)) found = true;
  });
  return found;
}

}  // namespace

ConstraintShape classify(const Constraint& c) {
  ConstraintShape shape;
  const Formula* cur = c.body.get();
  while (auto* q = std::get_if<Formula::Quantified>(&cur->node)) {
    if (!q->universal) break;
    shape.prefix.emplace_back(q->var, q->domain);
    cur = q->body.get();
  }
  shape.core_formula = cur;

  if (auto* w = std::get_if<Formula::Within>(&cur->node)) {
    if (!backward_window(w->window)) {
      shape.core = ConstraintShape::Core::TopWithin;
      shape.within_node = cur;
    } else {
      shape.core = ConstraintShape::Core::State;
    }
  } else if (auto* imp = std::get_if<Formula::Implies>(&cur->node)) {
    shape.core = ConstraintShape::Core::Implication;
    shape.antecedent = imp->lhs.get();
    shape.consequent = imp->rhs.get();
    if (auto* cw = std::get_if<Formula::Within>(&imp->rhs->node)) {
      if (!backward_window(cw->window)) {
        shape.consequent_is_within = true;
        shape.within_node = imp->rhs.get();
      }
    }
  } else {
    shape.core = ConstraintShape::Core::State;
  }

  // backward windows that are evaluated as part of state formulas
  auto collect_neg = [&](const Formula& root) {
    walk(root, [&](const Formula& g) {
      if (auto* w = std::get_if<Formula::Within>(&g.node); w && backward_window(w->window)) {
        shape.negative_withins.push_back(&g);
      }
    });
  };
  switch (shape.core) {
    case ConstraintShape::Core::TopWithin: break;  // window body is fed step by step
    case ConstraintShape::Core::Implication:
      collect_neg(*shape.antecedent);
      if (!shape.consequent_is_within) collect_neg(*shape.consequent);
      break;
    case ConstraintShape::Core::State: collect_neg(*shape.core_formula); break;
  }

  // any endcount expression anywhere needs the trace length at evaluation time
  auto scan_endcount = [&](const Formula& root) {
    walk(root, nullptr, [&](const Expr& e) {
      if (std::holds_alternative<Expr::Endcount>(e.node)) shape.state_uses_endcount = true;
    });
  };
  scan_endcount(*c.body);
  for (const auto& [name, set] : c.lets) {
    (void)name;
    walk(*set, nullptr, [&](const Expr& e) {
      if (std::holds_alternative<Expr::Endcount>(e.node)) shape.state_uses_endcount = true;
    });
  }
  shape.state_needs_length = shape.state_uses_endcount;
  for (const Formula* neg : shape.negative_withins) {
    if (depends_on_max(std::get<Formula::Within>(neg->node).count)) {
      shape.state_needs_length = true;
    }
  }

  // --- online subset restrictions (§ verification procedure) ---
  auto reject = [&](std::string why) { shape.online_rejections.push_back(std::move(why)); };

  int implications = 0;
  walk(*c.body, [&](const Formula& g) {
    if (std::holds_alternative<Formula::Implies>(g.node)) ++implications;
  });
  if (implications > 1) reject("only one implication in a constraint is allowed");

  walk(*c.body, [&](const Formula& g) {
    if (auto* w = std::get_if<Formula::Within>(&g.node)) {
      if (contains_within(*w->body)) reject("nested within operators are not allowed");
    }
  });

  // every forward within must be the top-level construct or the consequent
  std::set<const Formula*> allowed_forward;
  if (shape.core == ConstraintShape::Core::TopWithin) allowed_forward.insert(shape.within_node);
  if (shape.consequent_is_within) allowed_forward.insert(shape.within_node);
  walk(*c.body, [&](const Formula& g) {
    if (auto* w = std::get_if<Formula::Within>(&g.node)) {
      if (!backward_window(w->window) && !allowed_forward.count(&g)) {
        reject("within with a positive window must be the top-level construct or the consequent "
               "of the top-level implication");
      }
    }
  });

  // every backward within must sit inside the antecedent, not under a further
  // quantifier (the history buffer is keyed by the constraint's prefix binding)
  std::set<const Formula*> antecedent_negs;
  if (shape.core == ConstraintShape::Core::Implication) {
    std::function<void(const Formula&, int)> scan = [&](const Formula& g, int qdepth) {
      if (auto* w = std::get_if<Formula::Within>(&g.node); w && backward_window(w->window)) {
        if (qdepth == 0) {
          antecedent_negs.insert(&g);
        } else {
          reject("within with a negative window may not sit under a quantifier inside the "
                 "antecedent");
        }
        return;
      }
      if (auto* n = std::get_if<Formula::Not>(&g.node)) scan(*n->body, qdepth);
      if (auto* n = std::get_if<Formula::And>(&g.node)) {
        scan(*n->lhs, qdepth);
        scan(*n->rhs, qdepth);
      }
      if (auto* n = std::get_if<Formula::Or>(&g.node)) {
        scan(*n->lhs, qdepth);
        scan(*n->rhs, qdepth);
      }
      if (auto* n = std::get_if<Formula::Implies>(&g.node)) {
        scan(*n->lhs, qdepth);
        scan(*n->rhs, qdepth);
      }
      if (auto* n = std::get_if<Formula::Quantified>(&g.node)) scan(*n->body, qdepth + 1);
    };
    scan(*shape.antecedent, 0);
  }
  walk(*c.body, [&](const Formula& g) {
    if (auto* w = std::get_if<Formula::Within>(&g.node)) {
      if (backward_window(w->window) && !antecedent_negs.count(&g)) {
        reject("within with a negative window is only allowed in the antecedent of the "
               "top-level implication");
      }
    }
  });

  return shape;
}

std::vector<std::string> validate(const Constraint& c) {
  std::vector<std::string> problems;
  if (c.description.empty()) problems.push_back("empty description");

  std::set<std::string> let_names;
  for (std::size_t k = 0; k < c.lets.size(); ++k) {
    const auto& [name, set] = c.lets[k];
    if (!let_names.insert(name).second) problems.push_back("duplicate let name: " + name);
    // a let may only use previously defined lets
    walk(*set, [&](const Formula&) {}, nullptr);
    std::function<void(const SetExpr&)> check_named = [&](const SetExpr& s) {
      if (auto* n = std::get_if<SetExpr::Named>(&s.node)) {
        bool later = false;
        for (std::size_t j = k; j < c.lets.size(); ++j) {
          if (c.lets[j].first == n->name) later = true;
        }
        if (later) problems.push_back("let " + name + " uses " + n->name + " before its definition");
      }
      if (auto* n = std::get_if<SetExpr::Comprehension>(&s.node)) check_named(*n->source);
      if (auto* n = std::get_if<SetExpr::Intersect>(&s.node)) {
        check_named(*n->lhs);
        check_named(*n->rhs);
      }
      if (auto* n = std::get_if<SetExpr::Union>(&s.node)) {
        check_named(*n->lhs);
        check_named(*n->rhs);
      }
    };
    check_named(*set);
    walk(*set, [&](const Formula& g) {
      if (std::holds_alternative<Formula::Within>(g.node)) {
        problems.push_back("temporal operator inside a set definition (let " + name + ")");
      }
    });
  }

  walk(*c.body, [&](const Formula& g) {
    if (auto* w = std::get_if<Formula::Within>(&g.node)) {
      const Bound& n = w->count;
      const Bound& t = w->window;
      if (n.kind == Bound::Kind::Literal && n.literal < 0) {
        problems.push_back("negative count bound");
      }
      if ((n.kind == Bound::Kind::Scaled && (n.factor <= 0.0 || n.factor > 1.0)) ||
          (t.kind == Bound::Kind::Scaled && (t.factor <= 0.0 || t.factor > 1.0))) {
        problems.push_back("scaled bound factor must be in (0, 1]");
      }
      if (n.kind == Bound::Kind::Inf &&
          !(t.kind == Bound::Kind::Inf || t.kind == Bound::Kind::Max)) {
        problems.push_back("INF as a count requires an INF or MAX window");
      }
    }
    if (auto* q = std::get_if<Formula::Quantified>(&g.node)) {
      walk(*q->domain, [&](const Formula& p) {
        if (std::holds_alternative<Formula::Within>(p.node)) {
          problems.push_back("temporal operator inside a set comprehension");
        }
      });
    }
    if (auto* m = std::get_if<Formula::Member>(&g.node)) {
      walk(*m->set, [&](const Formula& p) {
        if (std::holds_alternative<Formula::Within>(p.node)) {
          problems.push_back("temporal operator inside a set comprehension");
        }
      });
    }
  });

  return problems;
}

}  // namespace fclv::fcl
