#include "fclverify/ast.hpp"

#include <charconv>
#include <sstream>

namespace fclv::fcl {

std::string type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "boolean";
    case 1: return "integer";
    case 2: return "real";
    case 3: return "string";
    default: return "component";
  }
}

static std::string real_text(double d) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  std::string s(buf, ptr);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";  // keep reals distinct from integer literals
  }
  return s;
}

std::string to_text(const Value& v) {
  switch (v.index()) {
    case 0: return std::get<bool>(v) ? "true" : "false";
    case 1: return std::to_string(std::get<std::int64_t>(v));
    case 2: return real_text(std::get<double>(v));
    case 3: {
      std::string out = "'";
      for (char c : std::get<std::string>(v)) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
      }
      return out + "'";
    }
    default: return std::get<ComponentRef>(v).id;
  }
}

#define FCLV_MAKE(Type, Sub, Fn)                                   \
  Type##Ptr Fn(Type::Sub n, SourcePos pos) {                        \
    auto p = std::make_shared<Type>();                              \
    p->node = std::move(n);                                         \
    p->pos = pos;                                                   \
    return p;                                                       \
  }

FCLV_MAKE(Expr, Literal, make_expr)
FCLV_MAKE(Expr, Attr, make_expr)
FCLV_MAKE(Expr, Card, make_expr)
FCLV_MAKE(Expr, Var, make_expr)
FCLV_MAKE(Expr, Arith, make_expr)
FCLV_MAKE(Expr, Endcount, make_expr)
FCLV_MAKE(SetExpr, Named, make_set)
FCLV_MAKE(SetExpr, Comprehension, make_set)
FCLV_MAKE(SetExpr, Intersect, make_set)
FCLV_MAKE(SetExpr, Union, make_set)
FCLV_MAKE(Formula, BoolConst, make_formula)
FCLV_MAKE(Formula, Compare, make_formula)
FCLV_MAKE(Formula, Member, make_formula)
FCLV_MAKE(Formula, Not, make_formula)
FCLV_MAKE(Formula, And, make_formula)
FCLV_MAKE(Formula, Or, make_formula)
FCLV_MAKE(Formula, Implies, make_formula)
FCLV_MAKE(Formula, Quantified, make_formula)
FCLV_MAKE(Formula, Within, make_formula)

#undef FCLV_MAKE

// --- structural equality --------------------------------------------------

bool equals(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto* l = std::get_if<Expr::Literal>(&a.node)) {
    return l->value == std::get<Expr::Literal>(b.node).value;
  }
  if (auto* l = std::get_if<Expr::Attr>(&a.node)) {
    const auto& r = std::get<Expr::Attr>(b.node);
    return l->name == r.name && equals(*l->object, *r.object);
  }
  if (auto* l = std::get_if<Expr::Card>(&a.node)) {
    return equals(*l->set, *std::get<Expr::Card>(b.node).set);
  }
  if (auto* l = std::get_if<Expr::Var>(&a.node)) {
    return l->name == std::get<Expr::Var>(b.node).name;
  }
  if (auto* l = std::get_if<Expr::Arith>(&a.node)) {
    const auto& r = std::get<Expr::Arith>(b.node);
    return l->op == r.op && equals(*l->lhs, *r.lhs) && equals(*l->rhs, *r.rhs);
  }
  return std::get<Expr::Endcount>(a.node).kind == std::get<Expr::Endcount>(b.node).kind;
}

bool equals(const SetExpr& a, const SetExpr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto* l = std::get_if<SetExpr::Named>(&a.node)) {
    return l->name == std::get<SetExpr::Named>(b.node).name;
  }
  if (auto* l = std::get_if<SetExpr::Comprehension>(&a.node)) {
    const auto& r = std::get<SetExpr::Comprehension>(b.node);
    return l->var == r.var && equals(*l->source, *r.source) && equals(*l->predicate, *r.predicate);
  }
  if (auto* l = std::get_if<SetExpr::Intersect>(&a.node)) {
    const auto& r = std::get<SetExpr::Intersect>(b.node);
    return equals(*l->lhs, *r.lhs) && equals(*l->rhs, *r.rhs);
  }
  const auto& l = std::get<SetExpr::Union>(a.node);
  const auto& r = std::get<SetExpr::Union>(b.node);
  return equals(*l.lhs, *r.lhs) && equals(*l.rhs, *r.rhs);
}

bool equals(const Formula& a, const Formula& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto* l = std::get_if<Formula::BoolConst>(&a.node)) {
    return l->value == std::get<Formula::BoolConst>(b.node).value;
  }
  if (auto* l = std::get_if<Formula::Compare>(&a.node)) {
    const auto& r = std::get<Formula::Compare>(b.node);
    return l->op == r.op && equals(*l->lhs, *r.lhs) && equals(*l->rhs, *r.rhs);
  }
  if (auto* l = std::get_if<Formula::Member>(&a.node)) {
    const auto& r = std::get<Formula::Member>(b.node);
    return equals(*l->element, *r.element) && equals(*l->set, *r.set);
  }
  if (auto* l = std::get_if<Formula::Not>(&a.node)) {
    return equals(*l->body, *std::get<Formula::Not>(b.node).body);
  }
  if (auto* l = std::get_if<Formula::And>(&a.node)) {
    const auto& r = std::get<Formula::And>(b.node);
    return equals(*l->lhs, *r.lhs) && equals(*l->rhs, *r.rhs);
  }
  if (auto* l = std::get_if<Formula::Or>(&a.node)) {
    const auto& r = std::get<Formula::Or>(b.node);
    return equals(*l->lhs, *r.lhs) && equals(*l->rhs, *r.rhs);
  }
  if (auto* l = std::get_if<Formula::Implies>(&a.node)) {
    const auto& r = std::get<Formula::Implies>(b.node);
    return equals(*l->lhs, *r.lhs) && equals(*l->rhs, *r.rhs);
  }
  if (auto* l = std::get_if<Formula::Quantified>(&a.node)) {
    const auto& r = std::get<Formula::Quantified>(b.node);
    return l->universal == r.universal && l->var == r.var && equals(*l->domain, *r.domain) &&
           equals(*l->body, *r.body);
  }
  const auto& l = std::get<Formula::Within>(a.node);
  const auto& r = std::get<Formula::Within>(b.node);
  return l.count == r.count && l.window == r.window && equals(*l.body, *r.body);
}

bool equals(const Constraint& a, const Constraint& b) {
  if (a.description != b.description || a.lets.size() != b.lets.size()) return false;
  for (std::size_t i = 0; i < a.lets.size(); ++i) {
    if (a.lets[i].first != b.lets[i].first || !equals(*a.lets[i].second, *b.lets[i].second)) {
      return false;
    }
  }
  return equals(*a.body, *b.body);
}

bool equals(const ConstraintDocument& a, const ConstraintDocument& b) {
  if (a.constraints.size() != b.constraints.size()) return false;
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    if (!equals(a.constraints[i], b.constraints[i])) return false;
  }
  return true;
}

// --- rendering --------------------------------------------------------------

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    default: return ">=";
  }
}

const char* to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    default: return "*";
  }
}

std::string render(const Bound& b) {
  switch (b.kind) {
    case Bound::Kind::Literal: return std::to_string(b.literal);
    case Bound::Kind::Max: return "MAX";
    case Bound::Kind::Beg: return "BEG";
    case Bound::Kind::Inf: return "INF";
    default:
      return real_text(b.factor) + "*" + (b.base == EndcountKind::Max ? "MAX" : "BEG");
  }
}

static bool atomic_expr(const Expr& e) {
  return !std::holds_alternative<Expr::Arith>(e.node);
}

static std::string render_operand(const Expr& e) {
  return atomic_expr(e) ? render(e) : "(" + render(e) + ")";
}

std::string render(const Expr& e) {
  if (auto* n = std::get_if<Expr::Literal>(&e.node)) return to_text(n->value);
  if (auto* n = std::get_if<Expr::Attr>(&e.node)) return render_operand(*n->object) + "." + n->name;
  if (auto* n = std::get_if<Expr::Card>(&e.node)) return "count(" + render(*n->set) + ")";
  if (auto* n = std::get_if<Expr::Var>(&e.node)) return n->name;
  if (auto* n = std::get_if<Expr::Arith>(&e.node)) {
    return render_operand(*n->lhs) + " " + to_string(n->op) + " " + render_operand(*n->rhs);
  }
  return std::get<Expr::Endcount>(e.node).kind == EndcountKind::Max ? "MAX" : "BEG";
}

static bool atomic_set(const SetExpr& s) {
  return std::holds_alternative<SetExpr::Named>(s.node) ||
         std::holds_alternative<SetExpr::Comprehension>(s.node);
}

static std::string render_set_operand(const SetExpr& s) {
  return atomic_set(s) ? render(s) : "(" + render(s) + ")";
}

std::string render(const SetExpr& s) {
  if (auto* n = std::get_if<SetExpr::Named>(&s.node)) return n->name;
  if (auto* n = std::get_if<SetExpr::Comprehension>(&s.node)) {
    return "{ " + n->var + " in " + render(*n->source) + " | " + render(*n->predicate) + " }";
  }
  if (auto* n = std::get_if<SetExpr::Intersect>(&s.node)) {
    return render_set_operand(*n->lhs) + " intersect " + render_set_operand(*n->rhs);
  }
  const auto& n = std::get<SetExpr::Union>(s.node);
  return render_set_operand(*n.lhs) + " union " + render_set_operand(*n.rhs);
}

static bool atomic_formula(const Formula& f) {
  return std::holds_alternative<Formula::BoolConst>(f.node) ||
         std::holds_alternative<Formula::Compare>(f.node) ||
         std::holds_alternative<Formula::Member>(f.node);
}

static std::string render_f_operand(const Formula& f) {
  return atomic_formula(f) ? render(f) : "(" + render(f) + ")";
}

std::string render(const Formula& f) {
  if (auto* n = std::get_if<Formula::BoolConst>(&f.node)) return n->value ? "true" : "false";
  if (auto* n = std::get_if<Formula::Compare>(&f.node)) {
    return render(*n->lhs) + " " + to_string(n->op) + " " + render(*n->rhs);
  }
  if (auto* n = std::get_if<Formula::Member>(&f.node)) {
    return render(*n->element) + " in " + render(*n->set);
  }
  if (auto* n = std::get_if<Formula::Not>(&f.node)) return "not " + render_f_operand(*n->body);
  if (auto* n = std::get_if<Formula::And>(&f.node)) {
    return render_f_operand(*n->lhs) + " and " + render_f_operand(*n->rhs);
  }
  if (auto* n = std::get_if<Formula::Or>(&f.node)) {
    return render_f_operand(*n->lhs) + " or " + render_f_operand(*n->rhs);
  }
  if (auto* n = std::get_if<Formula::Implies>(&f.node)) {
    return render_f_operand(*n->lhs) + " implies " + render_f_operand(*n->rhs);
  }
  if (auto* n = std::get_if<Formula::Quantified>(&f.node)) {
    return std::string(n->universal ? "forall " : "exists ") + n->var + " in " +
           render(*n->domain) + ": " + render(*n->body);
  }
  const auto& n = std::get<Formula::Within>(f.node);
  return "within[" + render(n.count) + ", " + render(n.window) + "] " + render_f_operand(*n.body);
}

static std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string render(const Constraint& c) {
  std::ostringstream out;
  out << "constraint " << quote(c.description) << "\n";
  for (const auto& [name, set] : c.lets) {
    out << "  let " << name << " = " << render(*set) << "\n";
  }
  out << "  " << render(*c.body) << "\n";
  return out.str();
}

std::string render(const ConstraintDocument& doc) {
  std::ostringstream out;
  bool first = true;
  for (const auto& c : doc.constraints) {
    if (!first) out << "\n";
    first = false;
    out << render(c);
  }
  return out.str();
}

}  // namespace fclv::fcl
