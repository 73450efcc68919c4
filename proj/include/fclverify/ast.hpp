#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fclverify/value.hpp"

namespace fclv::fcl {

struct Expr;
struct SetExpr;
struct Formula;
using ExprPtr = std::shared_ptr<const Expr>;
using SetExprPtr = std::shared_ptr<const SetExpr>;
using FormulaPtr = std::shared_ptr<const Formula>;

struct SourcePos {
  int line = 0;
  int col = 0;
};

enum class ArithOp { Add, Sub, Mul };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class EndcountKind { Max, Beg };

/// A count (n) or window (t) bound of the within operator.
/// Literals may be negative in window position (backward window).
struct Bound {
  enum class Kind { Literal, Max, Beg, Inf, Scaled };
  Kind kind = Kind::Literal;
  std::int64_t literal = 0;
  double factor = 1.0;                      // Scaled only, in (0, 1]
  EndcountKind base = EndcountKind::Max;    // Scaled only

  static Bound lit(std::int64_t v) { return {Kind::Literal, v, 1.0, EndcountKind::Max}; }
  static Bound max() { return {Kind::Max, 0, 1.0, EndcountKind::Max}; }
  static Bound beg() { return {Kind::Beg, 0, 1.0, EndcountKind::Beg}; }
  static Bound inf() { return {Kind::Inf, 0, 1.0, EndcountKind::Max}; }
  static Bound scaled(double f, EndcountKind base) { return {Kind::Scaled, 0, f, base}; }

  bool operator==(const Bound& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Literal) return literal == o.literal;
    if (kind == Kind::Scaled) return factor == o.factor && base == o.base;
    return true;
  }
};

struct Expr {
  struct Literal { Value value; };
  struct Attr { ExprPtr object; std::string name; };
  struct Card { SetExprPtr set; };
  struct Var { std::string name; };
  struct Arith { ArithOp op; ExprPtr lhs; ExprPtr rhs; };
  struct Endcount { EndcountKind kind; };

  std::variant<Literal, Attr, Card, Var, Arith, Endcount> node;
  SourcePos pos;
};

struct SetExpr {
  struct Named { std::string name; };
  struct Comprehension { std::string var; SetExprPtr source; FormulaPtr predicate; };
  struct Intersect { SetExprPtr lhs; SetExprPtr rhs; };
  struct Union { SetExprPtr lhs; SetExprPtr rhs; };

  std::variant<Named, Comprehension, Intersect, Union> node;
  SourcePos pos;
};

struct Formula {
  struct BoolConst { bool value; };
  struct Compare { ExprPtr lhs; CmpOp op; ExprPtr rhs; };
  struct Member { ExprPtr element; SetExprPtr set; };
  struct Not { FormulaPtr body; };
  struct And { FormulaPtr lhs; FormulaPtr rhs; };
  struct Or { FormulaPtr lhs; FormulaPtr rhs; };
  struct Implies { FormulaPtr lhs; FormulaPtr rhs; };
  struct Quantified { bool universal = true; std::string var; SetExprPtr domain; FormulaPtr body; };
  struct Within { Bound count; Bound window; FormulaPtr body; };

  std::variant<BoolConst, Compare, Member, Not, And, Or, Implies, Quantified, Within> node;
  SourcePos pos;
};

/// A named functional constraint: description text, let-bound sets, body formula.
struct Constraint {
  std::string description;
  std::vector<std::pair<std::string, SetExprPtr>> lets;
  FormulaPtr body;
  SourcePos pos;
};

struct ConstraintDocument {
  std::vector<Constraint> constraints;
};

// --- construction helpers ------------------------------------------------

ExprPtr make_expr(Expr::Literal n, SourcePos pos = {});
ExprPtr make_expr(Expr::Attr n, SourcePos pos = {});
ExprPtr make_expr(Expr::Card n, SourcePos pos = {});
ExprPtr make_expr(Expr::Var n, SourcePos pos = {});
ExprPtr make_expr(Expr::Arith n, SourcePos pos = {});
ExprPtr make_expr(Expr::Endcount n, SourcePos pos = {});
SetExprPtr make_set(SetExpr::Named n, SourcePos pos = {});
SetExprPtr make_set(SetExpr::Comprehension n, SourcePos pos = {});
SetExprPtr make_set(SetExpr::Intersect n, SourcePos pos = {});
SetExprPtr make_set(SetExpr::Union n, SourcePos pos = {});
FormulaPtr make_formula(Formula::BoolConst n, SourcePos pos = {});
FormulaPtr make_formula(Formula::Compare n, SourcePos pos = {});
FormulaPtr make_formula(Formula::Member n, SourcePos pos = {});
FormulaPtr make_formula(Formula::Not n, SourcePos pos = {});
FormulaPtr make_formula(Formula::And n, SourcePos pos = {});
FormulaPtr make_formula(Formula::Or n, SourcePos pos = {});
FormulaPtr make_formula(Formula::Implies n, SourcePos pos = {});
FormulaPtr make_formula(Formula::Quantified n, SourcePos pos = {});
FormulaPtr make_formula(Formula::Within n, SourcePos pos = {});

// --- structural identity (source positions ignored) ----------------------

bool equals(const Expr& a, const Expr& b);
bool equals(const SetExpr& a, const SetExpr& b);
bool equals(const Formula& a, const Formula& b);
bool equals(const Constraint& a, const Constraint& b);
bool equals(const ConstraintDocument& a, const ConstraintDocument& b);

// --- rendering to the constraint DSL's concrete syntax -------------------

std::string render(const Bound& b);
std::string render(const Expr& e);
std::string render(const SetExpr& s);
std::string render(const Formula& f);
std::string render(const Constraint& c);
std::string render(const ConstraintDocument& doc);

const char* to_string(CmpOp op);
const char* to_string(ArithOp op);

}  // namespace fclv::fcl
