#include "fclverify/fcdsl.hpp"

#include "dsl_lexer.hpp"
#include "fclverify/errors.hpp"

namespace fclv::fcl {

using dsl::Cursor;
using dsl::Line;
using dsl::Token;

namespace {

SourcePos pos_of(const Token& t) { return SourcePos{t.line, t.col}; }

struct FormulaParser {
  Cursor& cur;

  FormulaPtr formula() { return implies_level(); }

  FormulaPtr implies_level() {
    FormulaPtr lhs = or_level();
    if (cur.accept_ident("implies")) {
      SourcePos p = pos_of(cur.peek());
      FormulaPtr rhs = implies_level();  // right associative
      return make_formula(Formula::Implies{lhs, rhs}, p);
    }
    return lhs;
  }

  FormulaPtr or_level() {
    FormulaPtr lhs = and_level();
    while (cur.accept_ident("or")) {
      FormulaPtr rhs = and_level();
      lhs = make_formula(Formula::Or{lhs, rhs});
    }
    return lhs;
  }

  FormulaPtr and_level() {
    FormulaPtr lhs = unary_level();
    while (cur.accept_ident("and")) {
      FormulaPtr rhs = unary_level();
      lhs = make_formula(Formula::And{lhs, rhs});
    }
    return lhs;
  }

  FormulaPtr unary_level() {
    const Token& t = cur.peek();
    if (t.kind == Token::Kind::Ident && t.text == "not") {
      cur.next();
      return make_formula(Formula::Not{unary_level()}, pos_of(t));
    }
    if (t.kind == Token::Kind::Ident && t.text == "within") {
      cur.next();
      cur.expect_punct("[");
      Bound count = bound();
      cur.expect_punct(",");
      Bound window = bound();
      cur.expect_punct("]");
      FormulaPtr body = unary_level();
      return make_formula(Formula::Within{count, window, body}, pos_of(t));
    }
    if (t.kind == Token::Kind::Ident && (t.text == "forall" || t.text == "exists")) {
      cur.next();
      Token var = cur.expect_ident();
      if (!cur.accept_ident("in")) cur.fail("'in'");
      SetExprPtr domain = set_expr();
      cur.expect_punct(":");
      FormulaPtr body = formula();  // quantifier body extends maximally
      return make_formula(Formula::Quantified{t.text == "forall", var.text, domain, body},
                          pos_of(t));
    }
    return atom();
  }

  FormulaPtr atom() {
    const Token& t = cur.peek();
    if (t.kind == Token::Kind::Punct && t.text == "(") {
      // could be a parenthesized formula or a parenthesized arithmetic
      // expression starting a comparison; try formula first by lookahead on
      // the matching structure: parse as formula, then allow a trailing
      // comparison only when the parse yielded a bare expression.
      // Simplest unambiguous rule: '(' always opens a formula.
      cur.next();
      FormulaPtr inner = formula();
      cur.expect_punct(")");
      return inner;
    }
    // expression followed by comparison or membership
    ExprPtr lhs = expr();
    const Token& op = cur.peek();
    if (op.kind == Token::Kind::Punct &&
        (op.text == "==" || op.text == "!=" || op.text == "<" || op.text == "<=" ||
         op.text == ">" || op.text == ">=")) {
      cur.next();
      ExprPtr rhs = expr();
      CmpOp c = op.text == "==" ? CmpOp::Eq
                : op.text == "!=" ? CmpOp::Ne
                : op.text == "<"  ? CmpOp::Lt
                : op.text == "<=" ? CmpOp::Le
                : op.text == ">"  ? CmpOp::Gt
                                  : CmpOp::Ge;
      return make_formula(Formula::Compare{lhs, c, rhs}, pos_of(op));
    }
    if (op.kind == Token::Kind::Ident && op.text == "in") {
      cur.next();
      SetExprPtr set = set_expr();
      return make_formula(Formula::Member{lhs, set}, pos_of(op));
    }
    // bare boolean constants act as formulas
    if (auto* lit = std::get_if<Expr::Literal>(&lhs->node)) {
      if (is_bool(lit->value)) {
        return make_formula(Formula::BoolConst{std::get<bool>(lit->value)}, lhs->pos);
      }
    }
    cur.fail("comparison operator or 'in'");
  }

  Bound bound() {
    const Token& t = cur.peek();
    bool negative = false;
    if (t.kind == Token::Kind::Punct && t.text == "-") {
      cur.next();
      negative = true;
    }
    const Token& v = cur.peek();
    if (v.kind == Token::Kind::Ident) {
      cur.next();
      if (v.text == "MAX") {
        if (negative) cur.fail("a non-negative bound (MAX cannot be negated)");
        return Bound::max();
      }
      if (v.text == "BEG") return Bound::beg();  // -BEG is the same backward window
      if (v.text == "INF") {
        if (negative) cur.fail("a non-negative bound (INF cannot be negated)");
        return Bound::inf();
      }
      cur.fail("MAX, BEG, INF or a number");
    }
    if (v.kind != Token::Kind::Number) cur.fail("a bound");
    cur.next();
    if (cur.accept_punct("*")) {
      Token base = cur.expect_ident();
      double factor = v.is_real ? v.real_value : static_cast<double>(v.int_value);
      if (negative) cur.fail("a non-negative scaled bound");
      if (base.text == "MAX") return Bound::scaled(factor, EndcountKind::Max);
      if (base.text == "BEG") return Bound::scaled(factor, EndcountKind::Beg);
      cur.fail("MAX or BEG after '*'");
    }
    if (v.is_real) cur.fail("an integer bound (scaled bounds need *MAX or *BEG)");
    return Bound::lit(negative ? -v.int_value : v.int_value);
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    for (;;) {
      const Token& t = cur.peek();
      if (t.kind == Token::Kind::Punct && (t.text == "+" || t.text == "-")) {
        cur.next();
        ExprPtr rhs = term();
        lhs = make_expr(Expr::Arith{t.text == "+" ? ArithOp::Add : ArithOp::Sub, lhs, rhs},
                        pos_of(t));
        continue;
      }
      return lhs;
    }
  }

  ExprPtr term() {
    ExprPtr lhs = factor();
    while (cur.peek().kind == Token::Kind::Punct && cur.peek().text == "*") {
      Token t = cur.next();
      ExprPtr rhs = factor();
      lhs = make_expr(Expr::Arith{ArithOp::Mul, lhs, rhs}, pos_of(t));
    }
    return lhs;
  }

  ExprPtr factor() {
    const Token& t = cur.peek();
    if (t.kind == Token::Kind::Punct && t.text == "-") {
      cur.next();
      const Token& n = cur.peek();
      if (n.kind != Token::Kind::Number) cur.fail("a number after unary '-'");
      cur.next();
      Value v = n.is_real ? Value{-n.real_value} : Value{-n.int_value};
      return make_expr(Expr::Literal{v}, pos_of(t));
    }
    if (t.kind == Token::Kind::Number) {
      cur.next();
      Value v = t.is_real ? Value{t.real_value} : Value{t.int_value};
      return make_expr(Expr::Literal{v}, pos_of(t));
    }
    if (t.kind == Token::Kind::String) {
      cur.next();
      return make_expr(Expr::Literal{Value{t.text}}, pos_of(t));
    }
    if (t.kind == Token::Kind::Punct && t.text == "(") {
      cur.next();
      ExprPtr inner = expr();
      cur.expect_punct(")");
      return inner;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "true" || t.text == "false") {
        cur.next();
        return make_expr(Expr::Literal{Value{t.text == "true"}}, pos_of(t));
      }
      if (t.text == "MAX" || t.text == "BEG") {
        cur.next();
        return make_expr(
            Expr::Endcount{t.text == "MAX" ? EndcountKind::Max : EndcountKind::Beg}, pos_of(t));
      }
      if (t.text == "count") {
        cur.next();
        cur.expect_punct("(");
        SetExprPtr set = set_expr();
        cur.expect_punct(")");
        return make_expr(Expr::Card{set}, pos_of(t));
      }
      cur.next();
      ExprPtr e = make_expr(Expr::Var{t.text}, pos_of(t));
      while (cur.peek().kind == Token::Kind::Punct && cur.peek().text == ".") {
        cur.next();
        Token attr = cur.expect_ident();
        e = make_expr(Expr::Attr{e, attr.text}, pos_of(attr));
      }
      return e;
    }
    cur.fail("an expression");
  }

  SetExprPtr set_expr() {
    SetExprPtr lhs = set_term();
    for (;;) {
      if (cur.accept_ident("intersect")) {
        SetExprPtr rhs = set_term();
        lhs = make_set(SetExpr::Intersect{lhs, rhs});
        continue;
      }
      if (cur.accept_ident("union")) {
        SetExprPtr rhs = set_term();
        lhs = make_set(SetExpr::Union{lhs, rhs});
        continue;
      }
      return lhs;
    }
  }

  SetExprPtr set_term() {
    const Token& t = cur.peek();
    if (t.kind == Token::Kind::Punct && t.text == "(") {
      cur.next();
      SetExprPtr inner = set_expr();
      cur.expect_punct(")");
      return inner;
    }
    if (t.kind == Token::Kind::Punct && t.text == "{") {
      cur.next();
      Token var = cur.expect_ident();
      if (!cur.accept_ident("in")) cur.fail("'in'");
      SetExprPtr source = set_expr();
      cur.expect_punct("|");
      FormulaPtr pred = formula();
      cur.expect_punct("}");
      return make_set(SetExpr::Comprehension{var.text, source, pred}, pos_of(t));
    }
    if (t.kind == Token::Kind::Ident) {
      cur.next();
      return make_set(SetExpr::Named{t.text}, pos_of(t));
    }
    cur.fail("a set expression");
  }
};

}  // namespace

ConstraintDocument parse_constraints(const std::string& text) {
  ConstraintDocument doc;
  auto lines = dsl::tokenize_lines(text);
  std::size_t i = 0;
  while (i < lines.size()) {
    const Line& header = lines[i];
    Cursor hc(header);
    if (header.indent != 0 || !hc.accept_ident("constraint")) {
      Cursor c(header);
      c.fail("'constraint' at the start of a block");
    }
    Token desc = hc.expect_string();
    if (!hc.at_end()) hc.fail("end of line after the description");
    if (desc.text.empty()) {
      throw ParseError("empty description", desc.line, desc.col, "a non-empty description");
    }
    Constraint c;
    c.description = desc.text;
    c.pos = pos_of(desc);
    ++i;

    bool have_formula = false;
    while (i < lines.size() && lines[i].indent >= 2) {
      const Line& body = lines[i];
      Cursor bc(body);
      if (bc.accept_ident("let")) {
        if (have_formula) bc.fail("lets before the formula");
        Token name = bc.expect_ident();
        bc.expect_punct("=");
        FormulaParser fp{bc};
        SetExprPtr set = fp.set_expr();
        if (!bc.at_end()) bc.fail("end of line after the let binding");
        c.lets.emplace_back(name.text, set);
      } else {
        if (have_formula) bc.fail("a single formula per constraint");
        FormulaParser fp{bc};
        c.body = fp.formula();
        if (!bc.at_end()) bc.fail("end of line after the formula");
        have_formula = true;
      }
      ++i;
    }
    if (!have_formula) {
      throw ParseError("constraint without a formula", header.number, 1, "an indented formula");
    }
    doc.constraints.push_back(std::move(c));
  }
  return doc;
}

}  // namespace fclv::fcl
