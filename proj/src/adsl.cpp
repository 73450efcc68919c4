#include "fclverify/adsl.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "dsl_lexer.hpp"
#include "fclverify/errors.hpp"
#include "fclverify/fcdsl.hpp"

namespace fclv::adsl {

using dsl::Cursor;
using dsl::Line;
using dsl::Token;

const EnsembleDecl* ArchitectureSpec::find_ensemble(const std::string& id) const {
  for (const auto& e : ensembles) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const ComponentDecl* ArchitectureSpec::find_component(const std::string& name) const {
  for (const auto& c : components) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const InitialState* ArchitectureSpec::find_initial_state(const std::string& name) const {
  for (const auto& s : initial_states) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::optional<std::string> ArchitectureSpec::ensemble_for_group(const Assignment& a,
                                                                const std::string& group) const {
  for (const auto& eid : a.ensembles) {
    const EnsembleDecl* e = find_ensemble(eid);
    if (e && e->name == group) return eid;
  }
  return std::nullopt;
}

bool equals(const Assignment& a, const Assignment& b) {
  if (a.component_type != b.component_type || a.description != b.description ||
      a.filter_text != b.filter_text || a.ensembles != b.ensembles || a.method != b.method) {
    return false;
  }
  if ((a.filter == nullptr) != (b.filter == nullptr)) return false;
  return a.filter == nullptr || fcl::equals(*a.filter, *b.filter);
}

bool equals(const ArchitectureSpec& a, const ArchitectureSpec& b) {
  if (a.components != b.components || a.ensembles != b.ensembles ||
      a.beyond_control != b.beyond_control || a.strategy != b.strategy ||
      a.am_interface != b.am_interface || a.initial_states != b.initial_states) {
    return false;
  }
  if (a.assignments.size() != b.assignments.size()) return false;
  for (std::size_t i = 0; i < a.assignments.size(); ++i) {
    if (!equals(a.assignments[i], b.assignments[i])) return false;
  }
  return true;
}

namespace {

// Bare identifiers in a filter predicate denote attributes of the candidate.
fcl::ExprPtr rewrite_expr(const fcl::ExprPtr& e);
fcl::FormulaPtr rewrite_filter(const fcl::FormulaPtr& f);
fcl::SetExprPtr rewrite_set(const fcl::SetExprPtr& s) {
  using fcl::SetExpr;
  if (auto* n = std::get_if<SetExpr::Comprehension>(&s->node)) {
    return fcl::make_set(SetExpr::Comprehension{n->var, rewrite_set(n->source),
                                                rewrite_filter(n->predicate)},
                         s->pos);
  }
  if (auto* n = std::get_if<SetExpr::Intersect>(&s->node)) {
    return fcl::make_set(SetExpr::Intersect{rewrite_set(n->lhs), rewrite_set(n->rhs)}, s->pos);
  }
  if (auto* n = std::get_if<SetExpr::Union>(&s->node)) {
    return fcl::make_set(SetExpr::Union{rewrite_set(n->lhs), rewrite_set(n->rhs)}, s->pos);
  }
  return s;
}

fcl::ExprPtr rewrite_expr(const fcl::ExprPtr& e) {
  using fcl::Expr;
  if (auto* n = std::get_if<Expr::Var>(&e->node)) {
    return fcl::make_expr(
        Expr::Attr{fcl::make_expr(Expr::Var{kFilterVar}, e->pos), n->name}, e->pos);
  }
  if (auto* n = std::get_if<Expr::Attr>(&e->node)) {
    // attribute chains keep their root variable (e.g. a beyond-control accessor)
    (void)n;
    return e;
  }
  if (auto* n = std::get_if<Expr::Card>(&e->node)) {
    return fcl::make_expr(Expr::Card{rewrite_set(n->set)}, e->pos);
  }
  if (auto* n = std::get_if<Expr::Arith>(&e->node)) {
    return fcl::make_expr(Expr::Arith{n->op, rewrite_expr(n->lhs), rewrite_expr(n->rhs)}, e->pos);
  }
  return e;
}

fcl::FormulaPtr rewrite_filter(const fcl::FormulaPtr& f) {
  using fcl::Formula;
  if (auto* n = std::get_if<Formula::Compare>(&f->node)) {
    return fcl::make_formula(Formula::Compare{rewrite_expr(n->lhs), n->op, rewrite_expr(n->rhs)},
                             f->pos);
  }
  if (auto* n = std::get_if<Formula::Member>(&f->node)) {
    return fcl::make_formula(Formula::Member{rewrite_expr(n->element), rewrite_set(n->set)},
                             f->pos);
  }
  if (auto* n = std::get_if<Formula::Not>(&f->node)) {
    return fcl::make_formula(Formula::Not{rewrite_filter(n->body)}, f->pos);
  }
  if (auto* n = std::get_if<Formula::And>(&f->node)) {
    return fcl::make_formula(Formula::And{rewrite_filter(n->lhs), rewrite_filter(n->rhs)}, f->pos);
  }
  if (auto* n = std::get_if<Formula::Or>(&f->node)) {
    return fcl::make_formula(Formula::Or{rewrite_filter(n->lhs), rewrite_filter(n->rhs)}, f->pos);
  }
  if (auto* n = std::get_if<Formula::Implies>(&f->node)) {
    return fcl::make_formula(Formula::Implies{rewrite_filter(n->lhs), rewrite_filter(n->rhs)},
                             f->pos);
  }
  return f;
}

struct FilterCursorParser {
  Cursor& cur;
  fcl::FormulaPtr parse() {
    // reuse the constraint formula grammar for the predicate
    std::string rest;
    // Reconstitute remaining tokens into text and delegate; positions inside
    // filters are secondary to keeping one grammar.
    for (;;) {
      const Token& t = cur.peek();
      if (t.kind == Token::Kind::End) break;
      cur.next();
      if (t.kind == Token::Kind::String) {
        rest += "'";
        for (char c : t.text) {
          if (c == '\'' || c == '\\') rest += '\\';
          rest += c;
        }
        rest += "'";
      } else {
        rest += t.text;
      }
      rest += " ";
    }
    fcl::ConstraintDocument doc =
        fcl::parse_constraints("constraint \"filter\"\n  " + rest + "\n");
    return doc.constraints.front().body;
  }
};

double number_value(const Token& t) {
  return t.is_real ? t.real_value : static_cast<double>(t.int_value);
}

}  // namespace

ArchitectureSpec parse_adsl(const std::string& text) {
  ArchitectureSpec spec;
  auto lines = dsl::tokenize_lines(text);
  std::size_t i = 0;

  auto body_lines = [&](int parent_indent) {
    std::vector<std::size_t> idx;
    while (i < lines.size() && lines[i].indent > parent_indent) idx.push_back(i++);
    return idx;
  };

  while (i < lines.size()) {
    const Line& line = lines[i];
    Cursor c(line);
    if (line.indent != 0) c.fail("a top-level section");

    if (c.accept_ident("component")) {
      ComponentDecl comp;
      comp.name = c.expect_ident().text;
      ++i;
      while (i < lines.size() && lines[i].indent > 0) {
        const Line& sub = lines[i];
        Cursor sc(sub);
        if (sc.accept_ident("name")) {
          sc.accept_punct(":");
          comp.display = sc.peek().kind == Token::Kind::String ? sc.expect_string().text
                                                               : sc.expect_ident().text;
          ++i;
        } else if (sc.accept_ident("attribute")) {
          Attribute attr;
          attr.id = sc.expect_ident().text;
          const int attr_indent = sub.indent;
          ++i;
          while (i < lines.size() && lines[i].indent > attr_indent) {
            Cursor ac(lines[i]);
            if (ac.accept_ident("name")) {
              ac.accept_punct(":");
              attr.display = ac.expect_string().text;
            } else if (ac.accept_ident("description")) {
              ac.accept_punct(":");
              attr.description = ac.expect_string().text;
            } else {
              ac.fail("'name' or 'description'");
            }
            ++i;
          }
          comp.attributes.push_back(std::move(attr));
        } else {
          sc.fail("'name' or 'attribute'");
        }
      }
      spec.components.push_back(std::move(comp));
      continue;
    }

    if (c.accept_ident("ensemble")) {
      EnsembleDecl ens;
      ens.id = c.expect_ident().text;
      ++i;
      for (std::size_t bi : body_lines(0)) {
        Cursor sc(lines[bi]);
        if (sc.accept_ident("name")) {
          sc.accept_punct(":");
          ens.name = sc.expect_string().text;
        } else if (sc.accept_ident("description")) {
          sc.accept_punct(":");
          ens.description = sc.expect_string().text;
        } else {
          sc.fail("'name' or 'description'");
        }
      }
      if (ens.name.empty()) ens.name = ens.id;
      spec.ensembles.push_back(std::move(ens));
      continue;
    }

    if (c.accept_ident("beyond")) {
      c.expect_punct("-");
      if (!c.accept_ident("control")) c.fail("'control'");
      BeyondControlDecl bc;
      bc.type = c.expect_ident().text;
      bc.accessor = c.expect_ident().text;
      bc.description = c.expect_string().text;
      spec.beyond_control.push_back(std::move(bc));
      ++i;
      continue;
    }

    if (c.accept_ident("periodically")) {
      if (!c.accept_ident("assign")) c.fail("'assign'");
      Assignment a;
      a.component_type = c.expect_ident().text;
      c.expect_punct("[");
      c.expect_punct("]");
      a.description = c.expect_string().text;
      ++i;
      // optional indented `if <predicate>` line
      if (i < lines.size() && lines[i].indent > 0) {
        Cursor fc(lines[i]);
        if (!fc.accept_ident("if")) fc.fail("'if'");
        std::ostringstream raw;
        FilterCursorParser fp{fc};
        fcl::FormulaPtr parsed = fp.parse();
        a.filter = rewrite_filter(parsed);
        a.filter_text = fcl::render(*parsed);
        ++i;
      }
      if (i >= lines.size()) throw ParseError("assignment missing 'into ensembles'", line.number, 1);
      Cursor ic(lines[i]);
      if (!ic.accept_ident("into")) ic.fail("'into ensembles'");
      if (!ic.accept_ident("ensembles")) ic.fail("'ensembles'");
      for (;;) {
        a.ensembles.push_back(ic.expect_ident().text);
        if (!ic.accept_punct(",")) break;
      }
      ++i;
      if (i >= lines.size()) throw ParseError("assignment missing 'as <method>'", line.number, 1);
      Cursor mc(lines[i]);
      if (!mc.accept_ident("as")) mc.fail("'as'");
      a.method = mc.expect_ident().text;
      ++i;
      spec.assignments.push_back(std::move(a));
      continue;
    }

    if (c.accept_ident("strategy")) {
      c.accept_punct(":");
      spec.strategy = c.expect_string().text;
      ++i;
      continue;
    }

    if (c.accept_ident("am_interface")) {
      AmInterface am;
      am.class_name = c.expect_ident().text;
      c.expect_punct("(");
      am.base_module = c.expect_ident().text;
      c.expect_punct(".");
      am.base_class = c.expect_ident().text;
      c.expect_punct(")");
      spec.am_interface = std::move(am);
      ++i;
      continue;
    }

    if (c.accept_ident("initial")) {
      if (!c.accept_ident("state")) c.fail("'state'");
      InitialState st;
      st.name = c.expect_string().text;
      bool have_seed = false;
      ++i;
      for (std::size_t bi : body_lines(0)) {
        Cursor sc(lines[bi]);
        Token key = sc.expect_ident();
        sc.expect_punct(":");
        const Token& num = sc.peek();
        bool negative = false;
        if (num.kind == Token::Kind::Punct && num.text == "-") {
          sc.next();
          negative = true;
        }
        const Token& val = sc.peek();
        if (val.kind != Token::Kind::Number) sc.fail("a number");
        sc.next();
        if (key.text == "random_seed") {
          if (val.is_real) {
            throw ParseError("random_seed must be an integer", val.line, val.col);
          }
          st.random_seed = negative ? -val.int_value : val.int_value;
          have_seed = true;
        } else {
          st.params[key.text] = negative ? -number_value(val) : number_value(val);
        }
      }
      if (!have_seed) {
        throw ParseError("seed required for repeatability (initial state \"" + st.name + "\")",
                         line.number, 1, "random_seed: <integer>");
      }
      spec.initial_states.push_back(std::move(st));
      continue;
    }

    c.fail("'component', 'ensemble', 'beyond-control', 'periodically', 'strategy', "
           "'am_interface' or 'initial state'");
  }
  return spec;
}

std::vector<InitialState> parse_initial_states(const std::string& text) {
  ArchitectureSpec spec = parse_adsl(text);
  if (!spec.components.empty() || !spec.ensembles.empty() || !spec.assignments.empty() ||
      !spec.beyond_control.empty() || spec.am_interface || !spec.strategy.empty()) {
    throw Error("initial-state file may only contain initial state blocks");
  }
  return spec.initial_states;
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string number_text(double d) {
  if (d == static_cast<double>(static_cast<std::int64_t>(d))) {
    return std::to_string(static_cast<std::int64_t>(d));
  }
  std::ostringstream os;
  os << d;
  return os.str();
}

}  // namespace

std::string render(const ArchitectureSpec& spec) {
  std::ostringstream out;
  for (const auto& comp : spec.components) {
    out << "component " << comp.name << "\n";
    if (!comp.display.empty()) out << "  name " << quoted(comp.display) << "\n";
    for (const auto& attr : comp.attributes) {
      out << "  attribute " << attr.id << "\n";
      if (!attr.display.empty()) out << "    name " << quoted(attr.display) << "\n";
      if (!attr.description.empty()) {
        out << "    description " << quoted(attr.description) << "\n";
      }
    }
    out << "\n";
  }
  for (const auto& ens : spec.ensembles) {
    out << "ensemble " << ens.id << "\n";
    out << "  name " << quoted(ens.name) << "\n";
    if (!ens.description.empty()) out << "  description " << quoted(ens.description) << "\n";
    out << "\n";
  }
  for (const auto& bc : spec.beyond_control) {
    out << "beyond-control " << bc.type << " " << bc.accessor << " " << quoted(bc.description)
        << "\n";
  }
  if (!spec.beyond_control.empty()) out << "\n";
  for (const auto& a : spec.assignments) {
    out << "periodically assign " << a.component_type << "[] " << quoted(a.description) << "\n";
    if (!a.filter_text.empty()) out << "  if " << a.filter_text << "\n";
    out << "into ensembles ";
    for (std::size_t k = 0; k < a.ensembles.size(); ++k) {
      if (k) out << ", ";
      out << a.ensembles[k];
    }
    out << "\n";
    out << "as " << a.method << "\n\n";
  }
  if (!spec.strategy.empty()) out << "strategy: " << quoted(spec.strategy) << "\n\n";
  if (spec.am_interface) {
    out << "am_interface " << spec.am_interface->class_name << "(" << spec.am_interface->base_module
        << "." << spec.am_interface->base_class << ")\n\n";
  }
  for (const auto& st : spec.initial_states) {
    out << "initial state " << quoted(st.name) << "\n";
    out << "  random_seed: " << st.random_seed << "\n";
    for (const auto& [k, v] : st.params) {
      out << "  " << k << ": " << number_text(v) << "\n";
    }
    out << "\n";
  }
  return out.str();
}

std::vector<std::string> validate(const ArchitectureSpec& spec) {
  std::vector<std::string> problems;
  std::set<std::string> ensemble_ids;
  for (const auto& e : spec.ensembles) {
    if (!ensemble_ids.insert(e.id).second) problems.push_back("duplicate ensemble id: " + e.id);
  }
  std::set<std::string> component_names;
  for (const auto& c : spec.components) {
    if (!component_names.insert(c.name).second) {
      problems.push_back("duplicate component type: " + c.name);
    }
  }
  std::set<std::string> methods;
  for (const auto& a : spec.assignments) {
    if (!methods.insert(a.method).second) {
      problems.push_back("duplicate assignment method: " + a.method);
    }
    if (!component_names.count(a.component_type)) {
      problems.push_back("assignment " + a.method + " filters undeclared component type " +
                         a.component_type);
    }
    for (const auto& eid : a.ensembles) {
      if (!ensemble_ids.count(eid)) {
        problems.push_back("assignment " + a.method + " references undeclared ensemble " + eid);
      }
    }
  }
  for (const auto& bc : spec.beyond_control) {
    if (!component_names.count(bc.type)) {
      problems.push_back("beyond-control " + bc.accessor + " has undeclared type " + bc.type);
    }
  }
  std::set<std::string> state_names;
  for (const auto& st : spec.initial_states) {
    if (!state_names.insert(st.name).second) {
      problems.push_back("duplicate initial state: " + st.name);
    }
  }
  return problems;
}

std::vector<std::string> cross_validate(const ArchitectureSpec& spec,
                                        const fcl::ConstraintDocument& doc,
                                        const AttributeSchema* runtime_schema) {
  std::vector<std::string> problems;

  std::set<std::string> set_names;
  for (const auto& e : spec.ensembles) set_names.insert(e.id);
  for (const auto& c : spec.components) {
    set_names.insert(c.name);
    set_names.insert(c.name + "s");
  }
  std::set<std::string> attr_names;
  for (const auto& c : spec.components) {
    for (const auto& a : c.attributes) attr_names.insert(a.id);
  }
  if (runtime_schema) {
    for (const auto& [type, attrs] : runtime_schema->attrs_by_type) {
      (void)type;
      attr_names.insert(attrs.begin(), attrs.end());
    }
  }
  std::set<std::string> accessors;
  for (const auto& bc : spec.beyond_control) accessors.insert(bc.accessor);

  for (const auto& c : doc.constraints) {
    std::set<std::string> known_sets = set_names;
    std::set<std::string> bound;

    std::function<void(const fcl::SetExpr&)> check_set;
    std::function<void(const fcl::Expr&)> check_expr;
    std::function<void(const fcl::Formula&)> check_formula;

    check_set = [&](const fcl::SetExpr& s) {
      using fcl::SetExpr;
      if (auto* n = std::get_if<SetExpr::Named>(&s.node)) {
        if (!known_sets.count(n->name)) {
          problems.push_back("constraint \"" + c.description + "\": unknown set " + n->name);
        }
        return;
      }
      if (auto* n = std::get_if<SetExpr::Comprehension>(&s.node)) {
        check_set(*n->source);
        bound.insert(n->var);
        check_formula(*n->predicate);
        bound.erase(n->var);
        return;
      }
      if (auto* n = std::get_if<SetExpr::Intersect>(&s.node)) {
        check_set(*n->lhs);
        check_set(*n->rhs);
        return;
      }
      const auto& n = std::get<SetExpr::Union>(s.node);
      check_set(*n.lhs);
      check_set(*n.rhs);
    };

    check_expr = [&](const fcl::Expr& e) {
      using fcl::Expr;
      if (auto* n = std::get_if<Expr::Var>(&e.node)) {
        if (!bound.count(n->name) && !accessors.count(n->name)) {
          problems.push_back("constraint \"" + c.description + "\": unbound name " + n->name);
        }
        return;
      }
      if (auto* n = std::get_if<Expr::Attr>(&e.node)) {
        check_expr(*n->object);
        if (!attr_names.count(n->name)) {
          problems.push_back("constraint \"" + c.description + "\": unknown attribute " + n->name);
        }
        return;
      }
      if (auto* n = std::get_if<Expr::Card>(&e.node)) {
        check_set(*n->set);
        return;
      }
      if (auto* n = std::get_if<Expr::Arith>(&e.node)) {
        check_expr(*n->lhs);
        check_expr(*n->rhs);
      }
    };

    check_formula = [&](const fcl::Formula& f) {
      using fcl::Formula;
      if (auto* n = std::get_if<Formula::Compare>(&f.node)) {
        check_expr(*n->lhs);
        check_expr(*n->rhs);
        return;
      }
      if (auto* n = std::get_if<Formula::Member>(&f.node)) {
        check_expr(*n->element);
        check_set(*n->set);
        return;
      }
      if (auto* n = std::get_if<Formula::Not>(&f.node)) return check_formula(*n->body);
      if (auto* n = std::get_if<Formula::And>(&f.node)) {
        check_formula(*n->lhs);
        check_formula(*n->rhs);
        return;
      }
      if (auto* n = std::get_if<Formula::Or>(&f.node)) {
        check_formula(*n->lhs);
        check_formula(*n->rhs);
        return;
      }
      if (auto* n = std::get_if<Formula::Implies>(&f.node)) {
        check_formula(*n->lhs);
        check_formula(*n->rhs);
        return;
      }
      if (auto* n = std::get_if<Formula::Quantified>(&f.node)) {
        check_set(*n->domain);
        bound.insert(n->var);
        check_formula(*n->body);
        bound.erase(n->var);
        return;
      }
      if (auto* n = std::get_if<Formula::Within>(&f.node)) check_formula(*n->body);
    };

    for (const auto& [name, set] : c.lets) {
      check_set(*set);
      known_sets.insert(name);
    }
    check_formula(*c.body);
  }
  return problems;
}

}  // namespace fclv::adsl
