#include "mu/registry.hpp"

#include <map>

namespace mu {

namespace {

const std::vector<PrRelation>& registry() {
  static const std::vector<PrRelation> rels = {
      {"=", 2, [](const std::vector<uint64_t>& a) { return a[0] == a[1]; }},
      {"<", 2, [](const std::vector<uint64_t>& a) { return a[0] < a[1]; }},
      {"+", 3, [](const std::vector<uint64_t>& a) { return a[0] + a[1] == a[2]; }},
      {"*", 3, [](const std::vector<uint64_t>& a) { return a[0] * a[1] == a[2]; }},
  };
  return rels;
}

const std::vector<Formula>& def_axiom_schemas() {
  static const std::vector<Formula> schemas = [] {
    std::vector<Formula> out;
    auto add = [&](const char* s) { out.push_back(parse_formula(s)); };
    add("(= x x)");
    add("(not (= (S x) 0))");
    add("(not (= 0 (S x)))");
    add("(or (not (= (S x) (S y))) (= x y))");
    add("(< x (S x))");
    add("(not (< x 0))");
    add("(or (not (< x y)) (< x (S y)))");
    add("(+ x 0 x)");
    add("(or (not (+ x y z)) (+ x (S y) (S z)))");
    add("(* x 0 0)");
    add("(or (not (* x y z)) (or (not (+ z x w)) (* x (S y) w)))");
    return out;
  }();
  return schemas;
}

bool match_term(const Term& pat, const Term& t, std::map<Name, Term>& binding) {
  switch (pat->kind) {
    case TermNode::Kind::Var: {
      auto it = binding.find(pat->var);
      if (it != binding.end()) return term_eq(it->second, t);
      binding[pat->var] = t;
      return true;
    }
    case TermNode::Kind::Zero: return t->kind == TermNode::Kind::Zero;
    case TermNode::Kind::Succ:
      return t->kind == TermNode::Kind::Succ && match_term(pat->sub, t->sub, binding);
  }
  return false;
}

bool match_formula(const Formula& pat, const Formula& f, std::map<Name, Term>& binding) {
  const FNode& p = pat.node();
  const FNode& n = f.node();
  if (p.kind != n.kind) return false;
  switch (p.kind) {
    case FKind::PrAtom: {
      if (p.rel != n.rel || p.args.size() != n.args.size()) return false;
      for (size_t i = 0; i < p.args.size(); i++)
        if (!match_term(p.args[i], n.args[i], binding)) return false;
      return true;
    }
    case FKind::Neg: return match_formula(p.body, n.body, binding);
    case FKind::And:
    case FKind::Or:
      return match_formula(p.left, n.left, binding) && match_formula(p.right, n.right, binding);
    default: return false;  // schemas are quantifier-free over PR atoms
  }
}

}  // namespace

const PrRelation* registry_find(const std::string& name) {
  for (auto& r : registry())
    if (r.name == name) return &r;
  return nullptr;
}

bool evaluate_literal(const Formula& f) {
  const FNode* n = &f.node();
  bool negated = false;
  if (n->kind == FKind::Neg) {
    negated = true;
    n = &n->body.node();
  }
  if (n->kind != FKind::PrAtom)
    throw KernelError("evaluate_literal: not a primitive-recursive literal: " + print_formula(f));
  const PrRelation* rel = registry_find(n->rel);
  if (!rel) throw KernelError("unknown relation symbol: " + n->rel);
  if (rel->arity != n->args.size()) throw KernelError("arity mismatch for " + n->rel);
  std::vector<uint64_t> vals;
  for (auto& t : n->args) {
    auto v = numeral_value(t);
    if (!v) throw KernelError("evaluate_literal: term not closed: " + print_term(t));
    vals.push_back(*v);
  }
  bool b = rel->eval(vals);
  return negated ? !b : b;
}

bool is_def_axiom_instance(const Formula& f) {
  for (auto& schema : def_axiom_schemas()) {
    std::map<Name, Term> binding;
    if (match_formula(schema, f, binding)) return true;
  }
  return false;
}

bool evaluate_closed_qf(const Formula& f) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::Neg: return evaluate_literal(f);
    case FKind::And: return evaluate_closed_qf(n.left) && evaluate_closed_qf(n.right);
    case FKind::Or: return evaluate_closed_qf(n.left) || evaluate_closed_qf(n.right);
    default: throw KernelError("evaluate_closed_qf: not quantifier-free: " + print_formula(f));
  }
}

}  // namespace mu
