#include "mu/rule.hpp"

#include <algorithm>

namespace mu {

const char* rule_name_str(RuleName n) {
  switch (n) {
    case RuleName::Def: return "def";
    case RuleName::Ax: return "ax";
    case RuleName::True: return "true";
    case RuleName::AndI: return "andi";
    case RuleName::OrIL: return "oril";
    case RuleName::OrIR: return "orir";
    case RuleName::AllI: return "alli";
    case RuleName::Omega: return "omega";
    case RuleName::ExI: return "exi";
    case RuleName::IndArith: return "ind-arith";
    case RuleName::IndMu: return "ind-mu";
    case RuleName::Cl: return "cl";
    case RuleName::Cut: return "cut";
    case RuleName::Rep: return "rep";
    case RuleName::OmegaFlat: return "oflat";
    case RuleName::CutOmegaFlat: return "cutoflat";
    case RuleName::Read: return "read";
  }
  return "?";
}

namespace {

uint64_t compute_fp(const RuleV& v) {
  uint64_t h = hash_mix(101, static_cast<uint64_t>(v.name));
  for (auto& f : v.formulas) h = hash_mix(h, f.hash());
  for (auto& t : v.terms) h = hash_mix(h, hash_str(print_term(t)));
  h = hash_mix(h, hash_str(v.var));
  if (v.name == RuleName::Read) {
    h = hash_mix(h, v.theta.hash());
    h = hash_mix(h, v.read_tag.hash());
    h = hash_mix(h, position_hash(v.eps));
    h = hash_mix(h, v.read_theory.hash());
  }
  return h ? h : 1;
}

Rule finish(RuleV v) {
  v.fp = compute_fp(v);
  return std::make_shared<const RuleV>(std::move(v));
}

const FNode& expect(const Formula& f, FKind k, const char* what) {
  const FNode& n = f.node();
  if (n.kind != k) throw KernelError(std::string("expected ") + what + ": " + print_formula(f));
  return n;
}

}  // namespace

Rule rule_def(Formula f) {
  RuleV v;
  v.name = RuleName::Def;
  v.conclusion = {f};
  v.formulas = {std::move(f)};
  v.arity = PremiseArity::None;
  return finish(std::move(v));
}

Rule rule_ax(Formula eta) {
  if (!is_atomic(eta)) throw KernelError("Ax needs an atomic formula");
  RuleV v;
  v.name = RuleName::Ax;
  v.conclusion = {eta, mk_neg(eta)};
  v.formulas = {std::move(eta)};
  v.arity = PremiseArity::None;
  return finish(std::move(v));
}

Rule rule_true(Formula eta) {
  if (!is_literal(eta) || is_mu_literal(eta))
    throw KernelError("True needs a primitive-recursive literal");
  RuleV v;
  v.name = RuleName::True;
  v.conclusion = {eta};
  v.formulas = {std::move(eta)};
  v.arity = PremiseArity::None;
  return finish(std::move(v));
}

Rule rule_and_i(Formula conj) {
  expect(conj, FKind::And, "conjunction");
  RuleV v;
  v.name = RuleName::AndI;
  v.conclusion = {conj};
  v.formulas = {std::move(conj)};
  v.arity = PremiseArity::PairLR;
  return finish(std::move(v));
}

Rule rule_or_il(Formula disj) {
  expect(disj, FKind::Or, "disjunction");
  RuleV v;
  v.name = RuleName::OrIL;
  v.conclusion = {disj};
  v.formulas = {std::move(disj)};
  v.arity = PremiseArity::Single;
  return finish(std::move(v));
}

Rule rule_or_ir(Formula disj) {
  expect(disj, FKind::Or, "disjunction");
  RuleV v;
  v.name = RuleName::OrIR;
  v.conclusion = {disj};
  v.formulas = {std::move(disj)};
  v.arity = PremiseArity::Single;
  return finish(std::move(v));
}

Rule rule_all_i(Name y, Formula all) {
  const FNode& n = expect(all, FKind::Forall, "universal");
  Binding b;
  b.first[n.qvar] = mk_var(y);
  if (!is_substitutable(n.body, b))
    throw KernelError("AllI: phi[x->y] is not a permitted substitution");
  RuleV v;
  v.name = RuleName::AllI;
  v.conclusion = {all};
  v.formulas = {std::move(all)};
  v.var = std::move(y);
  v.arity = PremiseArity::Single;
  return finish(std::move(v));
}

Rule rule_omega(Formula all) {
  expect(all, FKind::Forall, "universal");
  RuleV v;
  v.name = RuleName::Omega;
  v.conclusion = {all};
  v.formulas = {std::move(all)};
  v.arity = PremiseArity::Naturals;
  return finish(std::move(v));
}

Rule rule_ex_i(Term t, Formula ex) {
  const FNode& n = expect(ex, FKind::Exists, "existential");
  Binding b;
  b.first[n.qvar] = t;
  if (!is_substitutable(n.body, b))
    throw KernelError("ExI: phi[x->t] is not a permitted substitution");
  RuleV v;
  v.name = RuleName::ExI;
  v.conclusion = {ex};
  v.formulas = {std::move(ex)};
  v.terms = {std::move(t)};
  v.arity = PremiseArity::Single;
  return finish(std::move(v));
}

Rule rule_ind_arith(Term t, Formula all) {
  const FNode& n = expect(all, FKind::Forall, "universal");
  auto inst = [&](const Term& s) { return subst_term(n.body, n.qvar, s); };
  RuleV v;
  v.name = RuleName::IndArith;
  Formula step =
      mk_exists(n.qvar, mk_and(n.body, negate(inst(mk_succ(mk_var(n.qvar))))));
  v.conclusion = {negate(inst(mk_zero())), step, inst(t)};
  v.formulas = {std::move(all)};
  v.terms = {std::move(t)};
  v.arity = PremiseArity::None;
  return finish(std::move(v));
}

Rule rule_ind_mu(Term t, Formula mu_atom, Name y, Formula psi) {
  const FNode& n = expect(mu_atom, FKind::MuAtom, "mu-atom");
  Binding bx;
  bx.second[n.mu_X] = {psi, y};
  if (!is_substitutable(n.body, bx)) throw KernelError("IndMu: phi[X->psi] not permitted");
  Binding by;
  by.first[y] = mk_var(n.mu_x);
  if (!is_substitutable(psi, by)) throw KernelError("IndMu: psi[y->x] not permitted");
  Binding bt;
  bt.first[y] = t;
  if (!is_substitutable(psi, bt)) throw KernelError("IndMu: psi[y->t] not permitted");

  Formula phi_psi = substitute(n.body, bx);           // phi(x, psi)
  Formula psi_x = subst_term(psi, y, mk_var(n.mu_x)); // psi(x)
  Formula psi_t = subst_term(psi, y, t);              // psi(t)
  Formula target = mk_mu_atom(t, n.mu_x, n.mu_X, n.body);
  RuleV v;
  v.name = RuleName::IndMu;
  v.conclusion = {mk_exists(n.mu_x, mk_and(phi_psi, negate(psi_x))), mk_neg(target), psi_t};
  v.formulas = {std::move(mu_atom), std::move(psi)};
  v.terms = {std::move(t)};
  v.var = std::move(y);
  v.arity = PremiseArity::None;
  return finish(std::move(v));
}

Rule rule_cl(Formula mu_atom) {
  const FNode& n = expect(mu_atom, FKind::MuAtom, "mu-atom");
  Formula mu_expr_atom = mk_mu_atom(mk_var(n.mu_x), n.mu_x, n.mu_X, n.body);
  Binding b;
  b.first[n.mu_x] = n.args[0];
  b.second[n.mu_X] = {mu_expr_atom, n.mu_x};
  if (!is_substitutable(n.body, b))
    throw KernelError("Cl: phi[x->t][X->mu] is not a permitted substitution");
  RuleV v;
  v.name = RuleName::Cl;
  v.conclusion = {mu_atom};
  v.formulas = {std::move(mu_atom)};
  v.arity = PremiseArity::Single;
  return finish(std::move(v));
}

Rule rule_cut(Formula f) {
  if (!bracket_free(f)) throw KernelError("Cut formula must be bracket-free");
  RuleV v;
  v.name = RuleName::Cut;
  v.formulas = {std::move(f)};
  v.arity = PremiseArity::PairLR;
  return finish(std::move(v));
}

Rule rule_rep() {
  static const Rule rep = [] {
    RuleV v;
    v.name = RuleName::Rep;
    v.arity = PremiseArity::Single;
    return finish(std::move(v));
  }();
  return rep;
}

Rule rule_omega_flat(Formula mu_atom) {
  expect(mu_atom, FKind::MuAtom, "mu-atom");
  RuleV v;
  v.name = RuleName::OmegaFlat;
  v.conclusion = {mk_neg(mu_atom)};
  v.formulas = {std::move(mu_atom)};
  v.arity = PremiseArity::BotOnly;
  return finish(std::move(v));
}

Rule rule_cut_omega_flat(Formula mu_atom) {
  expect(mu_atom, FKind::MuAtom, "mu-atom");
  RuleV v;
  v.name = RuleName::CutOmegaFlat;
  v.formulas = {std::move(mu_atom)};
  v.arity = PremiseArity::PairTopBot;
  return finish(std::move(v));
}

Rule rule_read(Theory read_theory, Sequent theta, Formula tag, Position eps) {
  expect(tag, FKind::MuAtom, "mu-atom tag");
  if (!theta.contains(tag)) throw KernelError("Read: tag must be a member of theta");
  RuleV v;
  v.name = RuleName::Read;
  v.read_theory = read_theory;
  v.theta = std::move(theta);
  v.read_tag = std::move(tag);
  v.eps = std::move(eps);
  // Formula premises: m in mu y Y . psi for each negated mu-literal in theta
  // whose Omega-flat rule does not belong to the theory being read.
  if (read_theory.read_formula_premises()) {
    for (auto& f : v.theta) {
      if (f.kind() == FKind::Neg && f.node().body.kind() == FKind::MuAtom) {
        Formula pos = f.node().body;
        if (!read_theory.contains(rule_omega_flat(pos))) v.formula_premises.push_back(pos);
      }
    }
  }
  Sequent concl = delta_of_position(v.eps).set_minus(v.theta);
  std::vector<Formula> th(v.theta.begin(), v.theta.end());
  concl.insert(mk_bracket(std::move(th), v.read_tag, v.eps));
  v.conclusion = std::move(concl);
  v.arity = PremiseArity::ReadBranches;
  return finish(std::move(v));
}

uint64_t rule_fingerprint(const Rule& r) { return r->fp; }

bool rule_eq(const Rule& a, const Rule& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  return a->fp == b->fp && a->name == b->name;
}

// ---------------------------------------------------------------------------
// Premises
// ---------------------------------------------------------------------------

bool BracketPattern::matches(const Formula& f) const {
  if (f.kind() != FKind::Bracket) return false;
  const FNode& n = f.node();
  if (!(n.tag == tag)) return false;
  Sequent th;
  for (auto& g : n.theta) th.insert(g);
  if (!theta_min.subset_of(th)) return false;
  if (branch_rule) {
    if (n.eps.size() != eps.size() + 1) return false;
    if (!eps.is_prefix_of(n.eps)) return false;
    const PosStep& last = n.eps.steps.back();
    return rule_fingerprint(last.rule) == rule_fingerprint(branch_rule) &&
           label_in_universe(branch_rule, last.label);
  }
  return position_eq(n.eps, eps);
}

bool BracketPattern::subsumed_by(const BracketPattern& o) const {
  if (!(tag == o.tag)) return false;
  if (!o.theta_min.subset_of(theta_min)) return false;
  if (o.branch_rule) {
    if (branch_rule)
      return position_eq(eps, o.eps) &&
             rule_fingerprint(branch_rule) == rule_fingerprint(o.branch_rule);
    if (eps.size() != o.eps.size() + 1 || !o.eps.is_prefix_of(eps)) return false;
    const PosStep& last = eps.steps.back();
    return rule_fingerprint(last.rule) == rule_fingerprint(o.branch_rule) &&
           label_in_universe(o.branch_rule, last.label);
  }
  if (branch_rule) return false;
  return position_eq(eps, o.eps);
}

bool WideSequent::contains(const Formula& f) const {
  if (explicit_part.contains(f)) return true;
  for (auto& p : patterns)
    if (p.matches(f)) return true;
  return false;
}

bool WideSequent::subset_of(const WideSequent& o) const {
  for (auto& f : explicit_part)
    if (!o.contains(f)) return false;
  for (auto& p : patterns) {
    bool ok = false;
    for (auto& q : o.patterns)
      if (p.subsumed_by(q)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

WideSequent WideSequent::set_union(const WideSequent& o) const {
  WideSequent r = *this;
  r.explicit_part = r.explicit_part.set_union(o.explicit_part);
  for (auto& p : o.patterns) r.patterns.push_back(p);
  return r;
}

std::string WideSequent::str() const {
  std::string s = print_sequent(explicit_part);
  for (auto& p : patterns) {
    s += " +pattern[";
    s += print_sequent(p.theta_min);
    s += "]^{";
    s += print_formula(p.tag);
    s += ",";
    s += print_position(p.eps);
    s += p.branch_rule ? ".<branch>}" : "}";
  }
  return s;
}

bool label_in_universe(const Rule& r, const BranchLabel& l) {
  switch (r->arity) {
    case PremiseArity::None: return false;
    case PremiseArity::Single: return std::holds_alternative<LabelTop>(l);
    case PremiseArity::PairLR:
      return std::holds_alternative<LabelL>(l) || std::holds_alternative<LabelR>(l);
    case PremiseArity::PairTopBot:
      return std::holds_alternative<LabelTop>(l) || std::holds_alternative<LabelBot>(l);
    case PremiseArity::BotOnly: return std::holds_alternative<LabelBot>(l);
    case PremiseArity::Naturals: return std::holds_alternative<uint64_t>(l);
    case PremiseArity::ReadBranches: {
      if (auto* er = std::get_if<Rule>(&l)) return r->read_theory.contains(*er);
      if (auto* ef = std::get_if<Formula>(&l)) {
        for (auto& f : r->formula_premises)
          if (f == *ef) return true;
        return false;
      }
      return false;
    }
  }
  return false;
}

std::vector<BranchLabel> finite_labels(const Rule& r) {
  switch (r->arity) {
    case PremiseArity::None: return {};
    case PremiseArity::Single: return {LabelTop{}};
    case PremiseArity::PairLR: return {LabelL{}, LabelR{}};
    case PremiseArity::PairTopBot: return {LabelTop{}, LabelBot{}};
    case PremiseArity::BotOnly: return {LabelBot{}};
    default:
      throw KernelError(std::string("finite_labels: infinite premise family of ") +
                        rule_name_str(r->name));
  }
}

WideSequent rule_premise(const Rule& r, const BranchLabel& l) {
  const RuleV& v = *r;
  if (!label_in_universe(r, l))
    throw KernelError(std::string("label outside premise family of ") + rule_name_str(v.name) +
                      ": " + print_label(l));
  switch (v.name) {
    case RuleName::Def:
    case RuleName::Ax:
    case RuleName::True:
    case RuleName::IndArith:
    case RuleName::IndMu:
      throw KernelError("axiom rules have no premises");
    case RuleName::AndI: {
      const FNode& n = v.formulas[0].node();
      return WideSequent{Sequent{std::holds_alternative<LabelL>(l) ? n.left : n.right}};
    }
    case RuleName::OrIL: return WideSequent{Sequent{v.formulas[0].node().left}};
    case RuleName::OrIR: return WideSequent{Sequent{v.formulas[0].node().right}};
    case RuleName::AllI: {
      const FNode& n = v.formulas[0].node();
      return WideSequent{Sequent{subst_term(n.body, n.qvar, mk_var(v.var))}};
    }
    case RuleName::Omega: {
      const FNode& n = v.formulas[0].node();
      return WideSequent{Sequent{subst_term(n.body, n.qvar, mk_num(std::get<uint64_t>(l)))}};
    }
    case RuleName::ExI: {
      const FNode& n = v.formulas[0].node();
      return WideSequent{Sequent{subst_term(n.body, n.qvar, v.terms[0])}};
    }
    case RuleName::Cl: {
      const FNode& n = v.formulas[0].node();
      Formula mu_expr_atom = mk_mu_atom(mk_var(n.mu_x), n.mu_x, n.mu_X, n.body);
      Binding b;
      b.first[n.mu_x] = n.args[0];
      b.second[n.mu_X] = {mu_expr_atom, n.mu_x};
      return WideSequent{Sequent{substitute(n.body, b)}};
    }
    case RuleName::Cut:
      return WideSequent{Sequent{std::holds_alternative<LabelL>(l) ? v.formulas[0]
                                                                   : negate(v.formulas[0])}};
    case RuleName::Rep: return WideSequent{};
    case RuleName::OmegaFlat: {
      Formula br = mk_bracket({v.formulas[0]}, v.formulas[0], Position{});
      return WideSequent{Sequent{br}};
    }
    case RuleName::CutOmegaFlat: {
      if (std::holds_alternative<LabelTop>(l)) return WideSequent{Sequent{v.formulas[0]}};
      Formula br = mk_bracket({v.formulas[0]}, v.formulas[0], Position{});
      return WideSequent{Sequent{br}};
    }
    case RuleName::Read: {
      if (auto* ef = std::get_if<Formula>(&l)) return WideSequent{Sequent{*ef}};
      const Rule& er = std::get<Rule>(l);
      WideSequent w{er->conclusion.set_minus(v.theta)};
      BracketPattern p;
      p.theta_min = v.theta;
      p.tag = v.read_tag;
      p.eps = v.eps;
      p.branch_rule = er;
      w.add_pattern(std::move(p));
      return w;
    }
  }
  throw KernelError("unreachable");
}

Sequent delta_of_position(const Position& eps) {
  if (eps.empty()) return {};
  const PosStep& last = eps.steps.back();
  return rule_premise(last.rule, last.label).explicit_part;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Sexpr label_to_sexpr(const BranchLabel& l) {
  switch (l.index()) {
    case 0: return Sexpr::sym("top");
    case 1: return Sexpr::sym("bot");
    case 2: return Sexpr::sym("L");
    case 3: return Sexpr::sym("R");
    case 4: return Sexpr::sym(std::to_string(std::get<uint64_t>(l)));
    case 5: return rule_to_sexpr(std::get<Rule>(l));
    case 6: return Sexpr::list({Sexpr::sym("fml"), formula_to_sexpr(std::get<Formula>(l))});
  }
  throw KernelError("unreachable");
}

BranchLabel label_from_sexpr(const Sexpr& e) {
  if (e.is_atom) {
    if (e.atom == "top") return LabelTop{};
    if (e.atom == "bot") return LabelBot{};
    if (e.atom == "L") return LabelL{};
    if (e.atom == "R") return LabelR{};
    return static_cast<uint64_t>(std::stoull(e.atom));
  }
  if (e.head() == "fml") return formula_from_sexpr(e.at(1));
  if (e.head() == "rule") return rule_from_sexpr(e);
  throw KernelError("bad label: " + print_sexpr(e));
}

Sexpr position_to_sexpr(const Position& p) {
  std::vector<Sexpr> xs{Sexpr::sym("pos")};
  for (auto& s : p.steps)
    xs.push_back(Sexpr::list({Sexpr::sym("step"), rule_to_sexpr(s.rule), label_to_sexpr(s.label)}));
  return Sexpr::list(std::move(xs));
}

Position position_from_sexpr(const Sexpr& e) {
  if (e.head() != "pos") throw KernelError("bad position: " + print_sexpr(e));
  Position p;
  for (size_t i = 1; i < e.size(); i++) {
    const Sexpr& s = e.at(i);
    if (s.head() != "step" || s.size() != 3) throw KernelError("bad step: " + print_sexpr(s));
    p.steps.push_back(PosStep{rule_from_sexpr(s.at(1)), label_from_sexpr(s.at(2))});
  }
  return p;
}

Sexpr rule_to_sexpr(const Rule& r) {
  const RuleV& v = *r;
  std::vector<Sexpr> xs{Sexpr::sym("rule"), Sexpr::sym(rule_name_str(v.name))};
  switch (v.name) {
    case RuleName::Def:
    case RuleName::Ax:
    case RuleName::True:
    case RuleName::AndI:
    case RuleName::OrIL:
    case RuleName::OrIR:
    case RuleName::Omega:
    case RuleName::Cl:
    case RuleName::Cut:
    case RuleName::OmegaFlat:
    case RuleName::CutOmegaFlat:
      xs.push_back(formula_to_sexpr(v.formulas[0]));
      break;
    case RuleName::AllI:
      xs.push_back(Sexpr::sym(v.var));
      xs.push_back(formula_to_sexpr(v.formulas[0]));
      break;
    case RuleName::ExI:
    case RuleName::IndArith:
      xs.push_back(term_to_sexpr(v.terms[0]));
      xs.push_back(formula_to_sexpr(v.formulas[0]));
      break;
    case RuleName::IndMu:
      xs.push_back(term_to_sexpr(v.terms[0]));
      xs.push_back(formula_to_sexpr(v.formulas[0]));
      xs.push_back(Sexpr::sym(v.var));
      xs.push_back(formula_to_sexpr(v.formulas[1]));
      break;
    case RuleName::Rep:
      break;
    case RuleName::Read: {
      xs.push_back(v.read_theory.to_sexpr());
      std::vector<Sexpr> th{Sexpr::sym("theta")};
      for (auto& f : v.theta) th.push_back(formula_to_sexpr(f));
      xs.push_back(Sexpr::list(std::move(th)));
      xs.push_back(Sexpr::list({Sexpr::sym("tag"), formula_to_sexpr(v.read_tag)}));
      xs.push_back(position_to_sexpr(v.eps));
      break;
    }
  }
  return Sexpr::list(std::move(xs));
}

Rule rule_from_sexpr(const Sexpr& e) {
  if (e.head() != "rule" || e.size() < 2) throw KernelError("bad rule: " + print_sexpr(e));
  const std::string& n = e.at(1).atom;
  if (n == "def") return rule_def(formula_from_sexpr(e.at(2)));
  if (n == "ax") return rule_ax(formula_from_sexpr(e.at(2)));
  if (n == "true") return rule_true(formula_from_sexpr(e.at(2)));
  if (n == "andi") return rule_and_i(formula_from_sexpr(e.at(2)));
  if (n == "oril") return rule_or_il(formula_from_sexpr(e.at(2)));
  if (n == "orir") return rule_or_ir(formula_from_sexpr(e.at(2)));
  if (n == "alli") return rule_all_i(e.at(2).atom, formula_from_sexpr(e.at(3)));
  if (n == "omega") return rule_omega(formula_from_sexpr(e.at(2)));
  if (n == "exi") return rule_ex_i(term_from_sexpr(e.at(2)), formula_from_sexpr(e.at(3)));
  if (n == "ind-arith")
    return rule_ind_arith(term_from_sexpr(e.at(2)), formula_from_sexpr(e.at(3)));
  if (n == "ind-mu")
    return rule_ind_mu(term_from_sexpr(e.at(2)), formula_from_sexpr(e.at(3)), e.at(4).atom,
                       formula_from_sexpr(e.at(5)));
  if (n == "cl") return rule_cl(formula_from_sexpr(e.at(2)));
  if (n == "cut") return rule_cut(formula_from_sexpr(e.at(2)));
  if (n == "rep") return rule_rep();
  if (n == "oflat") return rule_omega_flat(formula_from_sexpr(e.at(2)));
  if (n == "cutoflat") return rule_cut_omega_flat(formula_from_sexpr(e.at(2)));
  if (n == "read") {
    Theory th = Theory::from_sexpr(e.at(2));
    Sequent theta;
    if (e.at(3).head() != "theta") throw KernelError("read rule needs (theta ...)");
    for (size_t i = 1; i < e.at(3).size(); i++) theta.insert(formula_from_sexpr(e.at(3).at(i)));
    if (e.at(4).head() != "tag") throw KernelError("read rule needs (tag f)");
    Formula tag = formula_from_sexpr(e.at(4).at(1));
    Position eps = position_from_sexpr(e.at(5));
    return rule_read(th, std::move(theta), std::move(tag), std::move(eps));
  }
  throw KernelError("unknown rule name: " + n);
}

std::string print_rule(const Rule& r) { return print_sexpr(rule_to_sexpr(r)); }
std::string print_label(const BranchLabel& l) { return print_sexpr(label_to_sexpr(l)); }
std::string print_position(const Position& p) { return print_sexpr(position_to_sexpr(p)); }

std::string print_sequent(const Sequent& s) {
  std::string out = "{";
  bool first = true;
  for (auto& f : s) {
    if (!first) out += ", ";
    first = false;
    out += print_formula(f);
  }
  return out + "}";
}

}  // namespace mu
