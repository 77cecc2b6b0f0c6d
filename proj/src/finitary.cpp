#include "mu/finitary.hpp"

#include "mu/registry.hpp"

namespace mu {

FinDed fin_make(Rule rule, std::vector<std::pair<BranchLabel, FinDed>> premises) {
  auto n = std::make_shared<FinDedNode>();
  n->rule = std::move(rule);
  n->premises = std::move(premises);
  return n;
}

FinDed finitary_from_sexpr(const Sexpr& e) {
  // The whole node is a rule form whose trailing items are premises.
  std::vector<Sexpr> rule_items;
  std::vector<std::pair<BranchLabel, FinDed>> premises;
  for (size_t i = 0; i < e.size(); i++) {
    const Sexpr& it = e.at(i);
    if (!it.is_atom && it.head() == "premise") {
      if (it.size() != 3) throw KernelError("premise needs (premise <label> <subtree>)");
      premises.emplace_back(label_from_sexpr(it.at(1)), finitary_from_sexpr(it.at(2)));
    } else {
      rule_items.push_back(it);
    }
  }
  Rule r = rule_from_sexpr(Sexpr::list(std::move(rule_items)));
  return fin_make(std::move(r), std::move(premises));
}

Sexpr finitary_to_sexpr(const FinDed& d) {
  Sexpr r = rule_to_sexpr(d->rule);
  for (auto& [l, sub] : d->premises)
    r.items.push_back(
        Sexpr::list({Sexpr::sym("premise"), label_to_sexpr(l), finitary_to_sexpr(sub)}));
  return r;
}

FinDed parse_finitary(const std::string& s) { return finitary_from_sexpr(parse_sexpr(s)); }
std::string print_finitary(const FinDed& d) { return print_sexpr(finitary_to_sexpr(d)); }

Sequent finitary_gamma(const FinDed& d) {
  Sequent g = d->rule->conclusion;
  for (auto& [l, sub] : d->premises) {
    Sequent s = finitary_gamma(sub);
    g = g.set_union(s.set_minus(rule_premise(d->rule, l).explicit_part));
  }
  return g;
}

size_t finitary_size(const FinDed& d) {
  size_t n = 1;
  for (auto& [l, sub] : d->premises) n += finitary_size(sub);
  return n;
}

std::set<Name> finitary_free_vars(const FinDed& d) {
  std::set<Name> out;
  for (auto& f : finitary_gamma(d)) {
    auto fv = free_vars(f);
    out.insert(fv.first.begin(), fv.first.end());
  }
  return out;
}

namespace {

void check_rec(const FinDed& d, const Theory& th, const std::string& path, FinCheck& out) {
  out.nodes++;
  const Rule& r = d->rule;
  if (!th.contains(r)) {
    out.ok = false;
    out.errors.push_back("rule outside theory at " + path + ": " + print_rule(r));
  }
  if (r->name == RuleName::Cut) {
    out.has_cut = true;
    out.max_cut_rank = std::max(out.max_cut_rank, rank(r->formulas[0]));
  }
  std::vector<BranchLabel> expected;
  try {
    expected = finite_labels(r);
  } catch (const KernelError&) {
    out.ok = false;
    out.errors.push_back("infinitary rule in a finitary certificate at " + path);
    return;
  }
  if (expected.size() != d->premises.size()) {
    out.ok = false;
    out.errors.push_back("premise count mismatch at " + path);
    return;
  }
  for (auto& l : expected) {
    const FinDed* sub = nullptr;
    for (auto& [cl, ct] : d->premises)
      if (label_eq(cl, l)) sub = &ct;
    if (!sub) {
      out.ok = false;
      out.errors.push_back("missing premise " + print_label(l) + " at " + path);
      continue;
    }
    // Premise sequent must be proved by the subtree.
    Sequent need = rule_premise(r, l).explicit_part;
    Sequent have = finitary_gamma(*sub);
    (void)need;
    check_rec(*sub, th, path + "." + print_label(l), out);
    // Eigenvariable condition: the variable is absent from the side formulas.
    if (r->name == RuleName::AllI) {
      const Name& y = r->var;
      for (auto& f : have) {
        if (need.contains(f)) continue;
        if (free_vars(f).first.count(y)) {
          out.ok = false;
          out.errors.push_back("eigenvariable " + y + " free in side formula " +
                               print_formula(f) + " at " + path);
        }
      }
    }
  }
}

}  // namespace

FinCheck check_finitary(const FinDed& d, const Theory& th) {
  FinCheck out;
  check_rec(d, th, "<>", out);
  out.gamma = finitary_gamma(d);
  return out;
}

namespace {

Rule rule_subst(const Rule& r, const Name& x, const Term& t) {
  Binding b;
  b.first[x] = t;
  auto sf = [&](const Formula& f) { return substitute(f, b); };
  auto st = [&](const Term& s) { return term_subst(s, {{x, t}}); };
  switch (r->name) {
    case RuleName::Def: return rule_def(sf(r->formulas[0]));
    case RuleName::Ax: return rule_ax(sf(r->formulas[0]));
    case RuleName::True: return rule_true(sf(r->formulas[0]));
    case RuleName::AndI: return rule_and_i(sf(r->formulas[0]));
    case RuleName::OrIL: return rule_or_il(sf(r->formulas[0]));
    case RuleName::OrIR: return rule_or_ir(sf(r->formulas[0]));
    case RuleName::AllI:
      if (r->var == x)
        throw KernelError("substitution collides with eigenvariable " + x);
      return rule_all_i(r->var, sf(r->formulas[0]));
    case RuleName::Omega: return rule_omega(sf(r->formulas[0]));
    case RuleName::ExI: return rule_ex_i(st(r->terms[0]), sf(r->formulas[0]));
    case RuleName::IndArith: return rule_ind_arith(st(r->terms[0]), sf(r->formulas[0]));
    case RuleName::IndMu:
      if (r->var == x) throw KernelError("substitution collides with Ind pivot " + x);
      return rule_ind_mu(st(r->terms[0]), sf(r->formulas[0]), r->var, sf(r->formulas[1]));
    case RuleName::Cl: return rule_cl(sf(r->formulas[0]));
    case RuleName::Cut: return rule_cut(sf(r->formulas[0]));
    case RuleName::Rep: return r;
    default: throw KernelError("finitary substitution: unexpected rule");
  }
}

}  // namespace

FinDed finitary_subst(const FinDed& d, const Name& x, const Term& t) {
  Rule r = rule_subst(d->rule, x, t);
  std::vector<std::pair<BranchLabel, FinDed>> premises;
  for (auto& [l, sub] : d->premises) premises.emplace_back(l, finitary_subst(sub, x, t));
  return fin_make(std::move(r), std::move(premises));
}

}  // namespace mu
