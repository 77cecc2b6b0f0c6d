#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mu/formula.hpp"
#include "mu/theory.hpp"

namespace mu {

enum class RuleName {
  Def, Ax, True, AndI, OrIL, OrIR, AllI, Omega, ExI,
  IndArith, IndMu, Cl, Cut, Rep, OmegaFlat, CutOmegaFlat, Read
};

const char* rule_name_str(RuleName n);

enum class PremiseArity { None, Single, PairLR, PairTopBot, BotOnly, Naturals, ReadBranches };

struct RuleV {
  RuleName name;
  std::vector<Formula> formulas;  // principal formulas, meaning depends on name
  std::vector<Term> terms;        // witness terms
  Name var;                       // AllI eigenvariable / IndMu pivot variable

  // Read only
  Sequent theta;
  Formula read_tag;  // n in mu x X . phi
  Position eps;
  Theory read_theory;
  std::vector<Formula> formula_premises;  // the m in mu y Y . psi side branches

  Sequent conclusion;
  PremiseArity arity = PremiseArity::None;
  uint64_t fp = 0;
};

// Rule factories. Side conditions from the rule displays are checked.
Rule rule_def(Formula f);
Rule rule_ax(Formula eta);
Rule rule_true(Formula eta);  // caller checks truth via the registry when needed
Rule rule_and_i(Formula conj);
Rule rule_or_il(Formula disj);
Rule rule_or_ir(Formula disj);
Rule rule_all_i(Name y, Formula all);
Rule rule_omega(Formula all);
Rule rule_ex_i(Term t, Formula ex);
Rule rule_ind_arith(Term t, Formula all);
Rule rule_ind_mu(Term t, Formula mu_atom, Name y, Formula psi);
Rule rule_cl(Formula mu_atom);
Rule rule_cut(Formula f);
Rule rule_rep();
Rule rule_omega_flat(Formula mu_atom);
Rule rule_cut_omega_flat(Formula mu_atom);
Rule rule_read(Theory read_theory, Sequent theta, Formula tag, Position eps);

uint64_t rule_fingerprint(const Rule& r);
bool rule_eq(const Rule& a, const Rule& b);

// Premise machinery. Premise sequents may carry a bracket pattern standing
// for the superset-quantified bracket family of the Read rule.
struct BracketPattern {
  Sequent theta_min;
  Formula tag;
  Position eps;
  Rule branch_rule;  // when set, positions are eps extended by one branch of this rule

  bool matches(const Formula& f) const;
  bool subsumed_by(const BracketPattern& o) const;
};

struct WideSequent {
  Sequent explicit_part;
  std::vector<BracketPattern> patterns;

  WideSequent() = default;
  WideSequent(Sequent s) : explicit_part(std::move(s)) {}

  bool contains(const Formula& f) const;
  bool subset_of(const WideSequent& o) const;
  WideSequent set_union(const WideSequent& o) const;
  void insert(const Formula& f) { explicit_part.insert(f); }
  void add_pattern(BracketPattern p) { patterns.push_back(std::move(p)); }
  std::string str() const;
};

WideSequent rule_premise(const Rule& r, const BranchLabel& l);
bool label_in_universe(const Rule& r, const BranchLabel& l);
// Labels of finite premise families; throws for Naturals/ReadBranches.
std::vector<BranchLabel> finite_labels(const Rule& r);

Sequent delta_of_position(const Position& eps);  // explicit part of the topmost premise

// Serialization.
Sexpr rule_to_sexpr(const Rule& r);
Rule rule_from_sexpr(const Sexpr& e);
Sexpr label_to_sexpr(const BranchLabel& l);
BranchLabel label_from_sexpr(const Sexpr& e);
Sexpr position_to_sexpr(const Position& p);
Position position_from_sexpr(const Sexpr& e);
std::string print_rule(const Rule& r);
std::string print_label(const BranchLabel& l);
std::string print_position(const Position& p);
std::string print_sequent(const Sequent& s);

}  // namespace mu
