#pragma once

#include <map>

#include "mu/tree.hpp"

namespace mu {

// Finite deductions of the finitary mu-theories, as parsed from proof
// certificates: (rule <name> <params> (premise <label> <subtree>) ...).
struct FinDedNode;
using FinDed = std::shared_ptr<const FinDedNode>;

struct FinDedNode {
  Rule rule;
  std::vector<std::pair<BranchLabel, FinDed>> premises;
};

FinDed fin_make(Rule rule, std::vector<std::pair<BranchLabel, FinDed>> premises);

FinDed finitary_from_sexpr(const Sexpr& e);
Sexpr finitary_to_sexpr(const FinDed& d);
FinDed parse_finitary(const std::string& s);
std::string print_finitary(const FinDed& d);

Sequent finitary_gamma(const FinDed& d);

struct FinCheck {
  bool ok = true;
  std::vector<std::string> errors;
  uint64_t max_cut_rank = 0;  // meaningful when cuts present
  bool has_cut = false;
  Sequent gamma;
  size_t nodes = 0;
};
FinCheck check_finitary(const FinDed& d, const Theory& th);

// Substitute a first-order variable by a closed term throughout a deduction.
FinDed finitary_subst(const FinDed& d, const Name& x, const Term& t);

// Free first-order variables of the stated conclusion.
std::set<Name> finitary_free_vars(const FinDed& d);

size_t finitary_size(const FinDed& d);

}  // namespace mu
