#pragma once

#include <functional>
#include <vector>

#include "mu/formula.hpp"

namespace mu::ord {

enum class TKind { Sum, OmegaPow, Theta, Cardinal, PosVar, MuVar };

struct TNode;
using OTerm = std::shared_ptr<const TNode>;

struct TNode {
  TKind kind;
  std::vector<OTerm> parts;  // Sum; canonical order, arity 0 or >= 2
  OTerm arg;                 // OmegaPow / Theta
  int level = 0;             // Theta / Cardinal / PosVar / MuVar
  Formula pos_tag;           // PosVar: the mu-atom n in mu x X . phi
  Position pos_eps;          // PosVar
  Formula mu_tag;            // MuVar: the mu-expression as a mu-atom over 0
  mutable uint64_t hash_cache = 0;
};

OTerm zero();
OTerm mk_sum(std::vector<OTerm> parts);       // flattens; singleton unwraps
OTerm mk_omega_pow(OTerm a);
OTerm mk_theta(int level, OTerm a);           // checks FV_level(a) empty
OTerm mk_cardinal(int level);
OTerm mk_pos_var(Formula tag, Position eps, int level);
OTerm mk_mu_var(const MuExpr& tag, int level);
OTerm nat(uint64_t n);
OTerm one();
OTerm omega();
OTerm add(OTerm a, OTerm b);                  // natural sum alpha # beta
OTerm times(const OTerm& a, uint64_t k);      // alpha . k

bool in_h(const OTerm& t);
bool in_sc(const OTerm& t);
bool eq_term(const OTerm& a, const OTerm& b);
uint64_t term_hash(const OTerm& t);

enum class Cmp { Less, Equal, Greater, Incomparable };
Cmp compare(const OTerm& a, const OTerm& b);
bool less(const OTerm& a, const OTerm& b);
bool leq(const OTerm& a, const OTerm& b);

// K-sets. The single-level system of the ID1 analysis is level 1.
std::vector<OTerm> k_set(int c, const OTerm& a);

// ll_id1: alpha <<_gamma beta per the ID1 definition (delta < max{theta(beta), gamma}).
bool ll_id1(const OTerm& gamma, const OTerm& alpha, const OTerm& beta);
// ll: the multi-level <<^c_gamma; c = 0 degenerates to plain <.
bool ll(int c, const OTerm& gamma, const OTerm& alpha, const OTerm& beta);
bool lleq(int c, const OTerm& gamma, const OTerm& alpha, const OTerm& beta);

// Variable substitution: callback sees every PosVar / MuVar node.
using VarSubst = std::function<std::optional<OTerm>(const TNode&)>;
OTerm substitute_vars(const OTerm& a, const VarSubst& f);
bool has_vars(const OTerm& a);
// Pos-vars of level >= c appearing anywhere in the term (FV_c nonempty).
bool has_pos_vars_at_least(const OTerm& a, int c);

// Omega_c |-> beta at occurrences not guarded by a theta of level <= c.
OTerm replace_cardinal(const OTerm& a, int level, const OTerm& beta);

// vartheta_{c,gamma}(alpha) = theta_c(w^{Omega_c # alpha} # gamma).
OTerm vartheta_collapse(int c, const OTerm& gamma, const OTerm& alpha);

// Iterated omega-power tower w_k^base.
OTerm omega_tower(const OTerm& base, int k);

struct WfReport {
  bool ok = true;
  std::string error;
};
WfReport check_wellformed(const OTerm& a, int c0);

Sexpr term_to_sexpr(const OTerm& t);
OTerm term_from_sexpr(const Sexpr& e, int c0);
std::string print_ord(const OTerm& t);
OTerm parse_ord(const std::string& s, int c0 = 2);

}  // namespace mu::ord
