#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mu/sexpr.hpp"

namespace mu {

using Name = std::string;

struct KernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Terms: variables, 0, successor.
// ---------------------------------------------------------------------------

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
  enum class Kind { Var, Zero, Succ } kind;
  Name var;   // Kind::Var
  Term sub;   // Kind::Succ
};

Term mk_var(Name x);
Term mk_zero();
Term mk_succ(Term t);
Term mk_num(uint64_t n);

bool term_eq(const Term& a, const Term& b);
std::optional<uint64_t> numeral_value(const Term& t);  // engaged iff closed
void term_free_vars(const Term& t, std::set<Name>& out);
Term term_subst(const Term& t, const std::map<Name, Term>& sub);

// ---------------------------------------------------------------------------
// Formulas. L_mu plus the bracketed formulas of L^1_mu / L^2_mu.
// ---------------------------------------------------------------------------

enum class FKind { PrAtom, SetAtom, MuAtom, Neg, And, Or, Forall, Exists, Bracket };

struct FNode;

// Value wrapper; all formulas are immutable shared trees. Equality is
// syntactic up to alpha-renaming of bound variables.
class Formula {
 public:
  Formula() = default;
  explicit Formula(std::shared_ptr<const FNode> p) : p_(std::move(p)) {}

  bool empty() const { return !p_; }
  const FNode& node() const;
  FKind kind() const;
  uint64_t hash() const;  // alpha-invariant, cached

  bool operator==(const Formula& o) const;
  bool operator!=(const Formula& o) const { return !(*this == o); }

  const std::shared_ptr<const FNode>& ptr() const { return p_; }

 private:
  std::shared_ptr<const FNode> p_;
};

struct RuleV;
using Rule = std::shared_ptr<const RuleV>;

// Premise branch labels. A premise index globally determines its rule, so a
// position step carries the rule value alongside the label.
struct LabelTop {};
struct LabelBot {};
struct LabelL {};
struct LabelR {};
using BranchLabel = std::variant<LabelTop, LabelBot, LabelL, LabelR, uint64_t, Rule, Formula>;

bool label_eq(const BranchLabel& a, const BranchLabel& b);
uint64_t label_hash(const BranchLabel& l);

struct PosStep {
  Rule rule;          // the rule whose premise family the label selects
  BranchLabel label;
};

struct Position {
  std::vector<PosStep> steps;

  bool empty() const { return steps.empty(); }
  size_t size() const { return steps.size(); }
  Position extended(Rule r, BranchLabel l) const {
    Position p = *this;
    p.steps.push_back(PosStep{std::move(r), std::move(l)});
    return p;
  }
  bool is_prefix_of(const Position& o) const;  // proper or equal
};

bool position_eq(const Position& a, const Position& b);
uint64_t position_hash(const Position& p);

// Finite set of formulas with alpha-aware membership.
class Sequent {
 public:
  Sequent() = default;
  Sequent(std::initializer_list<Formula> fs);

  bool contains(const Formula& f) const;
  void insert(const Formula& f);
  void erase(const Formula& f);
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  Sequent set_union(const Sequent& o) const;
  Sequent set_minus(const Sequent& o) const;
  Sequent set_minus(const Formula& f) const;
  bool subset_of(const Sequent& o) const;
  bool intersects(const Sequent& o) const;

  const std::vector<Formula>& items() const { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  uint64_t hash() const;
  bool operator==(const Sequent& o) const;

 private:
  std::vector<Formula> items_;  // kept sorted by (hash, canonical print)
};

struct FNode {
  FKind kind;

  // PrAtom
  std::string rel;
  std::vector<Term> args;
  // SetAtom: var2 applied to args[0]
  Name var2;
  // MuAtom: args[0] in mu x X . body
  Name mu_x, mu_X;
  Formula body;       // MuAtom body; Neg: the negated atom; Forall/Exists body
  // And / Or
  Formula left, right;
  // Forall / Exists
  Name qvar;
  // Bracket: [theta]^{tag, eps}
  std::vector<Formula> theta;
  Formula tag;
  Position eps;

  mutable uint64_t hash_cache = 0;  // 0 = unset; formulas are shared immutably
};

// Constructors (checked).
Formula mk_pr_atom(std::string rel, std::vector<Term> args);
Formula mk_set_atom(Name X, Term t);
Formula mk_mu_atom(Term t, Name x, Name X, Formula body);  // checks X not negative in body
Formula mk_neg(Formula atom);                              // atom must be atomic
Formula mk_and(Formula l, Formula r);
Formula mk_or(Formula l, Formula r);
Formula mk_forall(Name x, Formula body);
Formula mk_exists(Name x, Formula body);
Formula mk_bracket(std::vector<Formula> theta, Formula tag, Position eps);

bool is_atomic(const Formula& f);   // PrAtom / SetAtom / MuAtom
bool is_literal(const Formula& f);  // atomic or negated atomic
bool is_mu_literal(const Formula& f);
bool bracket_free(const Formula& f);
int bracket_level(const Formula& f);  // 0 = L_mu, 1 = L^1, 2 = L^2

// Second-order polarity sets pos()/neg().
std::set<Name> pos_vars(const Formula& f);
std::set<Name> neg_vars(const Formula& f);

// FV / FV2.
struct FreeVars {
  std::set<Name> first;
  std::set<Name> second;
};
FreeVars free_vars(const Formula& f);
bool is_closed(const Formula& f);
bool is_proper(const Formula& f);  // FV2 empty

Formula negate(const Formula& f);  // bracket-free only

// Simultaneous substitution phi[S |-> F].
struct Binding {
  std::map<Name, Term> first;                           // x |-> t
  std::map<Name, std::pair<Formula, Name>> second;      // X |-> (psi, y)

  bool empty() const { return first.empty() && second.empty(); }
};
bool is_substitutable(const Formula& f, const Binding& b);
Formula substitute(const Formula& f, const Binding& b);  // throws KernelError on capture
Formula subst_term(const Formula& f, const Name& x, const Term& t);
Formula subst_formula(const Formula& f, const Name& X, const Formula& psi, const Name& y);

uint64_t rank(const Formula& f);  // bracket-free only
uint64_t nest(const Formula& f, const std::set<Name>& S);

// Depth expressions: Omega-polynomials n_0 + Omega*n_1 + ... + Omega^k*n_k.
struct DepthExpr {
  std::vector<uint64_t> coeff;  // coeff[i] multiplies Omega^i; empty = 0

  static DepthExpr zero() { return {}; }
  static DepthExpr finite(uint64_t n);
  static DepthExpr omega_power(uint64_t k);  // Omega^k

  void normalize();  // strip trailing zero coefficients
  uint64_t degree() const { return coeff.empty() ? 0 : coeff.size() - 1; }
  bool is_zero() const { return coeff.empty(); }
  bool is_finite() const { return coeff.size() <= 1; }
  uint64_t finite_value() const { return coeff.empty() ? 0 : coeff[0]; }

  std::string str() const;
};
int depth_compare(const DepthExpr& a, const DepthExpr& b);  // -1 / 0 / 1
DepthExpr depth_add(const DepthExpr& a, const DepthExpr& b);
DepthExpr depth_max(const DepthExpr& a, const DepthExpr& b);

DepthExpr depth(const Formula& f);  // bracket-free only

// Parameterized form: skeleton plus fresh-variable bindings for the closed
// mu-subexpressions, numbered left to right.
struct ParameterizedForm {
  Formula skeleton;
  // Z_i |-> (y in mu z Z . psi'_i, y); insertion order = scan order
  std::vector<std::pair<Name, std::pair<Formula, Name>>> params;
};
ParameterizedForm parameterized_form(const Formula& f);

// Occurrence polarity of a mu-expression in a formula or sequent.
struct MuExpr {
  Name x, X;
  Formula body;

  Formula as_atom(const Term& t) const { return mk_mu_atom(t, x, X, body); }
};
MuExpr mu_expr_of(const Formula& mu_atom);  // from a MuAtom (or Neg of one)
bool mu_expr_eq(const MuExpr& a, const MuExpr& b);
uint64_t mu_expr_hash(const MuExpr& m);

struct Polarity {
  bool positive = false;
  bool negative = false;
};
Polarity occurs_polarity(const MuExpr& mu, const Formula& target);
Polarity occurs_polarity(const MuExpr& mu, const Sequent& target);

// Canonical textual syntax.
std::string print_term(const Term& t);
std::string print_formula(const Formula& f);
Sexpr term_to_sexpr(const Term& t);
Sexpr formula_to_sexpr(const Formula& f);
Term term_from_sexpr(const Sexpr& e);
Formula formula_from_sexpr(const Sexpr& e);
Term parse_term(const std::string& s);
Formula parse_formula(const std::string& s);

// Hash combiner shared across the library.
inline uint64_t hash_mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 12) + (h >> 4);
  return h * 0xff51afd7ed558ccdull ^ (h >> 33);
}
inline uint64_t hash_str(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return h;
}

}  // namespace mu
