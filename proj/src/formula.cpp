#include "mu/formula.hpp"

#include <algorithm>
#include <cctype>

#include "mu/rule.hpp"

namespace mu {

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

Term mk_var(Name x) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermNode::Kind::Var;
  n->var = std::move(x);
  return n;
}

Term mk_zero() {
  static const Term zero = [] {
    auto n = std::make_shared<TermNode>();
    n->kind = TermNode::Kind::Zero;
    return Term(n);
  }();
  return zero;
}

Term mk_succ(Term t) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermNode::Kind::Succ;
  n->sub = std::move(t);
  return n;
}

Term mk_num(uint64_t k) {
  Term t = mk_zero();
  for (uint64_t i = 0; i < k; i++) t = mk_succ(t);
  return t;
}

bool term_eq(const Term& a, const Term& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermNode::Kind::Var: return a->var == b->var;
    case TermNode::Kind::Zero: return true;
    case TermNode::Kind::Succ: return term_eq(a->sub, b->sub);
  }
  return false;
}

std::optional<uint64_t> numeral_value(const Term& t) {
  uint64_t n = 0;
  const TermNode* cur = t.get();
  while (cur->kind == TermNode::Kind::Succ) {
    n++;
    cur = cur->sub.get();
  }
  if (cur->kind == TermNode::Kind::Zero) return n;
  return std::nullopt;
}

void term_free_vars(const Term& t, std::set<Name>& out) {
  switch (t->kind) {
    case TermNode::Kind::Var: out.insert(t->var); break;
    case TermNode::Kind::Zero: break;
    case TermNode::Kind::Succ: term_free_vars(t->sub, out); break;
  }
}

Term term_subst(const Term& t, const std::map<Name, Term>& sub) {
  switch (t->kind) {
    case TermNode::Kind::Var: {
      auto it = sub.find(t->var);
      return it == sub.end() ? t : it->second;
    }
    case TermNode::Kind::Zero: return t;
    case TermNode::Kind::Succ: return mk_succ(term_subst(t->sub, sub));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Alpha-aware comparison and hashing
// ---------------------------------------------------------------------------

namespace {

struct AlphaEnv {
  std::map<Name, int> first, second;
  int counter = 0;
};

bool term_alpha_eq(const Term& a, const Term& b, const AlphaEnv& ea, const AlphaEnv& eb) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermNode::Kind::Var: {
      auto ia = ea.first.find(a->var);
      auto ib = eb.first.find(b->var);
      if (ia != ea.first.end() || ib != eb.first.end()) {
        return ia != ea.first.end() && ib != eb.first.end() && ia->second == ib->second;
      }
      return a->var == b->var;
    }
    case TermNode::Kind::Zero: return true;
    case TermNode::Kind::Succ: return term_alpha_eq(a->sub, b->sub, ea, eb);
  }
  return false;
}

bool alpha_eq_rec(const Formula& fa, const Formula& fb, AlphaEnv ea, AlphaEnv eb);

bool alpha_eq_children(const FNode& a, const FNode& b, const AlphaEnv& ea, const AlphaEnv& eb) {
  switch (a.kind) {
    case FKind::PrAtom: {
      if (a.rel != b.rel || a.args.size() != b.args.size()) return false;
      for (size_t i = 0; i < a.args.size(); i++)
        if (!term_alpha_eq(a.args[i], b.args[i], ea, eb)) return false;
      return true;
    }
    case FKind::SetAtom: {
      auto ia = ea.second.find(a.var2);
      auto ib = eb.second.find(b.var2);
      bool vars_ok;
      if (ia != ea.second.end() || ib != eb.second.end())
        vars_ok = ia != ea.second.end() && ib != eb.second.end() && ia->second == ib->second;
      else
        vars_ok = a.var2 == b.var2;
      return vars_ok && term_alpha_eq(a.args[0], b.args[0], ea, eb);
    }
    case FKind::MuAtom: {
      if (!term_alpha_eq(a.args[0], b.args[0], ea, eb)) return false;
      AlphaEnv ea2 = ea, eb2 = eb;
      int idx = std::max(ea.counter, eb.counter);
      ea2.first[a.mu_x] = idx;
      eb2.first[b.mu_x] = idx;
      ea2.second[a.mu_X] = idx + 1;
      eb2.second[b.mu_X] = idx + 1;
      ea2.counter = eb2.counter = idx + 2;
      return alpha_eq_rec(a.body, b.body, std::move(ea2), std::move(eb2));
    }
    case FKind::Neg:
      return alpha_eq_rec(a.body, b.body, ea, eb);
    case FKind::And:
    case FKind::Or:
      return alpha_eq_rec(a.left, b.left, ea, eb) && alpha_eq_rec(a.right, b.right, ea, eb);
    case FKind::Forall:
    case FKind::Exists: {
      AlphaEnv ea2 = ea, eb2 = eb;
      int idx = std::max(ea.counter, eb.counter);
      ea2.first[a.qvar] = idx;
      eb2.first[b.qvar] = idx;
      ea2.counter = eb2.counter = idx + 1;
      return alpha_eq_rec(a.body, b.body, std::move(ea2), std::move(eb2));
    }
    case FKind::Bracket: {
      // Bracket contents are standalone scopes.
      if (a.theta.size() != b.theta.size()) return false;
      for (size_t i = 0; i < a.theta.size(); i++)
        if (a.theta[i] != b.theta[i]) return false;
      return a.tag == b.tag && position_eq(a.eps, b.eps);
    }
  }
  return false;
}

bool alpha_eq_rec(const Formula& fa, const Formula& fb, AlphaEnv ea, AlphaEnv eb) {
  if (fa.ptr().get() == fb.ptr().get() && ea.first.empty() && ea.second.empty() &&
      eb.first.empty() && eb.second.empty())
    return true;
  const FNode& a = fa.node();
  const FNode& b = fb.node();
  if (a.kind != b.kind) return false;
  return alpha_eq_children(a, b, ea, eb);
}

uint64_t term_alpha_hash(const Term& t, const AlphaEnv& env) {
  switch (t->kind) {
    case TermNode::Kind::Var: {
      auto it = env.first.find(t->var);
      if (it != env.first.end()) return hash_mix(3, static_cast<uint64_t>(it->second));
      return hash_mix(4, hash_str(t->var));
    }
    case TermNode::Kind::Zero: return 5;
    case TermNode::Kind::Succ: return hash_mix(6, term_alpha_hash(t->sub, env));
  }
  return 0;
}

uint64_t alpha_hash_rec(const Formula& f, const AlphaEnv& env);

uint64_t alpha_hash_node(const FNode& n, const AlphaEnv& env) {
  uint64_t h = hash_mix(11, static_cast<uint64_t>(n.kind));
  switch (n.kind) {
    case FKind::PrAtom:
      h = hash_mix(h, hash_str(n.rel));
      for (auto& t : n.args) h = hash_mix(h, term_alpha_hash(t, env));
      return h;
    case FKind::SetAtom: {
      auto it = env.second.find(n.var2);
      h = hash_mix(h, it != env.second.end() ? hash_mix(7, static_cast<uint64_t>(it->second))
                                             : hash_mix(8, hash_str(n.var2)));
      return hash_mix(h, term_alpha_hash(n.args[0], env));
    }
    case FKind::MuAtom: {
      h = hash_mix(h, term_alpha_hash(n.args[0], env));
      AlphaEnv e2 = env;
      e2.first[n.mu_x] = e2.counter;
      e2.second[n.mu_X] = e2.counter + 1;
      e2.counter += 2;
      return hash_mix(h, alpha_hash_rec(n.body, e2));
    }
    case FKind::Neg:
      return hash_mix(h, alpha_hash_rec(n.body, env));
    case FKind::And:
    case FKind::Or:
      h = hash_mix(h, alpha_hash_rec(n.left, env));
      return hash_mix(h, alpha_hash_rec(n.right, env));
    case FKind::Forall:
    case FKind::Exists: {
      AlphaEnv e2 = env;
      e2.first[n.qvar] = e2.counter++;
      return hash_mix(h, alpha_hash_rec(n.body, e2));
    }
    case FKind::Bracket: {
      for (auto& f : n.theta) h = hash_mix(h, f.hash());
      h = hash_mix(h, n.tag.hash());
      return hash_mix(h, position_hash(n.eps));
    }
  }
  return h;
}

uint64_t alpha_hash_rec(const Formula& f, const AlphaEnv& env) {
  const FNode& n = f.node();
  bool root_scope = env.first.empty() && env.second.empty();
  if (root_scope && n.hash_cache != 0) return n.hash_cache;
  uint64_t h = alpha_hash_node(n, env);
  if (h == 0) h = 1;
  if (root_scope) n.hash_cache = h;
  return h;
}

}  // namespace

const FNode& Formula::node() const {
  if (!p_) throw KernelError("empty formula");
  return *p_;
}
FKind Formula::kind() const { return node().kind; }
uint64_t Formula::hash() const { return alpha_hash_rec(*this, AlphaEnv{}); }
bool Formula::operator==(const Formula& o) const {
  if (p_.get() == o.p_.get()) return true;
  if (!p_ || !o.p_) return false;
  if (hash() != o.hash()) return false;
  return alpha_eq_rec(*this, o, AlphaEnv{}, AlphaEnv{});
}

// ---------------------------------------------------------------------------
// Labels and positions
// ---------------------------------------------------------------------------

bool label_eq(const BranchLabel& a, const BranchLabel& b) {
  if (a.index() != b.index()) return false;
  switch (a.index()) {
    case 0: case 1: case 2: case 3: return true;
    case 4: return std::get<uint64_t>(a) == std::get<uint64_t>(b);
    case 5: return rule_eq(std::get<Rule>(a), std::get<Rule>(b));
    case 6: return std::get<Formula>(a) == std::get<Formula>(b);
  }
  return false;
}

uint64_t label_hash(const BranchLabel& l) {
  uint64_t h = hash_mix(21, l.index());
  switch (l.index()) {
    case 4: return hash_mix(h, std::get<uint64_t>(l));
    case 5: return hash_mix(h, rule_fingerprint(std::get<Rule>(l)));
    case 6: return hash_mix(h, std::get<Formula>(l).hash());
    default: return h;
  }
}

bool Position::is_prefix_of(const Position& o) const {
  if (steps.size() > o.steps.size()) return false;
  for (size_t i = 0; i < steps.size(); i++) {
    if (rule_fingerprint(steps[i].rule) != rule_fingerprint(o.steps[i].rule) ||
        !label_eq(steps[i].label, o.steps[i].label))
      return false;
  }
  return true;
}

bool position_eq(const Position& a, const Position& b) {
  return a.steps.size() == b.steps.size() && a.is_prefix_of(b);
}

uint64_t position_hash(const Position& p) {
  uint64_t h = 31;
  for (auto& s : p.steps) {
    h = hash_mix(h, rule_fingerprint(s.rule));
    h = hash_mix(h, label_hash(s.label));
  }
  return h;
}

// ---------------------------------------------------------------------------
// Sequents
// ---------------------------------------------------------------------------

namespace {
bool formula_before(const Formula& a, const Formula& b) {
  uint64_t ha = a.hash(), hb = b.hash();
  if (ha != hb) return ha < hb;
  if (a == b) return false;
  return print_formula(a) < print_formula(b);
}
}  // namespace

Sequent::Sequent(std::initializer_list<Formula> fs) {
  for (auto& f : fs) insert(f);
}

bool Sequent::contains(const Formula& f) const {
  for (auto& g : items_)
    if (g == f) return true;
  return false;
}

void Sequent::insert(const Formula& f) {
  if (contains(f)) return;
  auto it = std::lower_bound(items_.begin(), items_.end(), f, formula_before);
  items_.insert(it, f);
}

void Sequent::erase(const Formula& f) {
  for (auto it = items_.begin(); it != items_.end(); ++it) {
    if (*it == f) {
      items_.erase(it);
      return;
    }
  }
}

Sequent Sequent::set_union(const Sequent& o) const {
  Sequent r = *this;
  for (auto& f : o.items_) r.insert(f);
  return r;
}

Sequent Sequent::set_minus(const Sequent& o) const {
  Sequent r;
  for (auto& f : items_)
    if (!o.contains(f)) r.insert(f);
  return r;
}

Sequent Sequent::set_minus(const Formula& f) const {
  Sequent r;
  for (auto& g : items_)
    if (!(g == f)) r.insert(g);
  return r;
}

bool Sequent::subset_of(const Sequent& o) const {
  for (auto& f : items_)
    if (!o.contains(f)) return false;
  return true;
}

bool Sequent::intersects(const Sequent& o) const {
  for (auto& f : items_)
    if (o.contains(f)) return true;
  return false;
}

uint64_t Sequent::hash() const {
  uint64_t h = 41;
  for (auto& f : items_) h = hash_mix(h, f.hash());
  return h;
}

bool Sequent::operator==(const Sequent& o) const {
  return items_.size() == o.items_.size() && subset_of(o);
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

namespace {
Formula make(FNode n) { return Formula(std::make_shared<const FNode>(std::move(n))); }
}  // namespace

Formula mk_pr_atom(std::string rel, std::vector<Term> args) {
  FNode n;
  n.kind = FKind::PrAtom;
  n.rel = std::move(rel);
  n.args = std::move(args);
  return make(std::move(n));
}

Formula mk_set_atom(Name X, Term t) {
  FNode n;
  n.kind = FKind::SetAtom;
  n.var2 = std::move(X);
  n.args = {std::move(t)};
  return make(std::move(n));
}

Formula mk_mu_atom(Term t, Name x, Name X, Formula body) {
  if (!bracket_free(body)) throw KernelError("mu body must be bracket-free");
  if (neg_vars(body).count(X))
    throw KernelError("mu x X . phi: X appears negatively in phi");
  FNode n;
  n.kind = FKind::MuAtom;
  n.args = {std::move(t)};
  n.mu_x = std::move(x);
  n.mu_X = std::move(X);
  n.body = std::move(body);
  return make(std::move(n));
}

Formula mk_neg(Formula atom) {
  if (!is_atomic(atom)) throw KernelError("negated-atom constructor needs an atomic formula");
  FNode n;
  n.kind = FKind::Neg;
  n.body = std::move(atom);
  return make(std::move(n));
}

Formula mk_and(Formula l, Formula r) {
  FNode n;
  n.kind = FKind::And;
  n.left = std::move(l);
  n.right = std::move(r);
  return make(std::move(n));
}

Formula mk_or(Formula l, Formula r) {
  FNode n;
  n.kind = FKind::Or;
  n.left = std::move(l);
  n.right = std::move(r);
  return make(std::move(n));
}

Formula mk_forall(Name x, Formula body) {
  FNode n;
  n.kind = FKind::Forall;
  n.qvar = std::move(x);
  n.body = std::move(body);
  return make(std::move(n));
}

Formula mk_exists(Name x, Formula body) {
  FNode n;
  n.kind = FKind::Exists;
  n.qvar = std::move(x);
  n.body = std::move(body);
  return make(std::move(n));
}

Formula mk_bracket(std::vector<Formula> theta, Formula tag, Position eps) {
  if (tag.kind() != FKind::MuAtom) throw KernelError("bracket tag must be a mu-atom");
  int max_level = 0;
  for (auto& f : theta) max_level = std::max(max_level, bracket_level(f));
  if (max_level >= 2) throw KernelError("bracket nesting depth would exceed 2");
  std::sort(theta.begin(), theta.end(), formula_before);
  theta.erase(std::unique(theta.begin(), theta.end(),
                          [](const Formula& a, const Formula& b) { return a == b; }),
              theta.end());
  bool tag_found = false;
  for (auto& f : theta) tag_found = tag_found || f == tag;
  if (!tag_found) throw KernelError("bracket tag formula must be an element of its sequent");
  FNode n;
  n.kind = FKind::Bracket;
  n.theta = std::move(theta);
  n.tag = std::move(tag);
  n.eps = std::move(eps);
  return make(std::move(n));
}

bool is_atomic(const Formula& f) {
  switch (f.kind()) {
    case FKind::PrAtom:
    case FKind::SetAtom:
    case FKind::MuAtom: return true;
    default: return false;
  }
}

bool is_literal(const Formula& f) {
  return is_atomic(f) || (f.kind() == FKind::Neg && is_atomic(f.node().body));
}

bool is_mu_literal(const Formula& f) {
  if (f.kind() == FKind::MuAtom) return true;
  return f.kind() == FKind::Neg && f.node().body.kind() == FKind::MuAtom;
}

bool bracket_free(const Formula& f) { return bracket_level(f) == 0; }

int bracket_level(const Formula& f) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::SetAtom: return 0;
    case FKind::MuAtom: return 0;  // mu bodies are bracket-free by construction
    case FKind::Neg: return bracket_level(n.body);
    case FKind::And:
    case FKind::Or: return std::max(bracket_level(n.left), bracket_level(n.right));
    case FKind::Forall:
    case FKind::Exists: return bracket_level(n.body);
    case FKind::Bracket: {
      int m = 0;
      for (auto& g : n.theta) m = std::max(m, bracket_level(g));
      return m + 1;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Polarity, free variables, negation
// ---------------------------------------------------------------------------

namespace {
void polarity_rec(const Formula& f, bool positive, std::set<Name>& pos, std::set<Name>& neg) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom: return;
    case FKind::SetAtom:
      (positive ? pos : neg).insert(n.var2);
      return;
    case FKind::MuAtom: {
      std::set<Name> p2, n2;
      polarity_rec(n.body, positive, p2, n2);
      (positive ? p2 : n2).erase(n.mu_X);
      pos.insert(p2.begin(), p2.end());
      neg.insert(n2.begin(), n2.end());
      return;
    }
    case FKind::Neg:
      polarity_rec(n.body, !positive, pos, neg);
      return;
    case FKind::And:
    case FKind::Or:
      polarity_rec(n.left, positive, pos, neg);
      polarity_rec(n.right, positive, pos, neg);
      return;
    case FKind::Forall:
    case FKind::Exists:
      polarity_rec(n.body, positive, pos, neg);
      return;
    case FKind::Bracket:
      throw KernelError("pos/neg undefined for bracketed formulas");
  }
}
}  // namespace

std::set<Name> pos_vars(const Formula& f) {
  std::set<Name> p, n;
  polarity_rec(f, true, p, n);
  return p;
}

std::set<Name> neg_vars(const Formula& f) {
  std::set<Name> p, n;
  polarity_rec(f, true, p, n);
  return n;
}

namespace {
void fv_rec(const Formula& f, FreeVars& out) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
      for (auto& t : n.args) term_free_vars(t, out.first);
      return;
    case FKind::SetAtom:
      out.second.insert(n.var2);
      term_free_vars(n.args[0], out.first);
      return;
    case FKind::MuAtom: {
      term_free_vars(n.args[0], out.first);
      FreeVars inner;
      fv_rec(n.body, inner);
      inner.first.erase(n.mu_x);
      inner.second.erase(n.mu_X);
      out.first.insert(inner.first.begin(), inner.first.end());
      out.second.insert(inner.second.begin(), inner.second.end());
      return;
    }
    case FKind::Neg:
      fv_rec(n.body, out);
      return;
    case FKind::And:
    case FKind::Or:
      fv_rec(n.left, out);
      fv_rec(n.right, out);
      return;
    case FKind::Forall:
    case FKind::Exists: {
      FreeVars inner;
      fv_rec(n.body, inner);
      inner.first.erase(n.qvar);
      out.first.insert(inner.first.begin(), inner.first.end());
      out.second.insert(inner.second.begin(), inner.second.end());
      return;
    }
    case FKind::Bracket:
      for (auto& g : n.theta) fv_rec(g, out);
      return;
  }
}
}  // namespace

FreeVars free_vars(const Formula& f) {
  FreeVars out;
  fv_rec(f, out);
  return out;
}

bool is_closed(const Formula& f) {
  FreeVars v = free_vars(f);
  return v.first.empty() && v.second.empty();
}

bool is_proper(const Formula& f) { return free_vars(f).second.empty(); }

Formula negate(const Formula& f) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::SetAtom:
    case FKind::MuAtom: return mk_neg(f);
    case FKind::Neg: return n.body;
    case FKind::And: return mk_or(negate(n.left), negate(n.right));
    case FKind::Or: return mk_and(negate(n.left), negate(n.right));
    case FKind::Forall: return mk_exists(n.qvar, negate(n.body));
    case FKind::Exists: return mk_forall(n.qvar, negate(n.body));
    case FKind::Bracket: throw KernelError("negation undefined for bracketed formulas");
  }
  throw KernelError("unreachable");
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace {

// t substitutable for y in psi: no free occurrence of y sits under a binder
// capturing a variable of t.
bool term_substitutable(const Formula& psi, const Name& y, const std::set<Name>& tvars) {
  const FNode& n = psi.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::SetAtom: return true;
    case FKind::MuAtom: {
      if (n.mu_x == y) return true;
      if (!free_vars(n.body).first.count(y)) return true;
      return !tvars.count(n.mu_x) && term_substitutable(n.body, y, tvars);
    }
    case FKind::Neg: return term_substitutable(n.body, y, tvars);
    case FKind::And:
    case FKind::Or:
      return term_substitutable(n.left, y, tvars) && term_substitutable(n.right, y, tvars);
    case FKind::Forall:
    case FKind::Exists: {
      if (n.qvar == y) return true;
      if (!free_vars(n.body).first.count(y)) return true;
      return !tvars.count(n.qvar) && term_substitutable(n.body, y, tvars);
    }
    case FKind::Bracket: return true;
  }
  return true;
}

Binding binding_without(const Binding& b, const Name& x, const Name& X) {
  Binding r = b;
  if (!x.empty()) r.first.erase(x);
  if (!X.empty()) r.second.erase(X);
  return r;
}

}  // namespace

bool is_substitutable(const Formula& f, const Binding& b) {
  if (b.empty()) return true;
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom: return true;
    case FKind::SetAtom: {
      auto it = b.second.find(n.var2);
      if (it == b.second.end()) return true;
      const auto& [psi, y] = it->second;
      Term t = term_subst(n.args[0], b.first);
      std::set<Name> tvars;
      term_free_vars(t, tvars);
      return term_substitutable(psi, y, tvars);
    }
    case FKind::MuAtom: {
      Binding inner = binding_without(b, n.mu_x, n.mu_X);
      if (!is_substitutable(n.body, inner)) return false;
      FreeVars fv = free_vars(n.body);
      for (auto& [y, t] : b.first) {
        if (y == n.mu_x || !fv.first.count(y)) continue;
        std::set<Name> tv;
        term_free_vars(t, tv);
        if (tv.count(n.mu_x)) return false;
      }
      for (auto& [Y, pf] : b.second) {
        if (Y == n.mu_X || !fv.second.count(Y)) continue;
        FreeVars pv = free_vars(pf.first);
        if (pv.first.count(n.mu_x)) return false;
        if (pv.second.count(n.mu_X)) return false;
      }
      return true;
    }
    case FKind::Neg: return is_substitutable(n.body, b);
    case FKind::And:
    case FKind::Or: return is_substitutable(n.left, b) && is_substitutable(n.right, b);
    case FKind::Forall:
    case FKind::Exists: {
      Binding inner = binding_without(b, n.qvar, "");
      if (!is_substitutable(n.body, inner)) return false;
      FreeVars fv = free_vars(n.body);
      for (auto& [y, t] : b.first) {
        if (y == n.qvar || !fv.first.count(y)) continue;
        std::set<Name> tv;
        term_free_vars(t, tv);
        if (tv.count(n.qvar)) return false;
      }
      return true;
    }
    case FKind::Bracket: return true;
  }
  return true;
}

Formula substitute(const Formula& f, const Binding& b) {
  if (b.empty()) return f;
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom: {
      std::vector<Term> args;
      args.reserve(n.args.size());
      for (auto& t : n.args) args.push_back(term_subst(t, b.first));
      return mk_pr_atom(n.rel, std::move(args));
    }
    case FKind::SetAtom: {
      Term t = term_subst(n.args[0], b.first);
      auto it = b.second.find(n.var2);
      if (it == b.second.end()) return mk_set_atom(n.var2, t);
      const auto& [psi, y] = it->second;
      std::set<Name> tvars;
      term_free_vars(t, tvars);
      if (!term_substitutable(psi, y, tvars))
        throw KernelError("capture substituting " + print_term(t) + " for " + y);
      Binding inner;
      inner.first[y] = t;
      return substitute(psi, inner);
    }
    case FKind::MuAtom: {
      Term t = term_subst(n.args[0], b.first);
      Binding inner = binding_without(b, n.mu_x, n.mu_X);
      FreeVars fv = free_vars(n.body);
      for (auto& [y, tt] : inner.first) {
        if (!fv.first.count(y)) continue;
        std::set<Name> tv;
        term_free_vars(tt, tv);
        if (tv.count(n.mu_x))
          throw KernelError("capture at binder mu " + n.mu_x + " substituting for " + y);
      }
      for (auto& [Y, pf] : inner.second) {
        if (!fv.second.count(Y)) continue;
        FreeVars pv = free_vars(pf.first);
        if (pv.first.count(n.mu_x))
          throw KernelError("capture at binder mu " + n.mu_x + " substituting for " + Y);
        if (pv.second.count(n.mu_X))
          throw KernelError("capture at binder mu " + n.mu_X + " substituting for " + Y);
      }
      return mk_mu_atom(t, n.mu_x, n.mu_X, substitute(n.body, inner));
    }
    case FKind::Neg: {
      Formula sub = substitute(n.body, b);
      return is_atomic(sub) ? mk_neg(sub) : negate(sub);
    }
    case FKind::And: return mk_and(substitute(n.left, b), substitute(n.right, b));
    case FKind::Or: return mk_or(substitute(n.left, b), substitute(n.right, b));
    case FKind::Forall:
    case FKind::Exists: {
      Binding inner = binding_without(b, n.qvar, "");
      FreeVars fv = free_vars(n.body);
      for (auto& [y, tt] : inner.first) {
        if (!fv.first.count(y)) continue;
        std::set<Name> tv;
        term_free_vars(tt, tv);
        if (tv.count(n.qvar))
          throw KernelError("capture at quantifier binding " + n.qvar + " substituting for " + y);
      }
      Formula body = substitute(n.body, inner);
      return n.kind == FKind::Forall ? mk_forall(n.qvar, body) : mk_exists(n.qvar, body);
    }
    case FKind::Bracket:
      throw KernelError("substitution into bracketed formulas is not defined");
  }
  throw KernelError("unreachable");
}

Formula subst_term(const Formula& f, const Name& x, const Term& t) {
  Binding b;
  b.first[x] = t;
  return substitute(f, b);
}

Formula subst_formula(const Formula& f, const Name& X, const Formula& psi, const Name& y) {
  Binding b;
  b.second[X] = {psi, y};
  return substitute(f, b);
}

// ---------------------------------------------------------------------------
// Complexity measures
// ---------------------------------------------------------------------------

uint64_t rank(const Formula& f) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::SetAtom:
    case FKind::MuAtom:
    case FKind::Neg: return 0;
    case FKind::And:
    case FKind::Or: return std::max(rank(n.left), rank(n.right)) + 1;
    case FKind::Forall:
    case FKind::Exists: return rank(n.body) + 1;
    case FKind::Bracket: throw KernelError("rank undefined for bracketed formulas");
  }
  return 0;
}

uint64_t nest(const Formula& f, const std::set<Name>& S) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::SetAtom: return 0;
    case FKind::MuAtom: {
      uint64_t best = 0;
      Formula as_expr = f;
      FreeVars fv = free_vars(f);
      bool meets = false;
      for (auto& X : fv.second)
        if (S.count(X)) meets = true;
      if (meets) {
        std::set<Name> S2 = S;
        S2.insert(n.mu_X);
        best = nest(n.body, S2) + 1;
      }
      // mu-subformulas strictly inside the body still count as subformulas
      return std::max(best, nest(n.body, S));
    }
    case FKind::Neg: return nest(n.body, S);
    case FKind::And:
    case FKind::Or: return std::max(nest(n.left, S), nest(n.right, S));
    case FKind::Forall:
    case FKind::Exists: return nest(n.body, S);
    case FKind::Bracket: throw KernelError("nest undefined for bracketed formulas");
  }
  return 0;
}

DepthExpr DepthExpr::finite(uint64_t n) {
  DepthExpr d;
  if (n) d.coeff = {n};
  return d;
}

DepthExpr DepthExpr::omega_power(uint64_t k) {
  DepthExpr d;
  d.coeff.assign(k + 1, 0);
  d.coeff[k] = 1;
  return d;
}

void DepthExpr::normalize() {
  while (!coeff.empty() && coeff.back() == 0) coeff.pop_back();
}

std::string DepthExpr::str() const {
  if (coeff.empty()) return "0";
  std::string out;
  for (size_t i = coeff.size(); i-- > 0;) {
    if (!coeff[i]) continue;
    if (!out.empty()) out += "+";
    if (i == 0) {
      out += std::to_string(coeff[0]);
    } else {
      out += i == 1 ? "W" : "W^" + std::to_string(i);
      if (coeff[i] != 1) out += "*" + std::to_string(coeff[i]);
    }
  }
  return out;
}

int depth_compare(const DepthExpr& a, const DepthExpr& b) {
  if (a.coeff.size() != b.coeff.size()) return a.coeff.size() < b.coeff.size() ? -1 : 1;
  for (size_t i = a.coeff.size(); i-- > 0;) {
    if (a.coeff[i] != b.coeff[i]) return a.coeff[i] < b.coeff[i] ? -1 : 1;
  }
  return 0;
}

DepthExpr depth_add(const DepthExpr& a, const DepthExpr& b) {
  if (b.is_zero()) return a;
  DepthExpr r = b;
  size_t k = b.coeff.size() - 1;  // leading power of b
  if (a.coeff.size() > k + 1) {
    DepthExpr r2 = a;
    r2.coeff[k] += b.coeff[k];
    for (size_t i = 0; i < k; i++) r2.coeff[i] = b.coeff[i];
    return r2;
  }
  if (a.coeff.size() == k + 1) r.coeff[k] += a.coeff[k];
  return r;
}

DepthExpr depth_max(const DepthExpr& a, const DepthExpr& b) {
  return depth_compare(a, b) < 0 ? b : a;
}

DepthExpr depth(const Formula& f) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::SetAtom: return DepthExpr::zero();
    case FKind::MuAtom: {
      ParameterizedForm pf = parameterized_form(n.body);
      DepthExpr m = DepthExpr::zero();
      for (auto& [z, bind] : pf.params) m = depth_max(m, depth(bind.first));
      std::set<Name> S{n.mu_X};
      return depth_add(m, DepthExpr::omega_power(nest(n.body, S)));
    }
    case FKind::Neg: return depth(n.body);
    case FKind::And:
    case FKind::Or: return depth_max(depth(n.left), depth(n.right));
    case FKind::Forall:
    case FKind::Exists: return depth(n.body);
    case FKind::Bracket: throw KernelError("depth undefined for bracketed formulas");
  }
  return DepthExpr::zero();
}

// ---------------------------------------------------------------------------
// Parameterized form
// ---------------------------------------------------------------------------

namespace {

struct ParamState {
  std::vector<std::pair<Name, std::pair<Formula, Name>>> params;  // in scan order
  std::vector<Formula> exprs;  // the bare closed mu-expressions as mu-atoms over y
  std::set<Name> taken;

  Name param_for(const Formula& closed_mu_atom_y) {
    for (size_t i = 0; i < exprs.size(); i++)
      if (exprs[i] == closed_mu_atom_y) return params[i].first;
    Name z;
    for (int k = 1;; k++) {
      z = "Z" + std::to_string(k);
      if (!taken.count(z)) break;
    }
    taken.insert(z);
    params.emplace_back(z, std::make_pair(closed_mu_atom_y, Name("y@p")));
    exprs.push_back(closed_mu_atom_y);
    return z;
  }
};

Formula parameterize_rec(const Formula& f, ParamState& st) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::SetAtom: return f;
    case FKind::MuAtom: {
      // closed = no free variables of either order, per the footnote
      Formula bare = mk_mu_atom(mk_var("y@p"), n.mu_x, n.mu_X, n.body);
      FreeVars fv = free_vars(bare);
      fv.first.erase("y@p");
      if (fv.first.empty() && fv.second.empty()) {
        Name z = st.param_for(bare);
        return mk_set_atom(z, n.args[0]);
      }
      return mk_mu_atom(n.args[0], n.mu_x, n.mu_X, parameterize_rec(n.body, st));
    }
    case FKind::Neg: {
      Formula sub = parameterize_rec(n.body, st);
      return mk_neg(sub);
    }
    case FKind::And: {
      Formula l = parameterize_rec(n.left, st);
      return mk_and(l, parameterize_rec(n.right, st));
    }
    case FKind::Or: {
      Formula l = parameterize_rec(n.left, st);
      return mk_or(l, parameterize_rec(n.right, st));
    }
    case FKind::Forall: return mk_forall(n.qvar, parameterize_rec(n.body, st));
    case FKind::Exists: return mk_exists(n.qvar, parameterize_rec(n.body, st));
    case FKind::Bracket: throw KernelError("parameterized form undefined for brackets");
  }
  return f;
}

}  // namespace

ParameterizedForm parameterized_form(const Formula& f) {
  ParamState st;
  FreeVars fv = free_vars(f);
  st.taken = fv.second;
  ParameterizedForm out;
  out.skeleton = parameterize_rec(f, st);
  out.params = std::move(st.params);
  return out;
}

// ---------------------------------------------------------------------------
// Occurrence polarity of mu-expressions
// ---------------------------------------------------------------------------

MuExpr mu_expr_of(const Formula& f) {
  const FNode* n = &f.node();
  if (n->kind == FKind::Neg) n = &n->body.node();
  if (n->kind != FKind::MuAtom) throw KernelError("not a mu-literal");
  return MuExpr{n->mu_x, n->mu_X, n->body};
}

bool mu_expr_eq(const MuExpr& a, const MuExpr& b) {
  return a.as_atom(mk_zero()) == b.as_atom(mk_zero());
}

uint64_t mu_expr_hash(const MuExpr& m) { return m.as_atom(mk_zero()).hash(); }

namespace {
void occurs_rec(const MuExpr& mu, const Formula& f, bool sign, const std::set<Name>& bound1,
                const std::set<Name>& bound2, const FreeVars& mufv, Polarity& out) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::SetAtom: return;
    case FKind::MuAtom: {
      bool captured = false;
      for (auto& v : mufv.first)
        if (bound1.count(v)) captured = true;
      for (auto& v : mufv.second)
        if (bound2.count(v)) captured = true;
      if (!captured && mu_expr_eq(mu, MuExpr{n.mu_x, n.mu_X, n.body})) {
        (sign ? out.positive : out.negative) = true;
      }
      std::set<Name> b1 = bound1, b2 = bound2;
      b1.insert(n.mu_x);
      b2.insert(n.mu_X);
      occurs_rec(mu, n.body, sign, b1, b2, mufv, out);
      return;
    }
    case FKind::Neg:
      occurs_rec(mu, n.body, !sign, bound1, bound2, mufv, out);
      return;
    case FKind::And:
    case FKind::Or:
      occurs_rec(mu, n.left, sign, bound1, bound2, mufv, out);
      occurs_rec(mu, n.right, sign, bound1, bound2, mufv, out);
      return;
    case FKind::Forall:
    case FKind::Exists: {
      std::set<Name> b1 = bound1;
      b1.insert(n.qvar);
      occurs_rec(mu, n.body, sign, b1, bound2, mufv, out);
      return;
    }
    case FKind::Bracket:
      // brackets swap the polarity of occurrences
      for (auto& g : n.theta) occurs_rec(mu, g, !sign, {}, {}, mufv, out);
      return;
  }
}
}  // namespace

Polarity occurs_polarity(const MuExpr& mu, const Formula& target) {
  Polarity out;
  FreeVars mufv = free_vars(mu.as_atom(mk_zero()));
  occurs_rec(mu, target, true, {}, {}, mufv, out);
  return out;
}

Polarity occurs_polarity(const MuExpr& mu, const Sequent& target) {
  Polarity out;
  for (auto& f : target) {
    Polarity p = occurs_polarity(mu, f);
    out.positive = out.positive || p.positive;
    out.negative = out.negative || p.negative;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Printing / parsing
// ---------------------------------------------------------------------------

Sexpr term_to_sexpr(const Term& t) {
  switch (t->kind) {
    case TermNode::Kind::Var: return Sexpr::sym(t->var);
    case TermNode::Kind::Zero: return Sexpr::sym("0");
    case TermNode::Kind::Succ: return Sexpr::list({Sexpr::sym("S"), term_to_sexpr(t->sub)});
  }
  throw KernelError("unreachable");
}

Sexpr formula_to_sexpr(const Formula& f) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom: {
      std::vector<Sexpr> xs{Sexpr::sym(n.rel)};
      for (auto& t : n.args) xs.push_back(term_to_sexpr(t));
      return Sexpr::list(std::move(xs));
    }
    case FKind::SetAtom:
      return Sexpr::list({Sexpr::sym(n.var2), term_to_sexpr(n.args[0])});
    case FKind::MuAtom:
      return Sexpr::list({Sexpr::sym("in"), term_to_sexpr(n.args[0]),
                          Sexpr::list({Sexpr::sym("mu"), Sexpr::sym(n.mu_x), Sexpr::sym(n.mu_X),
                                       formula_to_sexpr(n.body)})});
    case FKind::Neg: return Sexpr::list({Sexpr::sym("not"), formula_to_sexpr(n.body)});
    case FKind::And:
      return Sexpr::list({Sexpr::sym("and"), formula_to_sexpr(n.left), formula_to_sexpr(n.right)});
    case FKind::Or:
      return Sexpr::list({Sexpr::sym("or"), formula_to_sexpr(n.left), formula_to_sexpr(n.right)});
    case FKind::Forall:
      return Sexpr::list({Sexpr::sym("forall"), Sexpr::sym(n.qvar), formula_to_sexpr(n.body)});
    case FKind::Exists:
      return Sexpr::list({Sexpr::sym("exists"), Sexpr::sym(n.qvar), formula_to_sexpr(n.body)});
    case FKind::Bracket: {
      std::vector<Sexpr> th;
      for (auto& g : n.theta) th.push_back(formula_to_sexpr(g));
      return Sexpr::list({Sexpr::sym("bracket"), Sexpr::list(std::move(th)),
                          Sexpr::list({Sexpr::sym("tag"), formula_to_sexpr(n.tag)}),
                          position_to_sexpr(n.eps)});
    }
  }
  throw KernelError("unreachable");
}

std::string print_term(const Term& t) { return print_sexpr(term_to_sexpr(t)); }
std::string print_formula(const Formula& f) { return print_sexpr(formula_to_sexpr(f)); }

Term term_from_sexpr(const Sexpr& e) {
  if (e.is_atom) {
    if (e.atom == "0") return mk_zero();
    // numeral sugar on input
    if (std::isdigit(static_cast<unsigned char>(e.atom[0]))) {
      return mk_num(std::stoull(e.atom));
    }
    return mk_var(e.atom);
  }
  if (e.head() == "S" && e.size() == 2) return mk_succ(term_from_sexpr(e.at(1)));
  throw KernelError("bad term: " + print_sexpr(e));
}

Formula formula_from_sexpr(const Sexpr& e) {
  if (e.is_atom) throw KernelError("bad formula: " + print_sexpr(e));
  const std::string& h = e.head();
  if (h == "in" && e.size() == 3) {
    const Sexpr& mu = e.at(2);
    if (mu.head() != "mu" || mu.size() != 4) throw KernelError("bad mu: " + print_sexpr(mu));
    return mk_mu_atom(term_from_sexpr(e.at(1)), mu.at(1).atom, mu.at(2).atom,
                      formula_from_sexpr(mu.at(3)));
  }
  if (h == "not" && e.size() == 2) return mk_neg(formula_from_sexpr(e.at(1)));
  if (h == "and" && e.size() == 3)
    return mk_and(formula_from_sexpr(e.at(1)), formula_from_sexpr(e.at(2)));
  if (h == "or" && e.size() == 3)
    return mk_or(formula_from_sexpr(e.at(1)), formula_from_sexpr(e.at(2)));
  if (h == "forall" && e.size() == 3)
    return mk_forall(e.at(1).atom, formula_from_sexpr(e.at(2)));
  if (h == "exists" && e.size() == 3)
    return mk_exists(e.at(1).atom, formula_from_sexpr(e.at(2)));
  if (h == "bracket" && e.size() == 4) {
    std::vector<Formula> theta;
    for (auto& g : e.at(1).items) theta.push_back(formula_from_sexpr(g));
    if (e.at(2).head() != "tag") throw KernelError("bracket needs (tag f)");
    Formula tag = formula_from_sexpr(e.at(2).at(1));
    Position eps = position_from_sexpr(e.at(3));
    return mk_bracket(std::move(theta), std::move(tag), std::move(eps));
  }
  // PrAtom or SetAtom by head convention: registry symbols vs capitalized names
  if (!h.empty()) {
    bool upper = std::isupper(static_cast<unsigned char>(h[0]));
    if (upper && e.size() == 2) return mk_set_atom(h, term_from_sexpr(e.at(1)));
    std::vector<Term> args;
    for (size_t i = 1; i < e.size(); i++) args.push_back(term_from_sexpr(e.at(i)));
    return mk_pr_atom(h, std::move(args));
  }
  throw KernelError("bad formula: " + print_sexpr(e));
}

Term parse_term(const std::string& s) { return term_from_sexpr(parse_sexpr(s)); }
Formula parse_formula(const std::string& s) { return formula_from_sexpr(parse_sexpr(s)); }

}  // namespace mu
