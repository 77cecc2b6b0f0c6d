#include "mu/ordinal.hpp"

#include <algorithm>

#include "mu/rule.hpp"
#include "mu/theory.hpp"

namespace mu::ord {

namespace {

OTerm make(TNode n) { return std::make_shared<const TNode>(std::move(n)); }

bool term_before(const OTerm& a, const OTerm& b) {
  uint64_t ha = term_hash(a), hb = term_hash(b);
  if (ha != hb) return ha < hb;
  if (eq_term(a, b)) return false;
  return print_ord(a) < print_ord(b);
}

}  // namespace

uint64_t term_hash(const OTerm& t) {
  if (t->hash_cache) return t->hash_cache;
  uint64_t h = hash_mix(201, static_cast<uint64_t>(t->kind));
  switch (t->kind) {
    case TKind::Sum:
      for (auto& p : t->parts) h += term_hash(p) * 0x9e3779b97f4a7c15ull;  // order-insensitive
      break;
    case TKind::OmegaPow: h = hash_mix(h, term_hash(t->arg)); break;
    case TKind::Theta:
      h = hash_mix(h, static_cast<uint64_t>(t->level));
      h = hash_mix(h, term_hash(t->arg));
      break;
    case TKind::Cardinal: h = hash_mix(h, static_cast<uint64_t>(t->level)); break;
    case TKind::PosVar:
      h = hash_mix(h, t->pos_tag.hash());
      h = hash_mix(h, position_hash(t->pos_eps));
      break;
    case TKind::MuVar: h = hash_mix(h, t->mu_tag.hash()); break;
  }
  if (!h) h = 1;
  t->hash_cache = h;
  return h;
}

bool eq_term(const OTerm& a, const OTerm& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  if (term_hash(a) != term_hash(b)) return false;
  switch (a->kind) {
    case TKind::Sum: {
      if (a->parts.size() != b->parts.size()) return false;
      std::vector<bool> used(b->parts.size(), false);
      for (auto& p : a->parts) {
        bool found = false;
        for (size_t j = 0; j < b->parts.size(); j++) {
          if (!used[j] && eq_term(p, b->parts[j])) {
            used[j] = true;
            found = true;
            break;
          }
        }
        if (!found) return false;
      }
      return true;
    }
    case TKind::OmegaPow: return eq_term(a->arg, b->arg);
    case TKind::Theta: return a->level == b->level && eq_term(a->arg, b->arg);
    case TKind::Cardinal: return a->level == b->level;
    case TKind::PosVar:
      return a->pos_tag == b->pos_tag && position_eq(a->pos_eps, b->pos_eps);
    case TKind::MuVar: return a->mu_tag == b->mu_tag;
  }
  return false;
}

bool in_h(const OTerm& t) { return t->kind != TKind::Sum; }
bool in_sc(const OTerm& t) {
  switch (t->kind) {
    case TKind::Theta:
    case TKind::Cardinal:
    case TKind::PosVar:
    case TKind::MuVar: return true;
    default: return false;
  }
}

OTerm zero() {
  static const OTerm z = [] {
    TNode n;
    n.kind = TKind::Sum;
    return make(std::move(n));
  }();
  return z;
}

OTerm mk_sum(std::vector<OTerm> parts) {
  std::vector<OTerm> flat;
  for (auto& p : parts) {
    if (p->kind == TKind::Sum)
      flat.insert(flat.end(), p->parts.begin(), p->parts.end());
    else
      flat.push_back(p);
  }
  if (flat.empty()) return zero();
  if (flat.size() == 1) return flat[0];
  std::sort(flat.begin(), flat.end(), term_before);
  TNode n;
  n.kind = TKind::Sum;
  n.parts = std::move(flat);
  return make(std::move(n));
}

OTerm mk_omega_pow(OTerm a) {
  TNode n;
  n.kind = TKind::OmegaPow;
  n.arg = std::move(a);
  return make(std::move(n));
}

bool has_pos_vars_at_least(const OTerm& a, int c) {
  switch (a->kind) {
    case TKind::Sum:
      for (auto& p : a->parts)
        if (has_pos_vars_at_least(p, c)) return true;
      return false;
    case TKind::OmegaPow:
    case TKind::Theta: return has_pos_vars_at_least(a->arg, c);
    case TKind::Cardinal: return false;
    case TKind::PosVar: return a->level >= c;
    case TKind::MuVar: return false;
  }
  return false;
}

OTerm mk_theta(int level, OTerm a) {
  if (level < 1) throw KernelError("theta level must be >= 1");
  if (has_pos_vars_at_least(a, level))
    throw KernelError("theta argument has position variables of level >= " +
                      std::to_string(level) + ": " + print_ord(a));
  TNode n;
  n.kind = TKind::Theta;
  n.level = level;
  n.arg = std::move(a);
  return make(std::move(n));
}

namespace {
// The ID1 ll-check compares against theta(beta) even when beta carries
// variables; the term is formed without the FV side condition there.
OTerm mk_theta_unchecked(int level, OTerm a) {
  TNode n;
  n.kind = TKind::Theta;
  n.level = level;
  n.arg = std::move(a);
  return make(std::move(n));
}
}  // namespace

OTerm mk_cardinal(int level) {
  if (level < 1) throw KernelError("cardinal level must be >= 1");
  TNode n;
  n.kind = TKind::Cardinal;
  n.level = level;
  return make(std::move(n));
}

OTerm mk_pos_var(Formula tag, Position eps, int level) {
  if (tag.kind() != FKind::MuAtom) throw KernelError("position variable tag must be a mu-atom");
  TNode n;
  n.kind = TKind::PosVar;
  n.level = level;
  n.pos_tag = std::move(tag);
  n.pos_eps = std::move(eps);
  return make(std::move(n));
}

OTerm mk_mu_var(const MuExpr& tag, int level) {
  TNode n;
  n.kind = TKind::MuVar;
  n.level = level;
  n.mu_tag = tag.as_atom(mk_zero());
  return make(std::move(n));
}

OTerm one() {
  static const OTerm o = mk_omega_pow(zero());
  return o;
}

OTerm omega() {
  static const OTerm w = mk_omega_pow(one());
  return w;
}

OTerm nat(uint64_t n) {
  std::vector<OTerm> parts(n, one());
  return mk_sum(std::move(parts));
}

OTerm add(OTerm a, OTerm b) { return mk_sum({std::move(a), std::move(b)}); }

OTerm times(const OTerm& a, uint64_t k) {
  std::vector<OTerm> parts(k, a);
  return mk_sum(std::move(parts));
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

namespace {

Cmp flip(Cmp c) {
  if (c == Cmp::Less) return Cmp::Greater;
  if (c == Cmp::Greater) return Cmp::Less;
  return c;
}

// Band of an SC-term: (level, sub-band) with theta < variables < cardinal.
std::pair<int, int> sc_band(const TNode& n) {
  switch (n.kind) {
    case TKind::Theta: return {n.level, 0};
    case TKind::PosVar:
    case TKind::MuVar: return {n.level, 1};
    case TKind::Cardinal: return {n.level, 2};
    default: throw KernelError("sc_band: not an SC term");
  }
}

// Multiset difference helper.
void multiset_diff(const std::vector<OTerm>& a, const std::vector<OTerm>& b,
                   std::vector<OTerm>& out) {
  std::vector<bool> used(b.size(), false);
  for (auto& x : a) {
    bool matched = false;
    for (size_t j = 0; j < b.size(); j++) {
      if (!used[j] && eq_term(x, b[j])) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) out.push_back(x);
  }
}

Cmp compare_sums(const std::vector<OTerm>& a, const std::vector<OTerm>& b) {
  std::vector<OTerm> ab, ba;
  multiset_diff(a, b, ab);
  multiset_diff(b, a, ba);
  if (ab.empty() && ba.empty()) return Cmp::Equal;
  auto dominates = [](const std::vector<OTerm>& big, const std::vector<OTerm>& small) {
    for (auto& g : big) {
      bool all = true;
      for (auto& d : small) {
        if (compare(d, g) != Cmp::Less) {
          all = false;
          break;
        }
      }
      if (all) return true;
    }
    return false;
  };
  bool lt = dominates(ba, ab);  // some gamma in B\A above all of A\B
  bool gt = dominates(ab, ba);
  if (lt && !gt) return Cmp::Less;
  if (gt && !lt) return Cmp::Greater;
  if (!lt && !gt) return Cmp::Incomparable;
  // both directions claimed: only possible with incomparabilities inside
  return Cmp::Incomparable;
}

Cmp compare_sum_h(const std::vector<OTerm>& a, const OTerm& beta) {
  bool all_less = true, some_geq = false;
  for (auto& x : a) {
    Cmp c = compare(x, beta);
    if (c != Cmp::Less) all_less = false;
    if (c == Cmp::Greater || c == Cmp::Equal) some_geq = true;
  }
  if (all_less) return Cmp::Less;
  if (some_geq) return Cmp::Greater;
  return Cmp::Incomparable;
}

}  // namespace

Cmp compare(const OTerm& ta, const OTerm& tb) {
  const TNode& a = *ta;
  const TNode& b = *tb;
  if (eq_term(ta, tb)) return Cmp::Equal;

  if (a.kind == TKind::Sum && b.kind == TKind::Sum) return compare_sums(a.parts, b.parts);
  if (a.kind == TKind::Sum) return compare_sum_h(a.parts, tb);
  if (b.kind == TKind::Sum) return flip(compare_sum_h(b.parts, ta));

  if (a.kind == TKind::OmegaPow && b.kind == TKind::OmegaPow)
    return compare(a.arg, b.arg);
  if (a.kind == TKind::OmegaPow && in_sc(tb)) {
    // w^x < gamma iff x < gamma; gamma < w^x iff gamma <= x
    Cmp c = compare(a.arg, tb);
    if (c == Cmp::Less) return Cmp::Less;
    if (c == Cmp::Equal || c == Cmp::Greater) return Cmp::Greater;
    return Cmp::Incomparable;
  }
  if (in_sc(ta) && b.kind == TKind::OmegaPow) return flip(compare(tb, ta));

  if (in_sc(ta) && in_sc(tb)) {
    auto [la, sa] = sc_band(a);
    auto [lb, sb] = sc_band(b);
    if (la != lb || sa != sb) {
      if (la != lb) return la < lb ? Cmp::Less : Cmp::Greater;
      return sa < sb ? Cmp::Less : Cmp::Greater;
    }
    // same band
    if (a.kind == TKind::Cardinal) return Cmp::Equal;
    if (a.kind == TKind::Theta) {
      // theta_c(x) vs theta_c(y) via the K-condition
      Cmp cargs = compare(a.arg, b.arg);
      if (cargs == Cmp::Equal) return Cmp::Equal;
      if (cargs == Cmp::Incomparable) return Cmp::Incomparable;
      if (cargs == Cmp::Less) {
        bool all = true;
        for (auto& g : k_set(a.level, a.arg))
          if (compare(g, tb) != Cmp::Less) {
            all = false;
            break;
          }
        if (all) return Cmp::Less;
        return Cmp::Greater;
      }
      // b.arg < a.arg: mirror
      bool all = true;
      for (auto& g : k_set(b.level, b.arg))
        if (compare(g, ta) != Cmp::Less) {
          all = false;
          break;
        }
      return all ? Cmp::Greater : Cmp::Less;
    }
    if (a.kind == TKind::PosVar && b.kind == TKind::PosVar) {
      if (!(a.pos_tag == b.pos_tag)) return Cmp::Incomparable;
      if (position_eq(a.pos_eps, b.pos_eps)) return Cmp::Equal;  // unreached (eq_term)
      if (b.pos_eps.is_prefix_of(a.pos_eps)) return Cmp::Less;   // longer position is smaller
      if (a.pos_eps.is_prefix_of(b.pos_eps)) return Cmp::Greater;
      return Cmp::Incomparable;
    }
    return Cmp::Incomparable;  // distinct variables of the same level
  }
  throw KernelError("compare: unhandled term shapes");
}

bool less(const OTerm& a, const OTerm& b) { return compare(a, b) == Cmp::Less; }
bool leq(const OTerm& a, const OTerm& b) {
  Cmp c = compare(a, b);
  return c == Cmp::Less || c == Cmp::Equal;
}

// ---------------------------------------------------------------------------
// K sets and the << relations
// ---------------------------------------------------------------------------

std::vector<OTerm> k_set(int c, const OTerm& a) {
  std::vector<OTerm> out;
  switch (a->kind) {
    case TKind::Sum:
      for (auto& p : a->parts) {
        auto sub = k_set(c, p);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    case TKind::OmegaPow: return k_set(c, a->arg);
    case TKind::Cardinal:
      if (a->level < c) out.push_back(a);
      return out;
    case TKind::PosVar:
      if (a->level < c) out.push_back(a);
      return out;
    case TKind::MuVar:
      if (a->level <= c) out.push_back(a);
      return out;
    case TKind::Theta:
      if (a->level <= c) {
        out.push_back(a);
      } else {
        return k_set(c, a->arg);
      }
      return out;
  }
  return out;
}

bool ll_id1(const OTerm& gamma, const OTerm& alpha, const OTerm& beta) {
  if (!less(alpha, beta)) return false;
  OTerm tb = mk_theta_unchecked(1, beta);
  for (auto& d : k_set(1, alpha)) {
    if (!less(d, tb) && !less(d, gamma)) return false;
  }
  return true;
}

bool ll(int c, const OTerm& gamma, const OTerm& alpha, const OTerm& beta) {
  if (!less(alpha, beta)) return false;
  for (int cc = 1; cc <= c; cc++) {
    auto ka = k_set(cc, alpha);
    if (ka.empty()) continue;
    auto kb = k_set(cc, beta);
    auto kg = k_set(cc, gamma);
    for (auto& d : ka) {
      bool bounded = false;
      for (auto& t : kb)
        if (leq(d, t)) {
          bounded = true;
          break;
        }
      if (!bounded)
        for (auto& t : kg)
          if (leq(d, t)) {
            bounded = true;
            break;
          }
      if (!bounded) return false;
    }
  }
  return true;
}

bool lleq(int c, const OTerm& gamma, const OTerm& alpha, const OTerm& beta) {
  return eq_term(alpha, beta) || ll(c, gamma, alpha, beta);
}

// ---------------------------------------------------------------------------
// Substitution and collapsing helpers
// ---------------------------------------------------------------------------

OTerm substitute_vars(const OTerm& a, const VarSubst& f) {
  switch (a->kind) {
    case TKind::Sum: {
      std::vector<OTerm> parts;
      parts.reserve(a->parts.size());
      for (auto& p : a->parts) parts.push_back(substitute_vars(p, f));
      return mk_sum(std::move(parts));
    }
    case TKind::OmegaPow: return mk_omega_pow(substitute_vars(a->arg, f));
    case TKind::Theta: {
      OTerm arg = substitute_vars(a->arg, f);
      TNode n;
      n.kind = TKind::Theta;
      n.level = a->level;
      n.arg = std::move(arg);
      return make(std::move(n));
    }
    case TKind::Cardinal: return a;
    case TKind::PosVar:
    case TKind::MuVar: {
      auto r = f(*a);
      return r ? *r : a;
    }
  }
  return a;
}

bool has_vars(const OTerm& a) {
  switch (a->kind) {
    case TKind::Sum:
      for (auto& p : a->parts)
        if (has_vars(p)) return true;
      return false;
    case TKind::OmegaPow:
    case TKind::Theta: return has_vars(a->arg);
    case TKind::Cardinal: return false;
    case TKind::PosVar:
    case TKind::MuVar: return true;
  }
  return false;
}

OTerm replace_cardinal(const OTerm& a, int level, const OTerm& beta) {
  switch (a->kind) {
    case TKind::Sum: {
      std::vector<OTerm> parts;
      for (auto& p : a->parts) parts.push_back(replace_cardinal(p, level, beta));
      return mk_sum(std::move(parts));
    }
    case TKind::OmegaPow: return mk_omega_pow(replace_cardinal(a->arg, level, beta));
    case TKind::Theta: {
      if (a->level <= level) return a;  // bound occurrence
      TNode n;
      n.kind = TKind::Theta;
      n.level = a->level;
      n.arg = replace_cardinal(a->arg, level, beta);
      return make(std::move(n));
    }
    case TKind::Cardinal: return a->level == level ? beta : a;
    case TKind::PosVar:
    case TKind::MuVar: return a;
  }
  return a;
}

OTerm vartheta_collapse(int c, const OTerm& gamma, const OTerm& alpha) {
  if (!eq_term(gamma, zero()) && !in_sc(gamma))
    throw KernelError("vartheta: gamma must be 0 or in SC");
  if (has_pos_vars_at_least(gamma, c)) throw KernelError("vartheta: FV_c(gamma) not empty");
  if (!less(gamma, mk_cardinal(c))) throw KernelError("vartheta: gamma must be below Omega_c");
  return mk_theta(c, add(mk_omega_pow(add(mk_cardinal(c), alpha)), gamma));
}

OTerm omega_tower(const OTerm& base, int k) {
  OTerm t = base;
  for (int i = 0; i < k; i++) t = mk_omega_pow(t);
  return t;
}

WfReport check_wellformed(const OTerm& a, int c0) {
  WfReport r;
  auto fail = [&](const std::string& msg) {
    if (r.ok) {
      r.ok = false;
      r.error = msg;
    }
  };
  switch (a->kind) {
    case TKind::Sum: {
      if (a->parts.size() == 1) fail("sum of arity 1");
      for (auto& p : a->parts) {
        if (!in_h(p)) fail("sum member not in H: " + print_ord(p));
        auto sub = check_wellformed(p, c0);
        if (!sub.ok) fail(sub.error);
      }
      return r;
    }
    case TKind::OmegaPow: return check_wellformed(a->arg, c0);
    case TKind::Theta: {
      if (a->level < 1 || (a->level > c0 && !level_is_nested(a->level)))
        fail("theta level outside window");
      if (has_pos_vars_at_least(a->arg, a->level))
        fail("theta argument has position variables of level >= its own");
      auto sub = check_wellformed(a->arg, c0);
      if (!sub.ok) fail(sub.error);
      return r;
    }
    case TKind::Cardinal:
      if (a->level < 1 || (a->level > c0 && !level_is_nested(a->level)))
        fail("cardinal level outside window");
      return r;
    case TKind::PosVar:
    case TKind::MuVar:
      if (a->level < 1) fail("variable level must be >= 1");
      return r;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Sexpr term_to_sexpr(const OTerm& t) {
  switch (t->kind) {
    case TKind::Sum: {
      std::vector<Sexpr> xs{Sexpr::sym("#")};
      for (auto& p : t->parts) xs.push_back(term_to_sexpr(p));
      return Sexpr::list(std::move(xs));
    }
    case TKind::OmegaPow: return Sexpr::list({Sexpr::sym("w"), term_to_sexpr(t->arg)});
    case TKind::Theta:
      return Sexpr::list(
          {Sexpr::sym("th"), Sexpr::sym(std::to_string(t->level)), term_to_sexpr(t->arg)});
    case TKind::Cardinal:
      return Sexpr::list({Sexpr::sym("Om"), Sexpr::sym(std::to_string(t->level))});
    case TKind::PosVar:
      return Sexpr::list(
          {Sexpr::sym("v"), formula_to_sexpr(t->pos_tag), position_to_sexpr(t->pos_eps)});
    case TKind::MuVar: {
      const FNode& n = t->mu_tag.node();
      return Sexpr::list({Sexpr::sym("vmu"), Sexpr::list({Sexpr::sym("mu"), Sexpr::sym(n.mu_x),
                                                          Sexpr::sym(n.mu_X),
                                                          formula_to_sexpr(n.body)})});
    }
  }
  throw KernelError("unreachable");
}

OTerm term_from_sexpr(const Sexpr& e, int c0) {
  if (e.is_atom) {
    // numeral sugar
    return nat(std::stoull(e.atom));
  }
  const std::string& h = e.head();
  if (h == "#") {
    std::vector<OTerm> parts;
    for (size_t i = 1; i < e.size(); i++) parts.push_back(term_from_sexpr(e.at(i), c0));
    return mk_sum(std::move(parts));
  }
  if (h == "w" && e.size() == 2) return mk_omega_pow(term_from_sexpr(e.at(1), c0));
  if (h == "th" && e.size() == 3)
    return mk_theta(std::stoi(e.at(1).atom), term_from_sexpr(e.at(2), c0));
  if (h == "Om" && e.size() == 2) return mk_cardinal(std::stoi(e.at(1).atom));
  if (h == "v" && e.size() == 3) {
    Formula tag = formula_from_sexpr(e.at(1));
    Position eps = position_from_sexpr(e.at(2));
    auto lv = level_of_depth(depth(tag), c0);
    if (!lv) throw KernelError("position variable tag outside depth window");
    return mk_pos_var(std::move(tag), std::move(eps), *lv);
  }
  if (h == "vmu" && e.size() == 2) {
    const Sexpr& mu = e.at(1);
    if (mu.head() != "mu" || mu.size() != 4) throw KernelError("bad vmu tag");
    Formula atom = mk_mu_atom(mk_zero(), mu.at(1).atom, mu.at(2).atom,
                              formula_from_sexpr(mu.at(3)));
    auto lv = level_of_depth(depth(atom), c0);
    if (!lv) throw KernelError("mu variable tag outside depth window");
    return mk_mu_var(mu_expr_of(atom), *lv);
  }
  throw KernelError("bad ordinal term: " + print_sexpr(e));
}

std::string print_ord(const OTerm& t) { return print_sexpr(term_to_sexpr(t)); }
OTerm parse_ord(const std::string& s, int c0) { return term_from_sexpr(parse_sexpr(s), c0); }

}  // namespace mu::ord
