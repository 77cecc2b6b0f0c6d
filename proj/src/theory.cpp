#include "mu/theory.hpp"

#include "mu/registry.hpp"
#include "mu/rule.hpp"

namespace mu {

std::optional<int> level_of_depth(const DepthExpr& d, int c0) {
  if (d.is_finite()) {
    uint64_t v = d.finite_value();
    if (v >= static_cast<uint64_t>(c0) + 1) return std::nullopt;  // window [0, C0]
    return static_cast<int>(v);
  }
  if (d.degree() == 1 && d.coeff[1] == 1) {
    uint64_t v = d.coeff[0];
    if (v >= static_cast<uint64_t>(c0)) return std::nullopt;
    return kLevelOmega + static_cast<int>(v);
  }
  return std::nullopt;
}

Theory Theory::finitary(int level, int c0) {
  Theory t;
  t.family = Family::FinitaryMu;
  t.level = level;
  t.c0 = c0;
  return t;
}

Theory Theory::inf_plus(int level, int c0, bool id1) {
  Theory t;
  t.family = Family::InfPlus;
  t.level = level;
  t.c0 = c0;
  t.id1 = id1;
  return t;
}

Theory Theory::inf(int level, int c0, bool id1) {
  Theory t;
  t.family = Family::Inf;
  t.level = level;
  t.c0 = c0;
  t.id1 = id1;
  return t;
}

Theory Theory::reading_theory() const {
  if (id1) return inf_plus(1, 1, true);
  if (level_is_nested(level)) {
    Theory t = inf_plus(kLevelOmega + c0 - 1, c0, false);
    t.cut_ceiling = 0;
    return t;
  }
  Theory t = inf_plus(0, c0, false);
  t.cut_ceiling = 0;
  return t;
}

bool Theory::formula_in_scope(const Formula& f) const {
  if (!is_proper(f)) return false;
  if (!bracket_free(f)) return false;
  auto lv = level_of_depth(depth(f), c0);
  if (!lv) return false;
  if (id1) return *lv <= 1;
  if (family == Family::FinitaryMu && !level_is_nested(level))
    return !level_is_nested(*lv) && *lv <= level;
  // Infinitary theories of section 5/6 range over the whole window; the level
  // only gates Cut / Omega-flat / Read availability.
  return true;
}

namespace {

bool closed_in_scope(const Theory& th, const Formula& f) {
  return is_closed(f) && th.formula_in_scope(f);
}

std::optional<int> mu_atom_level(const Formula& mu_atom, int c0) {
  return level_of_depth(depth(mu_atom), c0);
}

bool theta_bracket_bound_ok(const Sequent& theta, int max_member_level) {
  for (auto& f : theta)
    if (bracket_level(f) > max_member_level) return false;
  return true;
}

}  // namespace

bool Theory::contains(const Rule& r) const {
  const RuleV& v = *r;
  switch (family) {
    case Family::FinitaryMu: {
      switch (v.name) {
        case RuleName::Def:
          return is_def_axiom_instance(v.formulas[0]) && formula_in_scope(v.formulas[0]);
        case RuleName::Ax:
          return is_atomic(v.formulas[0]) && formula_in_scope(v.formulas[0]);
        case RuleName::AndI:
        case RuleName::OrIL:
        case RuleName::OrIR:
        case RuleName::AllI:
        case RuleName::ExI:
        case RuleName::IndArith:
        case RuleName::IndMu:
        case RuleName::Cl:
        case RuleName::Cut:
        case RuleName::Rep: {
          for (auto& f : v.conclusion)
            if (!formula_in_scope(f)) return false;
          if (v.arity == PremiseArity::None) return true;
          for (auto& l : finite_labels(r)) {
            WideSequent prem = rule_premise(r, l);
            for (auto& f : prem.explicit_part)
              if (!formula_in_scope(f)) return false;
          }
          if (v.name == RuleName::Cut && cut_ceiling && rank(v.formulas[0]) >= static_cast<uint64_t>(*cut_ceiling))
            return false;
          return true;
        }
        default: return false;
      }
    }
    case Family::InfPlus:
    case Family::Inf: {
      bool full = family == Family::Inf;
      switch (v.name) {
        case RuleName::True:
          return closed_in_scope(*this, v.formulas[0]) && evaluate_literal(v.formulas[0]);
        case RuleName::AndI:
        case RuleName::OrIL:
        case RuleName::OrIR:
        case RuleName::Omega:
        case RuleName::ExI:
        case RuleName::Cl:
          for (auto& f : v.conclusion)
            if (!closed_in_scope(*this, f)) return false;
          return true;
        case RuleName::Rep:
          return true;
        case RuleName::Cut: {
          if (id1 && !full) return false;  // ID1's positive fragment is cut-free
          if (!closed_in_scope(*this, v.formulas[0])) return false;
          if (cut_ceiling && rank(v.formulas[0]) >= static_cast<uint64_t>(*cut_ceiling)) return false;
          if (id1) return true;
          auto lv = mu_atom_level(v.formulas[0], c0);
          if (!lv) return false;
          // Cut formulas live at or below the theory level.
          if (level_is_nested(level)) return true;
          return !level_is_nested(*lv) && *lv <= level;
        }
        case RuleName::OmegaFlat: {
          if (id1 && !full) return false;
          if (!closed_in_scope(*this, v.formulas[0])) return false;
          auto lv = mu_atom_level(v.formulas[0], c0);
          if (!lv || *lv < 1) return false;
          if (id1) return *lv == 1;
          if (level_is_nested(level)) return true;
          return !level_is_nested(*lv) && *lv <= level;
        }
        case RuleName::CutOmegaFlat: {
          if (!full) return false;
          if (!closed_in_scope(*this, v.formulas[0])) return false;
          auto lv = mu_atom_level(v.formulas[0], c0);
          if (!lv || *lv < 1) return false;
          if (id1) return *lv == 1;
          if (level_is_nested(level)) return true;
          return !level_is_nested(*lv) && *lv <= level;
        }
        case RuleName::Read: {
          if (id1 && !full) return false;
          if (!closed_in_scope(*this, v.read_tag)) return false;
          auto lv = mu_atom_level(v.read_tag, c0);
          if (!lv || *lv < 1) return false;
          int max_member = level_is_nested(*lv) ? 1 : 0;
          if (!theta_bracket_bound_ok(v.theta, max_member)) return false;
          if (!(v.read_theory == reading_theory_for_tag(*lv))) return false;
          if (id1) return *lv == 1;
          if (level_is_nested(level)) return true;
          return !level_is_nested(*lv) && *lv <= level;
        }
        default: return false;
      }
    }
  }
  return false;
}

Theory Theory::reading_theory_for_tag(int tag_level) const {
  if (id1) return inf_plus(1, 1, true);
  // Only depth exactly W reads the big positive theory; successor levels
  // (finite or W+j) read the arithmetic part.
  if (tag_level == kLevelOmega) {
    Theory t = inf_plus(kLevelOmega + c0 - 1, c0, false);
    t.cut_ceiling = 0;
    return t;
  }
  Theory t = inf_plus(0, c0, false);
  t.cut_ceiling = 0;
  return t;
}

std::string Theory::name() const { return print_sexpr(to_sexpr()); }

Sexpr Theory::to_sexpr() const {
  std::vector<Sexpr> xs{Sexpr::sym("theory")};
  switch (family) {
    case Family::FinitaryMu: xs.push_back(Sexpr::sym("fin")); break;
    case Family::InfPlus: xs.push_back(Sexpr::sym("inf+")); break;
    case Family::Inf: xs.push_back(Sexpr::sym("inf")); break;
  }
  xs.push_back(Sexpr::sym(std::to_string(level)));
  xs.push_back(Sexpr::sym(std::to_string(c0)));
  xs.push_back(Sexpr::sym(id1 ? "id1" : "gen"));
  xs.push_back(Sexpr::sym(cut_ceiling ? std::to_string(*cut_ceiling) : "none"));
  return Sexpr::list(std::move(xs));
}

Theory Theory::from_sexpr(const Sexpr& e) {
  if (e.head() != "theory" || e.size() != 6) throw KernelError("bad theory: " + print_sexpr(e));
  Theory t;
  const std::string& fam = e.at(1).atom;
  if (fam == "fin") t.family = Family::FinitaryMu;
  else if (fam == "inf+") t.family = Family::InfPlus;
  else if (fam == "inf") t.family = Family::Inf;
  else throw KernelError("bad theory family: " + fam);
  t.level = std::stoi(e.at(2).atom);
  t.c0 = std::stoi(e.at(3).atom);
  t.id1 = e.at(4).atom == "id1";
  if (e.at(5).atom != "none") t.cut_ceiling = std::stoi(e.at(5).atom);
  return t;
}

uint64_t Theory::hash() const {
  uint64_t h = hash_mix(77, static_cast<uint64_t>(family));
  h = hash_mix(h, static_cast<uint64_t>(level));
  h = hash_mix(h, static_cast<uint64_t>(c0));
  h = hash_mix(h, id1 ? 1 : 0);
  h = hash_mix(h, cut_ceiling ? static_cast<uint64_t>(*cut_ceiling) + 1 : 0);
  return h;
}

bool Theory::operator==(const Theory& o) const {
  return family == o.family && level == o.level && c0 == o.c0 && id1 == o.id1 &&
         cut_ceiling == o.cut_ceiling;
}

}  // namespace mu
