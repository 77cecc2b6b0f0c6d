#include "mu/pipeline.hpp"

#include "mu/registry.hpp"

namespace mu {

namespace {

int level_of_formula(const Formula& f, int c0) {
  auto lv = level_of_depth(depth(f), c0);
  if (!lv) throw KernelError("formula depth outside the configured window: " + print_formula(f));
  return *lv;
}


WideSequent wide(std::initializer_list<Formula> fs) { return WideSequent{Sequent(fs)}; }

BracketPattern read_child_pattern(const Rule& read, const Rule& branch) {
  BracketPattern p;
  p.theta_min = read->theta;
  p.tag = read->read_tag;
  p.eps = read->eps;
  p.branch_rule = branch;
  return p;
}

}  // namespace

Theory PipelineConfig::embed_theory(int cut_ceiling) const {
  Theory t = id1 ? Theory::inf(1, 1, true) : Theory::inf(c0, c0, false);
  t.cut_ceiling = cut_ceiling;
  return t;
}

Theory PipelineConfig::cutfree_theory(int level) const {
  Theory t = id1 ? Theory::inf(1, 1, true) : Theory::inf(level, c0, false);
  t.cut_ceiling = 0;
  return t;
}

Theory PipelineConfig::positive_theory(int level) const {
  return id1 ? Theory::inf_plus(1, 1, true) : Theory::inf_plus(level, c0, false);
}

ord::OTerm base_for_level(int level) {
  if (level <= 1) return ord::zero();
  std::vector<ord::OTerm> parts;
  for (int c = 1; c < level; c++) parts.push_back(ord::mk_cardinal(c));
  return ord::mk_sum(std::move(parts));
}

// ---------------------------------------------------------------------------
// Identity trees (Lemma thm:identity and its section-5 variant)
// ---------------------------------------------------------------------------

namespace {

struct IdentityCtx : std::enable_shared_from_this<IdentityCtx> {
  Formula atom;
  Theory tread;
  int lv;
  PipelineConfig cfg;
  bool emit_bounds = true;  // W-level annotations are out of scope

  std::optional<ord::OTerm> maybe(ord::OTerm t) const {
    if (!emit_bounds) return std::nullopt;
    return t;
  }

  NodeRef read_state(Sequent theta, Position eps) const {
    auto self = shared_from_this();
    Rule rd = rule_read(tread, theta, atom, eps);
    WideSequent declared{delta_of_position(eps).set_minus(theta).set_union(theta)};
    for (auto& f : rd->conclusion) declared.insert(f);
    std::optional<ord::OTerm> bound =
        emit_bounds ? maybe(ord::add(ord::mk_pos_var(atom, eps, lv), ord::one())) : std::nullopt;
    return make_node(
        rd, std::move(declared), bound,
        [self, theta, eps, rd](const BranchLabel& l) -> NodeRef {
          if (auto* ef = std::get_if<Formula>(&l)) {
            // side branch proving m in mu y Y . psi of lower depth
            return identity_tree(*ef, self->cfg).tree.root();
          }
          const Rule& r = std::get<Rule>(l);
          return self->rule_node(theta, eps, rd, r);
        });
  }

  NodeRef rule_node(const Sequent& theta, const Position& eps, const Rule& rd,
                    const Rule& r) const {
    auto self = shared_from_this();
    WideSequent declared{r->conclusion.set_union(theta)};
    declared.add_pattern(read_child_pattern(rd, r));
    std::optional<ord::OTerm> bound =
        emit_bounds ? maybe(ord::mk_pos_var(atom, eps, lv)) : std::nullopt;
    bool hit = r->conclusion.intersects(theta);
    return make_node(r, std::move(declared), bound,
                     [self, theta, eps, rd, r, hit](const BranchLabel& l) -> NodeRef {
                       Sequent theta2 = theta;
                       if (hit)
                         theta2 = theta2.set_union(rule_premise(r, l).explicit_part);
                       return self->read_state(std::move(theta2),
                                               eps.extended(r, BranchLabel{l}));
                     });
  }
};

}  // namespace

BoundedProofTree identity_tree(const Formula& mu_atom, const PipelineConfig& cfg) {
  if (mu_atom.kind() != FKind::MuAtom) throw KernelError("identity_tree needs a mu-atom");
  auto ctx = std::make_shared<IdentityCtx>();
  ctx->atom = mu_atom;
  ctx->lv = level_of_formula(mu_atom, cfg.id1 ? 1 : cfg.c0);
  ctx->cfg = cfg;
  ctx->emit_bounds = !level_is_nested(ctx->lv);
  Theory tree_theory = cfg.cutfree_theory(ctx->lv);
  ctx->tread = tree_theory.reading_theory_for_tag(ctx->lv);

  Rule root_rule = rule_omega_flat(mu_atom);
  WideSequent declared = wide({mu_atom, mk_neg(mu_atom)});
  std::optional<ord::OTerm> omega_c;
  if (ctx->emit_bounds) omega_c = ord::mk_cardinal(ctx->lv);
  NodeRef root = make_node(root_rule, std::move(declared), omega_c,
                           [ctx](const BranchLabel& l) -> NodeRef {
                             if (!std::holds_alternative<LabelBot>(l))
                               throw ExpandError("Omega-flat expects the bot branch");
                             Sequent theta{ctx->atom};
                             return ctx->read_state(std::move(theta), Position{});
                           });
  BoundedProofTree out;
  out.tree = ProofTree(std::move(root), tree_theory);
  out.level = level_is_nested(ctx->lv) ? 1 : ctx->lv;
  out.base = base_for_level(out.level);
  out.claimed = omega_c ? *omega_c : ord::zero();
  return out;
}

// ---------------------------------------------------------------------------
// Axiom trees (Lemma thm:ax)
// ---------------------------------------------------------------------------

namespace {

NodeRef axiom_node(const Formula& phi, const ord::OTerm& base_card, const PipelineConfig& cfg) {
  const FNode& n = phi.node();
  switch (n.kind) {
    case FKind::Neg: return axiom_node(n.body, base_card, cfg);
    case FKind::Or:
    case FKind::Exists: return axiom_node(negate(phi), base_card, cfg);
    case FKind::MuAtom: return identity_tree(phi, cfg).tree.root();
    case FKind::PrAtom: {
      Formula target = evaluate_literal(phi) ? phi : mk_neg(phi);
      return make_leaf(rule_true(target), wide({phi, mk_neg(phi)}), ord::zero());
    }
    case FKind::SetAtom: throw KernelError("axiom_tree: formula is not proper");
    case FKind::And: {
      uint64_t rk = rank(phi);
      Formula dual = negate(phi);
      Formula left = n.left, right = n.right;
      Rule and_rule = rule_and_i(phi);
      ord::OTerm b = ord::add(base_card, ord::nat(2 * rk));
      ord::OTerm bs = ord::add(base_card, ord::nat(2 * rk - 1));
      return make_node(and_rule, wide({phi, dual}), b,
                       [left, right, dual, bs, base_card, cfg](const BranchLabel& l) -> NodeRef {
                         bool left_side = std::holds_alternative<LabelL>(l);
                         Formula sub = left_side ? left : right;
                         Rule or_rule = left_side ? rule_or_il(dual) : rule_or_ir(dual);
                         return make_node(or_rule, wide({sub, dual}), bs,
                                          [sub, base_card, cfg](const BranchLabel&) {
                                            return axiom_node(sub, base_card, cfg);
                                          });
                       });
    }
    case FKind::Forall: {
      uint64_t rk = rank(phi);
      Formula dual = negate(phi);  // exists x ~psi
      Rule om = rule_omega(phi);
      ord::OTerm b = ord::add(base_card, ord::nat(2 * rk));
      Formula body = n.body;
      Name qv = n.qvar;
      return make_node(
          om, wide({phi, dual}), b,
          [body, qv, dual, base_card, cfg, rk](const BranchLabel& l) -> NodeRef {
            uint64_t m = std::get<uint64_t>(l);
            Formula inst = subst_term(body, qv, mk_num(m));
            Rule exi = rule_ex_i(mk_num(m), dual);
            ord::OTerm be = ord::add(base_card, ord::nat(2 * rk - 1));
            return make_node(exi, wide({inst, dual}), be,
                             [inst, base_card, cfg](const BranchLabel&) {
                               return axiom_node(inst, base_card, cfg);
                             });
          });
    }
    case FKind::Bracket: throw KernelError("axiom_tree undefined for bracketed formulas");
  }
  throw KernelError("unreachable");
}

}  // namespace

BoundedProofTree axiom_tree(const Formula& phi, const PipelineConfig& cfg) {
  if (!is_proper(phi) || !is_closed(phi)) throw KernelError("axiom_tree needs a proper closed formula");
  int lv = level_of_formula(phi, cfg.id1 ? 1 : cfg.c0);
  ord::OTerm base_card = lv >= 1 ? ord::mk_cardinal(lv) : ord::zero();
  BoundedProofTree out;
  out.tree = ProofTree(axiom_node(phi, base_card, cfg), cfg.cutfree_theory(std::max(lv, 1)));
  out.level = std::max(lv, 1);
  out.base = base_for_level(out.level);
  out.claimed = ord::add(base_card, ord::nat(2 * rank(phi)));
  return out;
}

// ---------------------------------------------------------------------------
// Substitution functions (Lemma thm:substitution / thm:substitution2)
// ---------------------------------------------------------------------------

namespace {

struct SubstCtx : std::enable_shared_from_this<SubstCtx> {
  Formula atom;    // n in mu x X . phi
  Formula psi;     // psi(y)
  Name psi_var;
  Name zvar = "Z@s";
  Name wvar = "w@s";
  PipelineConfig cfg;
  Theory tread;
  int lv = 1;
  uint64_t rk = 0;
  Formula exists_f;   // exists x (phi(x,psi) & ~psi(x))
  Formula mu_as_psi;  // w in mu x X. phi, pivot w (for Z |-> mu)

  Formula to_mu(const Formula& skel) const {
    Binding b;
    b.second[zvar] = {mu_as_psi, wvar};
    return substitute(skel, b);
  }
  Formula to_psi(const Formula& skel) const {
    Binding b;
    b.second[zvar] = {psi, psi_var};
    return substitute(skel, b);
  }
  Sequent map_mu(const Sequent& skels) const {
    Sequent out;
    for (auto& f : skels) out.insert(to_mu(f));
    return out;
  }
  Sequent map_psi(const Sequent& skels) const {
    Sequent out;
    for (auto& f : skels) out.insert(to_psi(f));
    return out;
  }

  ord::OTerm read_bound(const Position& eps) const {
    return ord::mk_sum({ord::mk_cardinal(lv), ord::nat(2 * rk),
                        ord::mk_pos_var(atom, eps, lv), ord::nat(2)});
  }
  ord::OTerm rule_bound(const Position& eps, uint64_t extra) const {
    return ord::mk_sum({ord::mk_cardinal(lv), ord::nat(rk), ord::mk_pos_var(atom, eps, lv),
                        ord::nat(extra)});
  }

  // Counterpart of an input-side rule R with principal formula skel[Z->mu],
  // acting on `which` in {skeleton itself, psi-version}.
  Rule counterpart(const Rule& r, const Formula& principal) const {
    switch (r->name) {
      case RuleName::True: return rule_true(principal);
      case RuleName::AndI: return rule_and_i(principal);
      case RuleName::OrIL: return rule_or_il(principal);
      case RuleName::OrIR: return rule_or_ir(principal);
      case RuleName::Omega: return rule_omega(principal);
      case RuleName::ExI: return rule_ex_i(r->terms[0], principal);
      case RuleName::Cl: return rule_cl(principal);
      default:
        throw KernelError(std::string("substitution: no counterpart for rule ") +
                          rule_name_str(r->name));
    }
  }

  NodeRef read_state(Sequent theta_skel, Position eps) const {
    auto self = shared_from_this();
    Sequent theta_old = map_mu(theta_skel);
    Sequent theta_new = map_psi(theta_skel);
    Rule rd = rule_read(tread, theta_old, atom, eps);
    WideSequent declared{delta_of_position(eps).set_minus(theta_old).set_union(theta_new)};
    for (auto& f : rd->conclusion) declared.insert(f);
    declared.insert(exists_f);
    return make_node(
        rd, std::move(declared), read_bound(eps),
        [self, theta_skel, eps, rd](const BranchLabel& l) -> NodeRef {
          if (auto* ef = std::get_if<Formula>(&l)) {
            // formula premise: the canonical derivation of the lower fixed
            // point, as in the section-5 identity construction
            return identity_tree(*ef, self->cfg).tree.root();
          }
          const Rule& r = std::get<Rule>(l);
          // find the skeleton entry whose mu-version the rule introduces
          std::optional<Formula> hit;
          for (auto& skel : theta_skel) {
            if (r->conclusion.contains(self->to_mu(skel))) {
              hit = skel;
              break;
            }
          }
          if (!hit) return self->copy_node(theta_skel, eps, rd, r);
          const FNode& hn = hit->node();
          if (r->name == RuleName::Cl && hn.kind == FKind::SetAtom && hn.var2 == self->zvar)
            return self->cl_block(theta_skel, eps, rd, r, hn.args[0]);
          return self->counterpart_node(theta_skel, eps, rd, r, *hit);
        });
  }

  NodeRef copy_node(const Sequent& theta_skel, const Position& eps, const Rule& rd,
                    const Rule& r) const {
    auto self = shared_from_this();
    WideSequent declared{r->conclusion.set_union(map_psi(theta_skel))};
    declared.insert(exists_f);
    declared.add_pattern(read_child_pattern(rd, r));
    return make_node(r, std::move(declared), rule_bound(eps, 0),
                     [self, theta_skel, eps, r](const BranchLabel& l) {
                       return self->read_state(theta_skel, eps.extended(r, l));
                     });
  }

  NodeRef counterpart_node(const Sequent& theta_skel, const Position& eps, const Rule& rd,
                           const Rule& r, const Formula& skel) const {
    auto self = shared_from_this();
    Rule out = counterpart(r, to_psi(skel));
    Rule rskel = counterpart(r, skel);
    WideSequent declared{out->conclusion.set_union(map_psi(theta_skel))};
    declared.insert(exists_f);
    declared.add_pattern(read_child_pattern(rd, r));
    return make_node(out, std::move(declared), rule_bound(eps, 0),
                     [self, theta_skel, eps, r, rskel](const BranchLabel& l) {
                       Sequent theta2 = theta_skel;
                       theta2 = theta2.set_union(rule_premise(rskel, l).explicit_part);
                       return self->read_state(std::move(theta2), eps.extended(r, l));
                     });
  }

  NodeRef cl_block(const Sequent& theta_skel, const Position& eps, const Rule& rd, const Rule& r,
                   const Term& k) const {
    auto self = shared_from_this();
    const FNode& mu = atom.node();
    Binding to_psi_b;
    to_psi_b.second[mu.mu_X] = {psi, psi_var};
    Formula phi_k_psi = substitute(subst_term(mu.body, mu.mu_x, k), to_psi_b);
    Formula psi_k = subst_term(psi, psi_var, k);
    Formula conj = mk_and(phi_k_psi, negate(psi_k));
    Rule exi = rule_ex_i(k, exists_f);
    Rule andi = rule_and_i(conj);

    WideSequent base_decl{map_psi(theta_skel)};
    Rule self_read = rule_read(tread, map_mu(theta_skel), atom, eps);
    for (auto& f : self_read->conclusion) base_decl.insert(f);
    base_decl.insert(exists_f);

    // skeleton entry phi(k, Z)
    Binding to_z;
    to_z.second[mu.mu_X] = {mk_set_atom(zvar, mk_var(wvar)), wvar};
    Formula phi_k_skel = substitute(subst_term(mu.body, mu.mu_x, k), to_z);

    // the block's sequents carry the bracket of the read above it, which
    // flows through I-and / I-exists into the enclosing Read's premise
    Sequent theta_up = map_mu(theta_skel);
    theta_up.insert(to_mu(phi_k_skel));
    std::vector<Formula> tu(theta_up.begin(), theta_up.end());
    Formula up_bracket = mk_bracket(std::move(tu), atom, eps.extended(r, LabelTop{}));
    base_decl.insert(up_bracket);

    WideSequent and_decl = base_decl;
    and_decl.insert(conj);
    NodeRef and_node = make_node(
        andi, std::move(and_decl), rule_bound(eps, 0),
        [self, theta_skel, eps, r, phi_k_skel, psi_k](const BranchLabel& l) -> NodeRef {
          if (std::holds_alternative<LabelL>(l)) {
            Sequent theta2 = theta_skel;
            theta2.insert(phi_k_skel);
            return self->read_state(std::move(theta2), eps.extended(r, LabelTop{}));
          }
          return axiom_node(psi_k,
                            ord::mk_cardinal(std::max(
                                1, level_of_formula(psi_k, self->cfg.id1 ? 1 : self->cfg.c0))),
                            self->cfg);
        });
    WideSequent exi_decl = base_decl;
    return make_node(exi, std::move(exi_decl), rule_bound(eps, 1),
                     [and_node](const BranchLabel&) { return and_node; });
  }
};

}  // namespace

LocalFunction subst_function(const Formula& mu_atom, const Formula& psi, const Name& psi_var,
                             const PipelineConfig& cfg) {
  if (mu_atom.kind() != FKind::MuAtom) throw KernelError("subst_function needs a mu-atom");
  {
    FreeVars fv = free_vars(psi);
    fv.first.erase(psi_var);
    if (!fv.first.empty() || !fv.second.empty())
      throw KernelError("subst_function: psi must have only the pivot variable free");
  }
  auto ctx = std::make_shared<SubstCtx>();
  ctx->atom = mu_atom;
  ctx->psi = psi;
  ctx->psi_var = psi_var;
  ctx->cfg = cfg;
  ctx->lv = level_of_formula(mu_atom, cfg.id1 ? 1 : cfg.c0);
  ctx->rk = rank(psi);
  const FNode& mu = mu_atom.node();
  ctx->mu_as_psi = mk_mu_atom(mk_var(ctx->wvar), mu.mu_x, mu.mu_X, mu.body);
  Binding bx;
  bx.second[mu.mu_X] = {psi, psi_var};
  Formula phi_psi = substitute(mu.body, bx);
  Formula psi_x = subst_term(psi, psi_var, mk_var(mu.mu_x));
  ctx->exists_f = mk_exists(mu.mu_x, mk_and(phi_psi, negate(psi_x)));

  Theory carrier_theory =
      cfg.id1 ? cfg.cutfree_theory(1) : cfg.positive_theory(std::max(ctx->lv, cfg.c0));
  ctx->tread = carrier_theory.reading_theory_for_tag(ctx->lv);

  Sequent theta0{mk_set_atom(ctx->zvar, mu.args[0])};
  NodeRef root = ctx->read_state(std::move(theta0), Position{});
  LocalFunction F;
  F.carrier = ProofTree(std::move(root), carrier_theory);
  F.phi_F = mu_atom;
  F.source = ctx->tread;
  F.target = carrier_theory;
  return F;
}

ord::OTerm subst_claimed_bound(const Formula& mu_atom, const Formula& psi, const Name& psi_var,
                               const PipelineConfig& cfg) {
  int lv = level_of_formula(mu_atom, cfg.id1 ? 1 : cfg.c0);
  return ord::mk_sum({ord::mk_cardinal(lv), ord::nat(2 * rank(psi)),
                      ord::mk_pos_var(mu_atom, Position{}, lv), ord::nat(2)});
}

// ---------------------------------------------------------------------------
// Nested substitution (Lemma thm:substitution3), structural construction
// ---------------------------------------------------------------------------

namespace {

// Replace every occurrence of the mu-expression by psi (t in mu -> psi[y->t]),
// descending into brackets and the positions they carry.
struct MuReplacer {
  MuExpr target;
  Formula psi;
  Name y;

  Formula fml(const Formula& f) const {
    const FNode& n = f.node();
    switch (n.kind) {
      case FKind::PrAtom:
      case FKind::SetAtom: return f;
      case FKind::MuAtom: {
        if (mu_expr_eq(MuExpr{n.mu_x, n.mu_X, n.body}, target))
          return subst_term(psi, y, n.args[0]);
        return mk_mu_atom(n.args[0], n.mu_x, n.mu_X, fml(n.body));
      }
      case FKind::Neg: {
        Formula sub = fml(n.body);
        return is_atomic(sub) ? mk_neg(sub) : negate(sub);
      }
      case FKind::And: return mk_and(fml(n.left), fml(n.right));
      case FKind::Or: return mk_or(fml(n.left), fml(n.right));
      case FKind::Forall: return mk_forall(n.qvar, fml(n.body));
      case FKind::Exists: return mk_exists(n.qvar, fml(n.body));
      case FKind::Bracket: {
        std::vector<Formula> th;
        for (auto& g : n.theta) th.push_back(fml(g));
        return mk_bracket(std::move(th), fml(n.tag), pos(n.eps));
      }
    }
    return f;
  }

  BranchLabel label(const BranchLabel& l) const {
    if (auto* er = std::get_if<Rule>(&l)) return BranchLabel{rule(*er)};
    if (auto* ef = std::get_if<Formula>(&l)) return BranchLabel{fml(*ef)};
    return l;
  }

  // The structurally forced position mapping theta(nu).
  Position pos(const Position& p) const {
    Position out;
    for (auto& s : p.steps) out.steps.push_back(PosStep{rule(s.rule), label(s.label)});
    return out;
  }

  Rule rule(const Rule& r) const {
    switch (r->name) {
      case RuleName::True: return rule_true(fml(r->formulas[0]));
      case RuleName::AndI: return rule_and_i(fml(r->formulas[0]));
      case RuleName::OrIL: return rule_or_il(fml(r->formulas[0]));
      case RuleName::OrIR: return rule_or_ir(fml(r->formulas[0]));
      case RuleName::Omega: return rule_omega(fml(r->formulas[0]));
      case RuleName::ExI: return rule_ex_i(r->terms[0], fml(r->formulas[0]));
      case RuleName::Cl: return rule_cl(fml(r->formulas[0]));
      case RuleName::Cut: return rule_cut(fml(r->formulas[0]));
      case RuleName::Rep: return r;
      case RuleName::OmegaFlat: return rule_omega_flat(fml(r->formulas[0]));
      case RuleName::CutOmegaFlat: return rule_cut_omega_flat(fml(r->formulas[0]));
      case RuleName::Read: {
        Sequent th;
        for (auto& f : r->theta) th.insert(fml(f));
        return rule_read(r->read_theory, std::move(th), fml(r->read_tag), pos(r->eps));
      }
      default:
        throw KernelError(std::string("mu replacement: unsupported rule ") +
                          rule_name_str(r->name));
    }
  }
};

struct NestedCtx : std::enable_shared_from_this<NestedCtx> {
  Formula atom;  // n in mu x X . phi, depth W
  Formula psi;
  Name psi_var;
  PipelineConfig cfg;
  Theory tread;          // ID^{inf,+}_{W+C0-1,<0}
  Theory inner_tread;    // ID^{inf}_{0,<0}: what the inner Read rules branch over
  MuReplacer rep;        // mu -> psi
  Formula exists_f;

  Formula to_psi(const Formula& f) const { return rep.fml(f); }

  bool is_inner_read(const Rule& r) const {
    return r->name == RuleName::Read && !(r->read_tag == atom);
  }

  WideSequent state_declared(const Sequent& theta_old, const Sequent& theta_new,
                             const Rule& rd) const {
    WideSequent declared{theta_new};
    for (auto& f : rd->conclusion) declared.insert(f);
    declared.insert(exists_f);
    return declared;
  }

  NodeRef read_state(Sequent theta_old, Sequent theta_new, Position eps) const {
    auto self = shared_from_this();
    Sequent theta_prime = theta_old.set_minus(theta_new);
    Rule rd = rule_read(tread, theta_prime, atom, eps);
    WideSequent declared = state_declared(theta_old, theta_new, rd);
    return make_node(
        rd, std::move(declared), std::nullopt,
        [self, theta_old, theta_new, eps, theta_prime, rd](const BranchLabel& l) -> NodeRef {
          if (auto* ef = std::get_if<Formula>(&l)) {
            // side branch: the canonical derivation of the fixed point
            return identity_tree(*ef, self->cfg).tree.root();
          }
          const Rule& r = std::get<Rule>(l);
          // the hit, if any
          std::optional<Formula> hit;
          for (auto& f : theta_prime)
            if (r->conclusion.contains(f)) {
              hit = f;
              break;
            }
          if (!hit)
            return self->copy_outer(theta_old, theta_new, eps, rd, r);
          if (r->name == RuleName::OmegaFlat) return self->oflat_case(theta_old, theta_new, eps, rd, r);
          if (self->is_inner_read(r)) return self->inner_read(theta_old, theta_new, eps, rd, r);
          if (r->name == RuleName::Cl && *hit == self->atom)
            return self->cl_case(theta_old, theta_new, eps, rd, r);
          return self->counterpart_case(theta_old, theta_new, eps, rd, r, *hit);
        });
  }

  NodeRef copy_outer(const Sequent& to, const Sequent& tn, const Position& eps, const Rule& rd,
                     const Rule& r) const {
    auto self = shared_from_this();
    WideSequent declared{r->conclusion.set_union(tn)};
    declared.insert(exists_f);
    declared.add_pattern(read_child_pattern(rd, r));
    return make_node(r, std::move(declared), std::nullopt,
                     [self, to, tn, eps, r](const BranchLabel& l) {
                       return self->read_state(to, tn, eps.extended(r, l));
                     });
  }

  // An Omega-flat rule of the read theory whose conclusion sits in theta':
  // replace it by the Omega-flat for the substituted fixed point.
  NodeRef oflat_case(const Sequent& to, const Sequent& tn, const Position& eps, const Rule& rd,
                     const Rule& r) const {
    auto self = shared_from_this();
    Formula inner_atom = r->formulas[0];          // m in mu y Y . rho(mu)
    Formula inner_psi = to_psi(inner_atom);       // m in mu y Y . rho(psi)
    Rule out = rule_omega_flat(inner_psi);
    WideSequent declared{tn};
    for (auto& f : out->conclusion) declared.insert(f);
    declared.insert(exists_f);
    Formula old_bracket = mk_bracket({inner_atom}, inner_atom, Position{});
    Formula new_bracket = mk_bracket({inner_psi}, inner_psi, Position{});
    return make_node(out, std::move(declared), std::nullopt,
                     [self, to, tn, eps, r, old_bracket, new_bracket](const BranchLabel& l) -> NodeRef {
                       if (!std::holds_alternative<LabelBot>(l))
                         throw ExpandError("Omega-flat expects the bot branch");
                       Sequent to2 = to, tn2 = tn;
                       to2.insert(old_bracket);
                       tn2.insert(new_bracket);
                       return self->read_state(std::move(to2), std::move(tn2),
                                               eps.extended(r, LabelBot{}));
                     });
  }

  // Reading a Read: the four premise cases of Lemma thm:substitution3.
  NodeRef inner_read(const Sequent& to, const Sequent& tn, const Position& eps, const Rule& rd,
                     const Rule& r) const {
    auto self = shared_from_this();
    Formula old_bracket = mk_bracket(std::vector<Formula>(r->theta.begin(), r->theta.end()),
                                     r->read_tag, r->eps);
    // Upsilon' = Upsilon*[Z->psi] u Upsilon+; the plus-part lives in the
    // matching new-side bracket accumulated so far, when there is one.
    Sequent upsilon_psi;
    for (auto& f : r->theta) upsilon_psi.insert(to_psi(f));
    Formula new_tag = to_psi(r->read_tag);
    Position new_pos = rep.pos(r->eps);
    Sequent upsilon_plus;
    for (auto& f : tn) {
      if (f.kind() != FKind::Bracket) continue;
      const FNode& b = f.node();
      if (b.tag == new_tag && position_eq(b.eps, new_pos)) {
        for (auto& g : b.theta)
          if (!upsilon_psi.contains(g)) upsilon_plus.insert(g);
      }
    }
    Sequent upsilon_merged = upsilon_psi.set_union(upsilon_plus);
    Rule out = rule_read(r->read_theory, upsilon_merged, new_tag, new_pos);
    WideSequent declared{tn};
    for (auto& f : out->conclusion) declared.insert(f);
    declared.insert(exists_f);
    Sequent upsilon_old = r->theta;
    return make_node(
        out, std::move(declared), std::nullopt,
        [self, to, tn, eps, r, out, upsilon_psi, upsilon_plus, upsilon_old,
         new_tag, new_pos](const BranchLabel& l) -> NodeRef {
          if (auto* ef = std::get_if<Formula>(&l)) {
            // side branches of the merged Read: continue the outer read at the
            // mu-version formula branch
            Formula mu_version = *ef;
            for (auto& f : upsilon_old) {
              if (f.kind() == FKind::Neg && self->to_psi(f.node().body) == *ef)
                mu_version = f.node().body;
            }
            return self->read_state(to, tn, eps.extended(r, BranchLabel{mu_version}));
          }
          const Rule& rp = std::get<Rule>(l);
          // (a) matched rule: rp introduces upsilon*[Z->psi]
          for (auto& u : upsilon_psi) {
            if (!rp->conclusion.contains(u)) continue;
            bool neg_psi_form = false;
            // ~psi(m) hits are handled by case (c)
            for (auto& old_u : upsilon_old) {
              if (old_u.kind() == FKind::Neg && old_u.node().body.kind() == FKind::MuAtom &&
                  mu_expr_eq(mu_expr_of(old_u), mu_expr_of(self->atom)) &&
                  negate(subst_term(self->psi, self->psi_var,
                                    old_u.node().body.node().args[0])) == u)
                neg_psi_form = true;
            }
            if (neg_psi_form) continue;
            // locate the mu-side counterpart formula
            for (auto& old_u : upsilon_old) {
              if (self->to_psi(old_u) == u) {
                Rule back = self->counterpart_back(rp, u, old_u);
                Sequent to2 = to, tn2 = tn;
                if (back->arity != PremiseArity::Naturals) {
                  for (auto& lab : finite_labels(back)) {
                    Sequent up_old2 =
                        upsilon_old.set_union(rule_premise(back, lab).explicit_part);
                    std::vector<Formula> th(up_old2.begin(), up_old2.end());
                    to2.insert(mk_bracket(std::move(th), r->read_tag,
                                          r->eps.extended(back, lab)));
                    Sequent up_new2; for (auto& g : up_old2) up_new2.insert(self->to_psi(g));
                    std::vector<Formula> th2(up_new2.begin(), up_new2.end());
                    tn2.insert(mk_bracket(std::move(th2), new_tag,
                                          new_pos.extended(self->rep.rule(back), lab)));
                  }
                }
                return self->read_state(std::move(to2), std::move(tn2),
                                        eps.extended(r, BranchLabel{back}));
              }
            }
          }
          // (b) Upsilon+ passthrough: rp introduces a formula the function's
          // new side already provides (Upsilon+ is contained in Theta-new)
          if (rp->conclusion.intersects(upsilon_plus) || rp->conclusion.intersects(tn)) {
            WideSequent declared2{rp->conclusion.set_union(tn)};
            declared2.insert(self->exists_f);
            return make_node(rp, std::move(declared2), std::nullopt,
                             [self, to, tn, eps, r](const BranchLabel&) {
                               return self->read_state(to, tn,
                                                       eps.extended(r, BranchLabel{rule_rep()}));
                             });
          }
          // (c) ~psi(m) insertion: cut it against the side branch
          for (auto& old_u : upsilon_old) {
            if (!(old_u.kind() == FKind::Neg && old_u.node().body.kind() == FKind::MuAtom))
              continue;
            if (!mu_expr_eq(mu_expr_of(old_u), mu_expr_of(self->atom))) continue;
            Formula matom = old_u.node().body;
            Formula psi_m = subst_term(self->psi, self->psi_var, matom.node().args[0]);
            if (!rp->conclusion.contains(negate(psi_m))) continue;
            Rule cut = rule_cut(psi_m);
            WideSequent declared2{tn};
            declared2.insert(self->exists_f);
            return make_node(
                cut, std::move(declared2), std::nullopt,
                [self, to, tn, eps, r, matom, psi_m, rp](const BranchLabel& l2) -> NodeRef {
                  Sequent to2 = to, tn2 = tn;
                  if (std::holds_alternative<LabelL>(l2)) {
                    to2.insert(matom);
                    tn2.insert(psi_m);
                    return self->read_state(std::move(to2), std::move(tn2),
                                            eps.extended(r, BranchLabel{matom}));
                  }
                  WideSequent d3{rp->conclusion.set_union(tn)};
                  d3.insert(negate(psi_m));
                  d3.insert(self->exists_f);
                  return make_node(rp, std::move(d3), std::nullopt,
                                   [self, to, tn, eps, r, matom, psi_m](const BranchLabel&) {
                                     Sequent tn3 = tn;
                                     tn3.insert(negate(psi_m));
                                     return self->read_state(to, std::move(tn3),
                                                             eps.extended(r, BranchLabel{matom}));
                                   });
                });
          }
          // (d) harmless copy with a simulated Rep on the input
          WideSequent declared2{rp->conclusion.set_union(tn)};
          declared2.insert(self->exists_f);
          return make_node(rp, std::move(declared2), std::nullopt,
                           [self, to, tn, eps, r](const BranchLabel&) {
                             return self->read_state(to, tn,
                                                     eps.extended(r, BranchLabel{rule_rep()}));
                           });
        });
  }

  // Back-translation of a psi-side rule to the mu-side counterpart R^<-.
  Rule counterpart_back(const Rule& rp, const Formula& psi_version,
                        const Formula& mu_version) const {
    switch (rp->name) {
      case RuleName::True: return rule_true(mu_version);
      case RuleName::AndI: return rule_and_i(mu_version);
      case RuleName::OrIL: return rule_or_il(mu_version);
      case RuleName::OrIR: return rule_or_ir(mu_version);
      case RuleName::Omega: return rule_omega(mu_version);
      case RuleName::ExI: return rule_ex_i(rp->terms[0], mu_version);
      case RuleName::Cl: return rule_cl(mu_version);
      default:
        throw KernelError(std::string("nested substitution: no counterpart for ") +
                          rule_name_str(rp->name));
    }
  }

  // The main Cl case for the outer fixed point, as in the base substitution.
  NodeRef cl_case(const Sequent& to, const Sequent& tn, const Position& eps, const Rule& rd,
                  const Rule& r) const {
    auto self = shared_from_this();
    Term k = r->formulas[0].node().args[0];
    Formula phi_k_mu = rule_premise(r, LabelTop{}).explicit_part.items()[0];
    Formula phi_k_psi = to_psi(phi_k_mu);
    Formula psi_k = subst_term(psi, psi_var, k);
    Formula conj = mk_and(phi_k_psi, negate(psi_k));
    Rule exi = rule_ex_i(k, exists_f);
    Rule andi = rule_and_i(conj);
    // the read above the block and its bracket, which flows through the block
    Sequent to2 = to, tn2 = tn;
    to2.insert(phi_k_mu);
    tn2.insert(phi_k_psi);
    Sequent theta_up = to2.set_minus(tn2);
    std::vector<Formula> tu(theta_up.begin(), theta_up.end());
    Formula up_bracket = mk_bracket(std::move(tu), atom, eps.extended(r, LabelTop{}));
    WideSequent exi_decl{tn};
    exi_decl.insert(exists_f);
    exi_decl.insert(up_bracket);
    WideSequent and_decl = exi_decl;
    and_decl.insert(conj);
    NodeRef and_node = make_node(
        andi, std::move(and_decl), std::nullopt,
        [self, to2, tn2, eps, r, psi_k](const BranchLabel& l) -> NodeRef {
          if (std::holds_alternative<LabelL>(l)) {
            return self->read_state(to2, tn2, eps.extended(r, LabelTop{}));
          }
          return axiom_node(psi_k, ord::mk_cardinal(1), self->cfg);
        });
    return make_node(exi, std::move(exi_decl), std::nullopt,
                     [and_node](const BranchLabel&) { return and_node; });
  }

  // Other theta' hits: the corresponding rule on the psi-version.
  NodeRef counterpart_case(const Sequent& to, const Sequent& tn, const Position& eps,
                           const Rule& rd, const Rule& r, const Formula& hit) const {
    auto self = shared_from_this();
    Rule out = rep.rule(r);
    WideSequent declared{out->conclusion.set_union(tn)};
    declared.insert(exists_f);
    declared.add_pattern(read_child_pattern(rd, r));
    return make_node(out, std::move(declared), std::nullopt,
                     [self, to, tn, eps, r](const BranchLabel& l) {
                       WideSequent prem = rule_premise(r, l);
                       Sequent to2 = to.set_union(prem.explicit_part);
                       Sequent tn2 = tn;
                       for (auto& f : prem.explicit_part) tn2.insert(self->to_psi(f));
                       return self->read_state(std::move(to2), std::move(tn2),
                                               eps.extended(r, l));
                     });
  }
};

}  // namespace

LocalFunction subst_function_nested(const Formula& mu_atom, const Formula& psi,
                                    const Name& psi_var, const PipelineConfig& cfg) {
  if (mu_atom.kind() != FKind::MuAtom) throw KernelError("nested substitution needs a mu-atom");
  DepthExpr d = depth(mu_atom);
  if (d.is_finite() || d.degree() != 1 || d.coeff[1] != 1 || d.coeff[0] != 0)
    throw KernelError("nested substitution needs a mu-expression of depth W");
  auto ctx = std::make_shared<NestedCtx>();
  ctx->atom = mu_atom;
  ctx->psi = psi;
  ctx->psi_var = psi_var;
  ctx->cfg = cfg;
  Theory carrier_theory = Theory::inf(kLevelOmega + cfg.c0 - 1, cfg.c0, false);
  carrier_theory.cut_ceiling = std::nullopt;
  ctx->tread = Theory::inf_plus(kLevelOmega + cfg.c0 - 1, cfg.c0, false).restrict_cuts(0);
  ctx->inner_tread = Theory::inf_plus(0, cfg.c0, false).restrict_cuts(0);
  ctx->rep = MuReplacer{mu_expr_of(mu_atom), psi, psi_var};
  const FNode& mu = mu_atom.node();
  Binding bx;
  bx.second[mu.mu_X] = {psi, psi_var};
  Formula phi_psi = substitute(mu.body, bx);
  ctx->exists_f =
      mk_exists(mu.mu_x, mk_and(phi_psi, negate(subst_term(psi, psi_var, mk_var(mu.mu_x)))));

  Sequent theta0{mu_atom};
  Sequent theta_new0{subst_term(psi, psi_var, mu_atom.node().args[0])};
  NodeRef root = ctx->read_state(std::move(theta0), std::move(theta_new0), Position{});
  LocalFunction F;
  F.carrier = ProofTree(std::move(root), carrier_theory);
  F.phi_F = mu_atom;
  F.source = ctx->tread;
  F.target = carrier_theory;
  return F;
}

// ---------------------------------------------------------------------------
// Embedding (Theorem thm:id1_embedding / thm:idomega_embedding)
// ---------------------------------------------------------------------------

namespace {

struct EmbedCtx : std::enable_shared_from_this<EmbedCtx> {
  PipelineConfig cfg;
  ord::OTerm omega_top;  // Omega_{lv} of the window top

  ord::OTerm copied_bound(const FinDed& d) const {
    return ord::mk_sum({omega_top, omega_top, ord::omega(), ord::nat(finitary_size(d))});
  }

  FinDed zero_free(const FinDed& d) const {
    FinDed cur = d;
    for (auto& x : finitary_free_vars(cur)) cur = finitary_subst(cur, x, mk_zero());
    return cur;
  }

  NodeRef prove_true_qf(const Formula& f) const {
    auto self = shared_from_this();
    ord::OTerm b = ord::nat(2 * rank(f) + 1);
    const FNode& n = f.node();
    switch (n.kind) {
      case FKind::PrAtom:
      case FKind::Neg:
        if (!evaluate_literal(f)) throw KernelError("prove_true_qf: literal is false");
        return make_leaf(rule_true(f), wide({f}), b);
      case FKind::And:
        return make_node(rule_and_i(f), wide({f}), b, [self, n](const BranchLabel& l) {
          return self->prove_true_qf(std::holds_alternative<LabelL>(l) ? n.left : n.right);
        });
      case FKind::Or: {
        bool left_true = evaluate_closed_qf(n.left);
        Rule r = left_true ? rule_or_il(f) : rule_or_ir(f);
        Formula side = left_true ? n.left : n.right;
        return make_node(r, wide({f}), b,
                         [self, side](const BranchLabel&) { return self->prove_true_qf(side); });
      }
      default: throw KernelError("prove_true_qf: not quantifier-free");
    }
  }

  // Iterated induction stack for Ind-arith at numeral value nn.
  NodeRef ind_stack(const Formula& all, uint64_t j) const {
    auto self = shared_from_this();
    const FNode& n = all.node();
    auto inst = [&](uint64_t m) { return subst_term(n.body, n.qvar, mk_num(m)); };
    Formula neg0 = negate(inst(0));
    Formula step = mk_exists(
        n.qvar, mk_and(n.body, negate(subst_term(n.body, n.qvar, mk_succ(mk_var(n.qvar))))));
    uint64_t rk = rank(n.body);
    if (j == 0) {
      // base: the axiom tree for phi'(0), whose endsequent {phi'(0), ~phi'(0)}
      // is inside the target
      return axiom_node(inst(0), omega_top, cfg);
    }
    Formula inst_j = inst(j);
    Formula conj = mk_and(inst(j - 1), negate(inst_j));
    Rule exi = rule_ex_i(mk_num(j - 1), step);
    Rule andi = rule_and_i(conj);
    WideSequent exi_decl = wide({neg0, step, inst_j});
    WideSequent and_decl = wide({neg0, step, conj, inst_j});
    ord::OTerm bx = ord::add(omega_top, ord::nat(2 * rk + 2 + 3 * j));
    ord::OTerm ba = ord::add(omega_top, ord::nat(2 * rk + 1 + 3 * j));
    NodeRef and_node =
        make_node(andi, std::move(and_decl), ba,
                  [self, all, j, inst_j](const BranchLabel& l) -> NodeRef {
                    if (std::holds_alternative<LabelL>(l)) return self->ind_stack(all, j - 1);
                    return axiom_node(inst_j, self->omega_top, self->cfg);
                  });
    return make_node(exi, std::move(exi_decl), bx,
                     [and_node](const BranchLabel&) { return and_node; });
  }

  NodeRef emb(const FinDed& d) const {
    auto self = shared_from_this();
    const Rule& r = d->rule;
    switch (r->name) {
      case RuleName::Def: {
        Formula f = r->formulas[0];
        if (!is_closed(f)) throw KernelError("embed: open Def instance");
        return prove_true_qf(f);
      }
      case RuleName::Ax: {
        Formula eta = r->formulas[0];
        if (eta.kind() == FKind::MuAtom) return identity_tree(eta, cfg).tree.root();
        Formula target = evaluate_literal(eta) ? eta : mk_neg(eta);
        return make_leaf(rule_true(target), wide({eta, mk_neg(eta)}), ord::nat(1));
      }
      case RuleName::IndArith: {
        auto nn = numeral_value(r->terms[0]);
        if (!nn) throw KernelError("embed: Ind term not closed");
        return ind_stack(r->formulas[0], *nn);
      }
      case RuleName::IndMu: {
        auto nn = numeral_value(r->terms[0]);
        if (!nn) throw KernelError("embed: Ind term not closed");
        const FNode& mu = r->formulas[0].node();
        Formula atom_n = mk_mu_atom(mk_num(*nn), mu.mu_x, mu.mu_X, mu.body);
        int lv = level_of_formula(atom_n, cfg.id1 ? 1 : cfg.c0);
        bool nested = level_is_nested(lv);
        LocalFunction F = nested
                              ? subst_function_nested(atom_n, r->formulas[1], r->var, cfg)
                              : subst_function(atom_n, r->formulas[1], r->var, cfg);
        Rule oflat = rule_omega_flat(atom_n);
        WideSequent declared{r->conclusion};
        std::optional<ord::OTerm> bound;
        // closed at the node itself; the variable-carrying bound starts at
        // the premise, where the bracket licenses it
        if (!nested) bound = ord::times(omega_top, 2);
        NodeRef carrier_root = F.carrier.root();
        return make_node(oflat, std::move(declared), std::move(bound),
                         [carrier_root](const BranchLabel& l) -> NodeRef {
                           if (!std::holds_alternative<LabelBot>(l))
                             throw ExpandError("Omega-flat expects the bot branch");
                           return carrier_root;
                         });
      }
      case RuleName::AllI: {
        Formula all = r->formulas[0];
        Rule om = rule_omega(all);
        FinDed premise = d->premises[0].second;
        Name y = r->var;
        return make_node(om, WideSequent{finitary_gamma(d)}, copied_bound(d),
                         [self, premise, y](const BranchLabel& l) {
                           FinDed inst = finitary_subst(premise, y, mk_num(std::get<uint64_t>(l)));
                           return self->emb(self->zero_free(inst));
                         });
      }
      case RuleName::AndI:
      case RuleName::OrIL:
      case RuleName::OrIR:
      case RuleName::ExI:
      case RuleName::Cl:
      case RuleName::Cut:
      case RuleName::Rep: {
        auto subs = std::make_shared<std::vector<std::pair<BranchLabel, FinDed>>>();
        for (auto& [l, sub] : d->premises) subs->push_back({l, zero_free(sub)});
        return make_node(r, WideSequent{finitary_gamma(d)}, copied_bound(d),
                         [self, subs](const BranchLabel& l) -> NodeRef {
                           for (auto& [cl, sub] : *subs)
                             if (label_eq(cl, l)) return self->emb(sub);
                           throw ExpandError("embed: no premise at " + print_label(l));
                         });
      }
      default:
        throw KernelError(std::string("embed: unexpected finitary rule ") +
                          rule_name_str(r->name));
    }
  }
};

}  // namespace

EmbedResult embed(const FinDed& d, const std::map<Name, uint64_t>& numerals,
                  const PipelineConfig& cfg) {
  FinDed cur = d;
  for (auto& [x, m] : numerals) cur = finitary_subst(cur, x, mk_num(m));
  auto ctx = std::make_shared<EmbedCtx>();
  ctx->cfg = cfg;
  ctx->omega_top = ord::mk_cardinal(cfg.id1 ? 1 : cfg.c0);
  cur = ctx->zero_free(cur);

  FinCheck fc = check_finitary(cur, Theory::finitary(cfg.id1 ? 1 : cfg.c0, cfg.id1 ? 1 : cfg.c0));
  if (!fc.ok) throw KernelError("embed: invalid finitary input: " + fc.errors.front());
  int k = fc.has_cut ? static_cast<int>(fc.max_cut_rank) + 1 : 0;

  EmbedResult out;
  out.cut_ceiling = k;
  out.tree.tree = ProofTree(ctx->emb(cur), cfg.embed_theory(k));
  out.tree.level = cfg.id1 ? 1 : cfg.c0;
  out.tree.base = base_for_level(out.tree.level);
  out.tree.claimed = ctx->copied_bound(cur);
  return out;
}

// ---------------------------------------------------------------------------
// Inversions and eliminations
// ---------------------------------------------------------------------------

namespace {

// Shared pi-walker: rewrites a tree by absorbing `tgt` at Read rules, firing
// `on_intro` at its introduction rule, and copying everything else.
struct WalkSpec {
  Formula tgt;
  uint64_t intro_fp1 = 0, intro_fp2 = 0;  // fingerprints of the introduction rules
  std::function<NodeRef(const NodeRef&)> on_intro;  // builds the replacement node
  std::function<WideSequent(const WideSequent&)> transform;
  std::function<std::optional<ord::OTerm>(const NodeRef&)> bound_of;
  // For mu-elimination: the grafted positive proof fed to new formula branches.
  NodeRef graft_on_formula_branch;
};

WideSequent fix_brackets(const WideSequent& w, const Formula& tgt) {
  WideSequent out;
  for (auto& f : w.explicit_part) {
    if (f.kind() == FKind::Bracket) {
      const FNode& n = f.node();
      Sequent th;
      for (auto& g : n.theta) th.insert(g);
      if (!th.contains(tgt) && delta_of_position(n.eps).contains(tgt)) {
        std::vector<Formula> th2(n.theta.begin(), n.theta.end());
        th2.push_back(tgt);
        out.insert(mk_bracket(std::move(th2), n.tag, n.eps));
        continue;
      }
    }
    out.insert(f);
  }
  out.patterns = w.patterns;
  return out;
}

NodeRef walk(const NodeRef& N, const std::shared_ptr<const WalkSpec>& spec) {
  const Rule& r = N->rule;
  uint64_t fp = rule_fingerprint(r);
  WideSequent declared = spec->transform(N->declared);
  std::optional<ord::OTerm> bound = spec->bound_of(N);
  if (fp == spec->intro_fp1 || fp == spec->intro_fp2) {
    NodeRef repl = spec->on_intro(N);
    // on_intro returns a full node; attach the transformed declared/bound
    return make_node(repl->rule, std::move(declared), std::move(bound), repl->expand);
  }
  if (r->name == RuleName::Read && !r->theta.contains(spec->tgt) &&
      delta_of_position(r->eps).contains(spec->tgt)) {
    Sequent theta2 = r->theta;
    theta2.insert(spec->tgt);
    Rule merged = rule_read(r->read_theory, std::move(theta2), r->read_tag, r->eps);
    for (auto& f : merged->conclusion) declared.insert(f);
    NodeRef graft = spec->graft_on_formula_branch;
    Formula tgt = spec->tgt;
    return make_node(merged, std::move(declared), std::move(bound),
                     [N, spec, graft, tgt, r](const BranchLabel& l) -> NodeRef {
                       if (auto* ef = std::get_if<Formula>(&l)) {
                         bool in_original = false;
                         for (auto& f : r->formula_premises)
                           if (f == *ef) in_original = true;
                         if (!in_original) {
                           if (graft) return graft;
                           throw ExpandError("unexpected new formula branch");
                         }
                       }
                       return walk(N->expand(l), spec);
                     });
  }
  if (r->conclusion.contains(spec->tgt))
    throw ExpandError("inversion/elimination: unexpected introduction of " +
                      print_formula(spec->tgt) + " by " + print_rule(r));
  return make_node(r, std::move(declared), std::move(bound),
                   [N, spec](const BranchLabel& l) { return walk(N->expand(l), spec); });
}

NodeRef rep_over(std::function<NodeRef()> child) {
  // helper node used by on_intro callbacks; declared/bound are patched by walk()
  return make_node(rule_rep(), WideSequent{}, std::nullopt,
                   [child](const BranchLabel& l) -> NodeRef {
                     if (!std::holds_alternative<LabelTop>(l))
                       throw ExpandError("Rep expects the top branch");
                     return child();
                   });
}

}  // namespace

BoundedProofTree invert_and(const BoundedProofTree& d, const Formula& conj, bool left) {
  const FNode& n = conj.node();
  Formula repl = left ? n.left : n.right;
  auto spec = std::make_shared<WalkSpec>();
  spec->tgt = conj;
  spec->intro_fp1 = spec->intro_fp2 = rule_fingerprint(rule_and_i(conj));
  BranchLabel sel = left ? BranchLabel{LabelL{}} : BranchLabel{LabelR{}};
  auto spec_c = std::shared_ptr<const WalkSpec>(spec);
  spec->on_intro = [spec_c, sel](const NodeRef& N) {
    return rep_over([N, spec_c, sel]() { return walk(N->expand(sel), spec_c); });
  };
  spec->transform = [conj, repl](const WideSequent& w) {
    WideSequent out = fix_brackets(w, conj);
    Sequent e = out.explicit_part.set_minus(conj);
    e.insert(repl);
    out.explicit_part = std::move(e);
    return out;
  };
  spec->bound_of = [](const NodeRef& N) { return N->bound; };
  BoundedProofTree out = d;
  out.tree = ProofTree(walk(d.tree.root(), spec_c), d.tree.theory());
  return out;
}

BoundedProofTree invert_all(const BoundedProofTree& d, const Formula& all, uint64_t m) {
  const FNode& n = all.node();
  Formula repl = subst_term(n.body, n.qvar, mk_num(m));
  auto spec = std::make_shared<WalkSpec>();
  spec->tgt = all;
  spec->intro_fp1 = spec->intro_fp2 = rule_fingerprint(rule_omega(all));
  auto spec_c = std::shared_ptr<const WalkSpec>(spec);
  spec->on_intro = [spec_c, m](const NodeRef& N) {
    return rep_over([N, spec_c, m]() { return walk(N->expand(BranchLabel{m}), spec_c); });
  };
  spec->transform = [all, repl](const WideSequent& w) {
    WideSequent out = fix_brackets(w, all);
    Sequent e = out.explicit_part.set_minus(all);
    e.insert(repl);
    out.explicit_part = std::move(e);
    return out;
  };
  spec->bound_of = [](const NodeRef& N) { return N->bound; };
  BoundedProofTree out = d;
  out.tree = ProofTree(walk(d.tree.root(), spec_c), d.tree.theory());
  return out;
}

namespace {

// Shared elimination walker over the negative side.
BoundedProofTree eliminate_common(const BoundedProofTree& d_walk, const NodeRef& pos_root,
                                  const ord::OTerm& pos_bound, const WideSequent& pos_decl,
                                  const Formula& walk_tgt, const Formula& pos_tgt,
                                  const std::function<NodeRef(const NodeRef&,
                                                              const std::shared_ptr<const WalkSpec>&)>& on_intro,
                                  uint64_t intro_fp1, uint64_t intro_fp2, bool mu_graft) {
  auto spec = std::make_shared<WalkSpec>();
  spec->tgt = walk_tgt;
  spec->intro_fp1 = intro_fp1;
  spec->intro_fp2 = intro_fp2;
  auto spec_c = std::shared_ptr<const WalkSpec>(spec);
  spec->on_intro = [on_intro, spec_c](const NodeRef& N) { return on_intro(N, spec_c); };
  WideSequent pos_part;
  for (auto& f : pos_decl.explicit_part)
    if (!(f == pos_tgt)) pos_part.insert(f);
  for (auto& p : pos_decl.patterns) pos_part.add_pattern(p);
  spec->transform = [walk_tgt, pos_part](const WideSequent& w) {
    WideSequent out = fix_brackets(w, walk_tgt);
    out.explicit_part = out.explicit_part.set_minus(walk_tgt);
    return out.set_union(pos_part);
  };
  ord::OTerm A = pos_bound;
  spec->bound_of = [A](const NodeRef& N) -> std::optional<ord::OTerm> {
    if (!N->bound) return std::nullopt;
    return ord::add(A, *N->bound);
  };
  if (mu_graft) spec->graft_on_formula_branch = pos_root;
  BoundedProofTree out = d_walk;
  out.tree = ProofTree(walk(d_walk.tree.root(), spec_c), d_walk.tree.theory());
  out.claimed = ord::add(pos_bound, d_walk.claimed);
  return out;
}

}  // namespace

BoundedProofTree eliminate_or(const BoundedProofTree& d_or, const BoundedProofTree& d_and,
                              const Formula& conj) {
  Formula disj = negate(conj);
  uint64_t fpl = rule_fingerprint(rule_or_il(disj));
  uint64_t fpr = rule_fingerprint(rule_or_ir(disj));
  ord::OTerm A = d_and.tree.root()->bound ? *d_and.tree.root()->bound : d_and.claimed;
  auto on_intro = [d_and, conj, fpl](const NodeRef& N,
                                     const std::shared_ptr<const WalkSpec>& spec) -> NodeRef {
    bool left = rule_fingerprint(N->rule) == fpl;
    Formula phi_i = left ? conj.node().left : conj.node().right;
    Rule cut = rule_cut(phi_i);
    BoundedProofTree inv = invert_and(d_and, conj, left);
    NodeRef inv_root = inv.tree.root();
    return make_node(cut, WideSequent{}, std::nullopt,
                     [N, spec, inv_root](const BranchLabel& l) -> NodeRef {
                       if (std::holds_alternative<LabelL>(l)) return inv_root;
                       return walk(N->expand(LabelTop{}), spec);
                     });
  };
  return eliminate_common(d_or, d_and.tree.root(), A, d_and.tree.root()->declared, disj, conj,
                          on_intro, fpl, fpr, false);
}

BoundedProofTree eliminate_exists(const BoundedProofTree& d_ex, const BoundedProofTree& d_all,
                                  const Formula& all) {
  Formula ex = negate(all);
  ord::OTerm A = d_all.tree.root()->bound ? *d_all.tree.root()->bound : d_all.claimed;
  // ExI rules for ex with arbitrary closed witness terms: we cannot enumerate
  // fingerprints, so match on the rule shape inside on_intro via a sentinel.
  auto spec = std::make_shared<WalkSpec>();
  spec->tgt = ex;
  auto spec_c = std::shared_ptr<const WalkSpec>(spec);
  WideSequent pos_part;
  for (auto& f : d_all.tree.root()->declared.explicit_part)
    if (!(f == all)) pos_part.insert(f);
  spec->transform = [ex, pos_part](const WideSequent& w) {
    WideSequent out = fix_brackets(w, ex);
    out.explicit_part = out.explicit_part.set_minus(ex);
    return out.set_union(pos_part);
  };
  spec->bound_of = [A](const NodeRef& N) -> std::optional<ord::OTerm> {
    if (!N->bound) return std::nullopt;
    return ord::add(A, *N->bound);
  };
  // hand-rolled walk to catch every ExI over `ex`
  std::function<NodeRef(const NodeRef&)> go = [&](const NodeRef& N) -> NodeRef { return N; };
  struct Walker : std::enable_shared_from_this<Walker> {
    std::shared_ptr<const WalkSpec> spec;
    Formula ex, all;
    BoundedProofTree d_all;
    NodeRef run(const NodeRef& N) const {
      auto self = shared_from_this();
      const Rule& r = N->rule;
      WideSequent declared = spec->transform(N->declared);
      std::optional<ord::OTerm> bound = spec->bound_of(N);
      if (r->name == RuleName::ExI && r->formulas[0] == ex) {
        // since the witness term is closed, it denotes a numeral m
        auto mval = numeral_value(r->terms[0]);
        if (!mval) throw ExpandError("exists-elimination: witness term not closed");
        const FNode& an = all.node();
        Formula phim = subst_term(an.body, an.qvar, mk_num(*mval));
        Rule cut = rule_cut(phim);
        BoundedProofTree inv = invert_all(d_all, all, *mval);
        NodeRef inv_root = inv.tree.root();
        return make_node(cut, std::move(declared), std::move(bound),
                         [self, N, inv_root](const BranchLabel& l) -> NodeRef {
                           if (std::holds_alternative<LabelL>(l)) return inv_root;
                           return self->run(N->expand(LabelTop{}));
                         });
      }
      if (r->name == RuleName::Read && !r->theta.contains(ex) &&
          delta_of_position(r->eps).contains(ex)) {
        Sequent theta2 = r->theta;
        theta2.insert(ex);
        Rule merged = rule_read(r->read_theory, std::move(theta2), r->read_tag, r->eps);
        for (auto& f : merged->conclusion) declared.insert(f);
        return make_node(merged, std::move(declared), std::move(bound),
                         [self, N](const BranchLabel& l) { return self->run(N->expand(l)); });
      }
      if (r->conclusion.contains(ex))
        throw ExpandError("exists-elimination: unexpected introduction of the principal formula");
      return make_node(r, std::move(declared), std::move(bound),
                       [self, N](const BranchLabel& l) { return self->run(N->expand(l)); });
    }
  };
  auto w = std::make_shared<Walker>();
  w->spec = spec_c;
  w->ex = ex;
  w->all = all;
  w->d_all = d_all;
  BoundedProofTree out = d_ex;
  out.tree = ProofTree(w->run(d_ex.tree.root()), d_ex.tree.theory());
  out.claimed = ord::add(A, d_ex.claimed);
  return out;
}

BoundedProofTree eliminate_mu(const BoundedProofTree& d_mu, const BoundedProofTree& d_neg,
                              const Formula& mu_atom, const PipelineConfig& cfg) {
  Formula negf = mk_neg(mu_atom);
  uint64_t fp = rule_fingerprint(rule_omega_flat(mu_atom));
  ord::OTerm A = d_mu.tree.root()->bound ? *d_mu.tree.root()->bound : d_mu.claimed;
  NodeRef pos_root = d_mu.tree.root();
  auto on_intro = [pos_root](const NodeRef& N,
                             const std::shared_ptr<const WalkSpec>& spec) -> NodeRef {
    Rule cut = rule_cut_omega_flat(N->rule->formulas[0]);
    return make_node(cut, WideSequent{}, std::nullopt,
                     [N, spec, pos_root](const BranchLabel& l) -> NodeRef {
                       if (std::holds_alternative<LabelTop>(l)) return pos_root;
                       return walk(N->expand(LabelBot{}), spec);
                     });
  };
  return eliminate_common(d_neg, pos_root, A, d_mu.tree.root()->declared, negf, mu_atom, on_intro,
                          fp, fp, true);
}

// ---------------------------------------------------------------------------
// Cut reduction (the Reduce theorem)
// ---------------------------------------------------------------------------

namespace {

struct ReduceCtx : std::enable_shared_from_this<ReduceCtx> {
  uint64_t n;
  PipelineConfig cfg;
  Theory out_theory;
  int level;
  ord::OTerm base;

  BoundedProofTree wrap(const NodeRef& root) const {
    BoundedProofTree b;
    b.tree = ProofTree(root, out_theory);
    b.level = level;
    b.base = base;
    b.claimed = root->bound ? *root->bound : ord::zero();
    return b;
  }

  NodeRef run(const NodeRef& N) const {
    auto self = shared_from_this();
    const Rule& r = N->rule;
    std::optional<ord::OTerm> bound;
    if (N->bound) bound = ord::mk_omega_pow(*N->bound);
    if (r->name == RuleName::Cut && rank(r->formulas[0]) > n)
      throw ExpandError("reduce: cut of rank above the ceiling in the input");
    if (!(r->name == RuleName::Cut && rank(r->formulas[0]) == n)) {
      return make_node(r, N->declared, std::move(bound),
                       [self, N](const BranchLabel& l) { return self->run(N->expand(l)); });
    }
    return make_node(rule_rep(), N->declared, std::move(bound),
                     [self, N](const BranchLabel& l) -> NodeRef {
                       if (!std::holds_alternative<LabelTop>(l))
                         throw ExpandError("Rep expects the top branch");
                       return self->continuation(N);
                     });
  }

  NodeRef continuation(const NodeRef& N) const {
    Formula phi = N->rule->formulas[0];
    const FNode& pn = phi.node();
    auto L = [&] { return run(N->expand(LabelL{})); };
    auto R = [&] { return run(N->expand(LabelR{})); };
    switch (pn.kind) {
      case FKind::PrAtom:
      case FKind::Neg: {
        if (pn.kind == FKind::Neg && pn.body.kind() == FKind::MuAtom) {
          // ~(t in mu): the mu side is the right premise
          return eliminate_mu(wrap(R()), wrap(L()), pn.body, cfg).tree.root();
        }
        bool phi_true = evaluate_literal(phi);
        return phi_true ? R() : L();
      }
      case FKind::And:
        return eliminate_or(wrap(R()), wrap(L()), phi).tree.root();
      case FKind::Or:
        return eliminate_or(wrap(L()), wrap(R()), negate(phi)).tree.root();
      case FKind::Forall:
        return eliminate_exists(wrap(R()), wrap(L()), phi).tree.root();
      case FKind::Exists:
        return eliminate_exists(wrap(L()), wrap(R()), negate(phi)).tree.root();
      case FKind::MuAtom:
        return eliminate_mu(wrap(L()), wrap(R()), phi, cfg).tree.root();
      default:
        throw KernelError("reduce: unexpected cut formula");
    }
  }
};

}  // namespace

BoundedProofTree reduce(const BoundedProofTree& d, uint64_t n, const PipelineConfig& cfg) {
  auto ctx = std::make_shared<ReduceCtx>();
  ctx->n = n;
  ctx->cfg = cfg;
  Theory t = d.tree.theory();
  t.cut_ceiling = static_cast<int>(n);
  ctx->out_theory = t;
  ctx->level = d.level;
  ctx->base = d.base;
  BoundedProofTree out;
  out.tree = ProofTree(ctx->run(d.tree.root()), t);
  out.level = d.level;
  out.base = d.base;
  out.claimed = ord::mk_omega_pow(d.claimed);
  return out;
}

// ---------------------------------------------------------------------------
// Collapsing (Theorems thm:id1_collapsing / thm:idomega_collapsing)
// ---------------------------------------------------------------------------

namespace {

struct CollapseCtx : std::enable_shared_from_this<CollapseCtx> {
  int lv;
  ord::OTerm gamma;
  ord::OTerm beta;  // Omega_lv replacement (identity in the ID1 instance)
  bool replace_beta = false;
  PipelineConfig cfg;
  Theory out_theory;
  Theory in_theory;

  std::optional<ord::OTerm> collapse_bound(const std::optional<ord::OTerm>& b) const {
    if (!b) return std::nullopt;
    ord::OTerm arg = replace_beta ? ord::replace_cardinal(*b, lv, beta) : *b;
    return ord::vartheta_collapse(lv, gamma, arg);
  }

  int tag_level(const Formula& atom) const {
    return level_of_formula(atom, cfg.id1 ? 1 : cfg.c0);
  }

  NodeRef run(const NodeRef& N) const {
    auto self = shared_from_this();
    const Rule& r = N->rule;
    // Omega-flat and Read nodes of any level are copied; they surface in the
    // output only where the endsequent keeps negative occurrences alive (the
    // mu-variable regime), and sit behind consumed branches otherwise.
    std::optional<ord::OTerm> bound = collapse_bound(N->bound);
    if (!(r->name == RuleName::CutOmegaFlat && tag_level(r->formulas[0]) == lv)) {
      return make_node(r, N->declared, std::move(bound),
                       [self, N](const BranchLabel& l) { return self->run(N->expand(l)); });
    }
    return make_node(rule_rep(), N->declared, std::move(bound),
                     [self, N](const BranchLabel& l) -> NodeRef {
                       if (!std::holds_alternative<LabelTop>(l))
                         throw ExpandError("Rep expects the top branch");
                       return self->continuation(N);
                     });
  }

  NodeRef continuation(const NodeRef& N) const {
    Formula atom = N->rule->formulas[0];
    // D(d_top)
    NodeRef top = run(N->expand(LabelTop{}));
    ord::OTerm gamma2 = top->bound ? *top->bound : ord::zero();
    // bar (d_bot lifted) applied to D(d_top)
    LocalFunction F;
    F.carrier = ProofTree(N->expand(LabelBot{}), in_theory);
    F.phi_F = atom;
    F.source = in_theory.reading_theory_for_tag(tag_level(atom));
    F.target = out_theory;
    F = lift(F, out_theory);
    ProofTree applied = apply(F, ProofTree(top, out_theory));
    // D of the result, collapsing above the partner's collapsed bound
    auto inner = std::make_shared<CollapseCtx>(*this);
    inner->gamma = gamma2;
    return inner->run(applied.root());
  }
};

}  // namespace

BoundedProofTree collapse(const BoundedProofTree& d, int level, const ord::OTerm& gamma,
                          const PipelineConfig& cfg) {
  auto ctx = std::make_shared<CollapseCtx>();
  ctx->lv = level;
  ctx->gamma = gamma;
  ctx->cfg = cfg;
  ctx->in_theory = d.tree.theory();
  ctx->out_theory = cfg.id1 ? cfg.positive_theory(1) : cfg.cutfree_theory(level - 1);

  // beta: Omega_lv extended by mu-variables for the negatively occurring
  // depth-lv mu-expressions of the endsequent.
  std::vector<ord::OTerm> parts{ord::mk_cardinal(level)};
  std::vector<MuExpr> seen;
  for (auto& f : d.tree.root()->declared.explicit_part) {
    if (!bracket_free(f)) continue;
    std::function<void(const Formula&)> scan = [&](const Formula& g) {
      const FNode& gn = g.node();
      switch (gn.kind) {
        case FKind::MuAtom: {
          MuExpr me{gn.mu_x, gn.mu_X, gn.body};
          auto lvm = level_of_depth(depth(g), cfg.id1 ? 1 : cfg.c0);
          if (lvm && *lvm == level) {
            bool dup = false;
            for (auto& s : seen) dup = dup || mu_expr_eq(s, me);
            if (!dup && occurs_polarity(me, f).negative) {
              seen.push_back(me);
              if (cfg.id1)
                throw KernelError(
                    "collapse: negative occurrence of a mu-expression in the endsequent "
                    "(not allowed in the single-level instance): " +
                    print_formula(f));
              parts.push_back(ord::mk_mu_var(me, level));
            }
          }
          scan(gn.body);
          return;
        }
        case FKind::Neg: scan(gn.body); return;
        case FKind::And:
        case FKind::Or:
          scan(gn.left);
          scan(gn.right);
          return;
        case FKind::Forall:
        case FKind::Exists: scan(gn.body); return;
        default: return;
      }
    };
    scan(f);
  }
  ctx->replace_beta = parts.size() > 1;
  ctx->beta = ord::mk_sum(std::move(parts));

  BoundedProofTree out;
  out.tree = ProofTree(ctx->run(d.tree.root()), ctx->out_theory);
  out.level = level - 1;
  out.base = ord::zero();
  ord::OTerm claimed_arg = ctx->replace_beta ? ord::replace_cardinal(d.claimed, level, ctx->beta)
                                             : d.claimed;
  out.claimed = ord::vartheta_collapse(level, gamma, claimed_arg);
  return out;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

PipelineRun full_pipeline(const FinDed& d, const PipelineConfig& cfg) {
  PipelineRun run;
  EmbedResult er = embed(d, {}, cfg);
  run.stages.push_back({"embed", er.tree});
  BoundedProofTree cur = er.tree;
  for (int k = er.cut_ceiling - 1; k >= 0; k--) {
    cur = reduce(cur, static_cast<uint64_t>(k), cfg);
    run.stages.push_back({"reduce" + std::to_string(k), cur});
  }
  int top = cfg.id1 ? 1 : cfg.c0;
  for (int lv = top; lv >= 1; lv--) {
    cur = collapse(cur, lv, ord::zero(), cfg);
    run.stages.push_back({"collapse-D" + std::to_string(lv), cur});
  }
  return run;
}

}  // namespace mu
