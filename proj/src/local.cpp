#include "mu/local.hpp"

namespace mu {

namespace {

// One pending input of the bar-engine: the subtree standing at position eps,
// plus the premise formulas consumed on the way there (used to bound what the
// input may still contribute to declared sequents).
struct FamEntry {
  Position eps;
  NodeRef node;
  Sequent consumed;
};

using Family = std::shared_ptr<const std::vector<FamEntry>>;

Family family_of(std::vector<FamEntry> v) {
  return std::make_shared<const std::vector<FamEntry>>(std::move(v));
}

Family family_override(const Family& fam, FamEntry e) {
  std::vector<FamEntry> v = *fam;
  v.push_back(std::move(e));
  return family_of(std::move(v));
}

// Latest entry whose position is a prefix of eps, then walk the remainder.
FamEntry resolve(const Family& fam, const Position& eps) {
  const FamEntry* base = nullptr;
  // newest entries take precedence among equal-length prefixes
  for (auto it = fam->rbegin(); it != fam->rend(); ++it) {
    if (it->eps.is_prefix_of(eps)) {
      if (!base || it->eps.size() > base->eps.size()) base = &*it;
    }
  }
  if (!base) throw ExpandError("no input resolves position " + print_position(eps));
  FamEntry cur{eps, base->node, base->consumed};
  for (size_t i = base->eps.size(); i < eps.size(); i++) {
    const PosStep& step = eps.steps[i];
    if (rule_fingerprint(cur.node->rule) != rule_fingerprint(step.rule))
      throw ExpandError("input position step does not match input rule at " +
                        print_position(eps));
    cur.consumed =
        cur.consumed.set_union(rule_premise(cur.node->rule, step.label).explicit_part);
    cur.node = cur.node->expand(step.label);
  }
  return cur;
}

// Live entries: the latest entry for each distinct position.
std::vector<const FamEntry*> live_entries(const Family& fam) {
  std::vector<const FamEntry*> out;
  for (auto it = fam->rbegin(); it != fam->rend(); ++it) {
    bool shadowed = false;
    for (auto* e : out)
      if (position_eq(e->eps, it->eps)) shadowed = true;
    if (!shadowed) out.push_back(&*it);
  }
  return out;
}

struct BarEngine : std::enable_shared_from_this<BarEngine> {
  LocalFunction F;

  explicit BarEngine(LocalFunction f) : F(std::move(f)) {}

  bool own_read(const Rule& r) const { return F.owns_read(r); }

  WideSequent strip_phi_brackets(const WideSequent& w) const {
    WideSequent out;
    for (auto& f : w.explicit_part) {
      if (f.kind() == FKind::Bracket && f.node().tag == F.phi_F) continue;
      out.insert(f);
    }
    for (auto& p : w.patterns)
      if (!(p.tag == F.phi_F)) out.add_pattern(p);
    return out;
  }

  WideSequent state_declared(const NodeRef& h, const Family& fam) const {
    WideSequent out = strip_phi_brackets(h->declared);
    for (auto* e : live_entries(fam)) {
      for (auto& f : e->node->declared.explicit_part) {
        if (f == F.phi_F || e->consumed.contains(f)) continue;
        out.insert(f);
      }
      for (auto& p : e->node->declared.patterns)
        if (!(p.tag == F.phi_F)) out.add_pattern(p);
    }
    return out;
  }

  std::optional<ord::OTerm> state_bound(const NodeRef& h, const Family& fam) const {
    if (!h->bound) return std::nullopt;
    bool missing = false;
    ord::OTerm b = ord::substitute_vars(*h->bound, [&](const ord::TNode& v) -> std::optional<ord::OTerm> {
      if (v.kind != ord::TKind::PosVar || !(v.pos_tag == F.phi_F)) return std::nullopt;
      try {
        FamEntry e = resolve(fam, v.pos_eps);
        if (e.node->bound) return *e.node->bound;
      } catch (const KernelError&) {
      }
      missing = true;
      return std::nullopt;
    });
    if (missing) return std::nullopt;
    return b;
  }

  // Case analysis at an own-Read node: returns (output rule, carrier node for
  // the continuation, family for the continuation). For the CutOmegaFlat case
  // the two branches are assembled by expand() directly.
  struct Step {
    Rule out_rule;
    NodeRef next_h;
    Family next_fam;
  };

  Step step(const NodeRef& h, const Family& fam) const {
    const Rule& rd = h->rule;
    const Position& eps0 = rd->eps;
    FamEntry in = resolve(fam, eps0);
    const Rule& rin = in.node->rule;
    bool in_source = F.source.contains(rin);
    if (in_source) {
      NodeRef next = h->expand(BranchLabel{rin});
      return {rule_rep(), next, fam};
    }
    if (!F.lift_to)
      throw ExpandError("input rule outside the source theory at " + print_position(eps0) +
                        " (use lift): " + print_rule(rin));
    if (rin->name == RuleName::Read) {
      Sequent merged = rin->theta.set_union(rd->theta);
      Rule out = rule_read(rin->read_theory, std::move(merged), rin->read_tag, rin->eps);
      return {out, h, fam};
    }
    if (rin->name == RuleName::OmegaFlat && rd->theta.contains(mk_neg(rin->formulas[0]))) {
      Rule out = rule_cut_omega_flat(rin->formulas[0]);
      return {out, h, fam};
    }
    // unexpected rule copied identically
    return {rin, h, fam};
  }

  NodeRef mk(const NodeRef& h, const Family& fam, int rep_chain = 0) const {
    auto self = shared_from_this();
    if (rep_chain > 512)
      throw KernelError("bar-engine: unbounded Rep chain while computing a declared sequent");
    WideSequent declared = state_declared(h, fam);
    std::optional<ord::OTerm> bound = state_bound(h, fam);
    if (!own_read(h->rule)) {
      Rule rule = h->rule;
      if (rule->name == RuleName::Rep) {
        // Gamma is equal across Rep edges; chase the chain for the declared
        NodeRef child = mk(h->expand(LabelTop{}), fam, rep_chain + 1);
        return make_node(rule, child->declared, std::move(bound),
                         [child](const BranchLabel& l) -> NodeRef {
                           if (!std::holds_alternative<LabelTop>(l))
                             throw ExpandError("Rep expects the top branch");
                           return child;
                         });
      }
      return make_node(rule, std::move(declared), std::move(bound),
                       [self, h, fam](const BranchLabel& l) {
                         return self->mk(h->expand(l), fam);
                       });
    }
    Step st = step(h, fam);
    for (auto& f : st.out_rule->conclusion) declared.insert(f);
    if (st.out_rule->name == RuleName::Rep) {
      NodeRef child = mk(st.next_h, st.next_fam, rep_chain + 1);
      return make_node(rule_rep(), child->declared, std::move(bound),
                       [child](const BranchLabel& l) -> NodeRef {
                         if (!std::holds_alternative<LabelTop>(l))
                           throw ExpandError("Rep expects the top branch");
                         return child;
                       });
    }
    if (st.out_rule->name == RuleName::CutOmegaFlat) {
      Rule out = st.out_rule;
      NodeRef hh = h;
      Family ff = fam;
      Position eps0 = h->rule->eps;
      return make_node(out, std::move(declared), std::move(bound),
                       [self, hh, ff, out, eps0](const BranchLabel& l) -> NodeRef {
                         FamEntry in = resolve(ff, eps0);
                         if (std::holds_alternative<LabelTop>(l)) {
                           // continue reading as if the input introduced the cut formula
                           NodeRef next = hh->expand(BranchLabel{out->formulas[0]});
                           return self->mk(next, ff);
                         }
                         if (std::holds_alternative<LabelBot>(l)) {
                           FamEntry e{eps0, in.node->expand(LabelBot{}),
                                      in.consumed.set_union(
                                          rule_premise(in.node->rule, LabelBot{}).explicit_part)};
                           return self->mk(hh, family_override(ff, std::move(e)));
                         }
                         throw ExpandError("CutOmegaFlat expects top/bot");
                       });
    }
    // merged Read or identical copy: branches advance the input at eps0; a
    // formula branch the input lacks is backed by the function's own
    // recorded side proof
    Rule out = st.out_rule;
    NodeRef hh = h;
    Family ff = fam;
    Position eps0 = h->rule->eps;
    return make_node(out, std::move(declared), std::move(bound),
                     [self, hh, ff, out, eps0](const BranchLabel& l) -> NodeRef {
                       FamEntry in = resolve(ff, eps0);
                       if (!label_in_universe(in.node->rule, l)) {
                         if (std::holds_alternative<Formula>(l) &&
                             label_in_universe(hh->rule, l))
                           return self->mk(hh->expand(l), ff);
                         throw ExpandError("branch outside input domain: " + print_label(l));
                       }
                       Sequent consumed = in.consumed.set_union(
                           rule_premise(in.node->rule, l).explicit_part);
                       FamEntry e{eps0, in.node->expand(l), std::move(consumed)};
                       return self->mk(hh, family_override(ff, std::move(e)));
                     });
  }
};

}  // namespace

ProofTree apply(const LocalFunction& F, const ProofTree& d) {
  auto engine = std::make_shared<BarEngine>(F);
  Family fam = family_of({FamEntry{Position{}, d.root(), Sequent{}}});
  Theory out_theory = F.lift_to ? *F.lift_to : F.target;
  return ProofTree(engine->mk(F.carrier.root(), fam), out_theory);
}

LocalFunction lift(const LocalFunction& F, const Theory& t_star) {
  LocalFunction out = F;
  out.lift_to = t_star;
  return out;
}

Report validate_local_function(const LocalFunction& F, const ExploreConfig& cfg) {
  Report rep;
  // Every phi_F bracket in the declared endsequent sits at the root position.
  for (auto& f : F.carrier.root()->declared.explicit_part) {
    if (f.kind() == FKind::Bracket && f.node().tag == F.phi_F && !f.node().eps.empty())
      rep.add(Position{}, "endsequent bracket with nonempty position: " + print_formula(f));
  }
  for (auto& p : F.carrier.root()->declared.patterns) {
    if (p.tag == F.phi_F && !(p.eps.empty() && !p.branch_rule))
      rep.add(Position{}, "endsequent bracket pattern with nonempty position");
  }
  // Every Read for phi_F reads the declared source theory.
  explore(F.carrier, cfg, [&](const TraceRecord& rec) {
    rep.explored++;
    const Rule& r = rec.node->rule;
    if (r->name == RuleName::Read && r->read_tag == F.phi_F && !(r->read_theory == F.source))
      rep.add(rec.pos, "Read over a different theory: " + r->read_theory.name());
  });
  return rep;
}

std::vector<Position> upsilon(const LocalFunction& F, const ExploreConfig& cfg) {
  std::vector<Position> out;
  explore(F.carrier, cfg, [&](const TraceRecord& rec) {
    const Rule& r = rec.node->rule;
    if (F.owns_read(r)) {
      for (auto& p : out)
        if (position_eq(p, r->eps)) return;
      out.push_back(r->eps);
    }
  });
  return out;
}

ConservativityReport is_rule_for_rule_conservative(const Theory& t_star, const Theory& t,
                                                   const LocalFunction& F,
                                                   const ExploreConfig& cfg) {
  ConservativityReport rep;
  size_t seen = 0;
  explore(F.carrier, cfg, [&](const TraceRecord& rec) {
    seen++;
    if (rep.verdict == Conservativity::Violation) return;
    const Rule& r = rec.node->rule;
    if (!F.owns_read(r)) return;
    // Non-Read rules of t_star \ t introducing a formula of theta. Among the
    // theory catalog the only non-Read rules of the bigger theories with a
    // nonempty conclusion are the Omega-flat rules.
    for (auto& f : r->theta) {
      if (!(f.kind() == FKind::Neg && f.node().body.kind() == FKind::MuAtom)) continue;
      Rule of = rule_omega_flat(f.node().body);
      if (t_star.contains(of) && !t.contains(of)) {
        rep.verdict = Conservativity::Violation;
        rep.detail = "Omega-flat rule for " + print_formula(f) + " introduces a theta formula at " +
                     print_position(rec.pos);
        return;
      }
    }
  });
  if (rep.verdict == Conservativity::Pass && seen >= cfg.max_nodes)
    rep.verdict = Conservativity::Unknown;
  return rep;
}

}  // namespace mu
