#include "mu/bound.hpp"

#include <deque>

namespace mu {

void collect_pos_vars(const ord::OTerm& t, std::vector<ord::OTerm>& out) {
  switch (t->kind) {
    case ord::TKind::Sum:
      for (auto& p : t->parts) collect_pos_vars(p, out);
      return;
    case ord::TKind::OmegaPow:
    case ord::TKind::Theta: collect_pos_vars(t->arg, out); return;
    case ord::TKind::PosVar: out.push_back(t); return;
    default: return;
  }
}

void collect_mu_vars(const ord::OTerm& t, std::vector<ord::OTerm>& out) {
  switch (t->kind) {
    case ord::TKind::Sum:
      for (auto& p : t->parts) collect_mu_vars(p, out);
      return;
    case ord::TKind::OmegaPow:
    case ord::TKind::Theta: collect_mu_vars(t->arg, out); return;
    case ord::TKind::MuVar: out.push_back(t); return;
    default: return;
  }
}

// A variable v_{tag,eps} stands for the input's pending subtree at eps; a
// bracket at eps or at any extension of it witnesses that the read is still
// in flight there.
bool declared_licenses_pos_var(const WideSequent& w, const Formula& tag, const Position& eps) {
  for (auto& f : w.explicit_part) {
    if (f.kind() != FKind::Bracket) continue;
    const FNode& n = f.node();
    if (n.tag == tag && eps.is_prefix_of(n.eps)) return true;
  }
  for (auto& p : w.patterns) {
    if (!(p.tag == tag)) continue;
    if (eps.is_prefix_of(p.eps)) return true;
    if (p.branch_rule && eps.size() == p.eps.size() + 1 && p.eps.is_prefix_of(eps)) {
      const PosStep& last = eps.steps.back();
      if (rule_fingerprint(last.rule) == rule_fingerprint(p.branch_rule) &&
          label_in_universe(p.branch_rule, last.label))
        return true;
    }
  }
  return false;
}

namespace {
bool has_neg_mu_subformula(const Formula& f, const Formula& mu_tag) {
  const FNode& n = f.node();
  switch (n.kind) {
    case FKind::PrAtom:
    case FKind::SetAtom: return false;
    case FKind::MuAtom: return has_neg_mu_subformula(n.body, mu_tag);
    case FKind::Neg: {
      if (n.body.kind() == FKind::MuAtom) {
        const FNode& m = n.body.node();
        MuExpr a{m.mu_x, m.mu_X, m.body};
        MuExpr b = mu_expr_of(mu_tag);
        if (mu_expr_eq(a, b)) return true;
      }
      return has_neg_mu_subformula(n.body, mu_tag);
    }
    case FKind::And:
    case FKind::Or:
      return has_neg_mu_subformula(n.left, mu_tag) || has_neg_mu_subformula(n.right, mu_tag);
    case FKind::Forall:
    case FKind::Exists: return has_neg_mu_subformula(n.body, mu_tag);
    case FKind::Bracket: {
      for (auto& g : n.theta)
        if (has_neg_mu_subformula(g, mu_tag)) return true;
      return false;
    }
  }
  return false;
}
}  // namespace

bool declared_licenses_mu_var(const WideSequent& w, const Formula& mu_tag) {
  for (auto& f : w.explicit_part)
    if (has_neg_mu_subformula(f, mu_tag)) return true;
  for (auto& p : w.patterns)
    for (auto& f : p.theta_min)
      if (has_neg_mu_subformula(f, mu_tag)) return true;
  return false;
}

namespace {

struct PathEntry {
  Position pos;
  ord::OTerm bound;
};

void check_node_vars(const Position& pos, const NodeRef& node, const ord::OTerm& b, Report& rep) {
  std::vector<ord::OTerm> pvs, mvs;
  collect_pos_vars(b, pvs);
  collect_mu_vars(b, mvs);
  for (auto& v : pvs) {
    if (!declared_licenses_pos_var(node->declared, v->pos_tag, v->pos_eps))
      rep.add(pos, "position variable " + ord::print_ord(v) + " has no licensing bracket");
  }
  for (auto& v : mvs) {
    if (!declared_licenses_mu_var(node->declared, v->mu_tag))
      rep.add(pos, "mu-variable " + ord::print_ord(v) + " has no negated-mu subformula");
  }
}

}  // namespace

Report check_bound(const BoundedProofTree& b, const ExploreConfig& cfg, int deep_distance) {
  Report rep;
  if (!b.tree.root()->bound) {
    rep.add(Position{}, "root has no annotation");
    return rep;
  }
  if (!ord::lleq(b.level, b.base, *b.tree.root()->bound, b.claimed))
    rep.add(Position{}, "root annotation " + ord::print_ord(*b.tree.root()->bound) +
                            " is not ll-below the claimed bound " + ord::print_ord(b.claimed));

  struct Item {
    Position pos;
    NodeRef node;
    std::vector<PathEntry> ancestors;  // nearest first, up to deep_distance
  };
  std::deque<Item> queue;
  queue.push_back({Position{}, b.tree.root(), {}});
  while (!queue.empty() && rep.explored < cfg.max_nodes) {
    Item it = queue.front();
    queue.pop_front();
    rep.explored++;
    if (!it.node->bound) {
      rep.add(it.pos, "missing annotation");
      continue;
    }
    const ord::OTerm& here = *it.node->bound;
    check_node_vars(it.pos, it.node, here, rep);
    for (auto& anc : it.ancestors) {
      if (!ord::ll(b.level, b.base, here, anc.bound)) {
        rep.add(it.pos, "no strict ll-decrease: " + ord::print_ord(here) + " vs ancestor " +
                            ord::print_ord(anc.bound) + " at " + print_position(anc.pos));
        break;
      }
    }
    if (static_cast<int>(it.pos.size()) >= cfg.depth) continue;
    std::vector<PathEntry> anc2;
    anc2.push_back({it.pos, here});
    for (auto& a : it.ancestors) {
      if (static_cast<int>(anc2.size()) >= deep_distance) break;
      anc2.push_back(a);
    }
    for (auto& l : explore_labels(it.node->rule, cfg)) {
      NodeRef child;
      try {
        child = it.node->expand(l);
      } catch (const KernelError& e) {
        rep.add(it.pos, std::string("expansion failed: ") + e.what());
        continue;
      }
      queue.push_back({it.pos.extended(it.node->rule, l), child, anc2});
    }
  }
  return rep;
}

void bound_edge_records(const BoundedProofTree& b, const ExploreConfig& cfg,
                        const std::function<void(const EdgeRecord&)>& emit) {
  explore(b.tree, cfg, [&](const TraceRecord& rec) {
    if (static_cast<int>(rec.pos.size()) >= cfg.depth) return;
    if (!rec.node->bound) return;
    for (auto& l : explore_labels(rec.node->rule, cfg)) {
      NodeRef child = rec.node->expand(l);
      if (!child->bound) continue;
      EdgeRecord er{rec.pos, rec.pos.extended(rec.node->rule, l), *rec.node->bound, *child->bound,
                    ord::ll(b.level, b.base, *child->bound, *rec.node->bound)};
      emit(er);
    }
  });
}

std::string edge_record_line(const EdgeRecord& rec) {
  std::vector<Sexpr> xs{Sexpr::sym("edge"),
                        Sexpr::list({Sexpr::sym("parent"), position_to_sexpr(rec.parent)}),
                        Sexpr::list({Sexpr::sym("child"), position_to_sexpr(rec.child)}),
                        Sexpr::list({Sexpr::sym("pbound"), ord::term_to_sexpr(rec.parent_bound)}),
                        Sexpr::list({Sexpr::sym("cbound"), ord::term_to_sexpr(rec.child_bound)}),
                        Sexpr::sym(rec.ok ? "ok" : "fail")};
  return print_sexpr(Sexpr::list(std::move(xs)));
}

std::pair<ord::OTerm, ord::OTerm> bound_of_apply(const ord::OTerm& alpha_f,
                                                 const ord::OTerm& beta_d,
                                                 const ord::OTerm& gamma, const Formula& tag) {
  if (ord::has_vars(beta_d))
    throw KernelError("bound_of_apply: beta must be closed, got " + ord::print_ord(beta_d));
  ord::OTerm composed =
      ord::substitute_vars(alpha_f, [&](const ord::TNode& v) -> std::optional<ord::OTerm> {
        if (v.kind == ord::TKind::PosVar && v.pos_tag == tag && v.pos_eps.empty()) return beta_d;
        return std::nullopt;
      });
  ord::OTerm base = ord::leq(gamma, beta_d) ? beta_d : gamma;
  return {composed, base};
}

}  // namespace mu
