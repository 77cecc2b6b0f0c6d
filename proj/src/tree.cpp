#include "mu/tree.hpp"

#include <deque>

#include "mu/registry.hpp"

namespace mu {

NodeRef make_node(Rule rule, WideSequent declared, std::optional<ord::OTerm> bound,
                  std::function<NodeRef(const BranchLabel&)> expand) {
  auto n = std::make_shared<TreeNode>();
  n->rule = std::move(rule);
  n->declared = std::move(declared);
  n->bound = std::move(bound);
  n->expand = std::move(expand);
  return n;
}

NodeRef make_leaf(Rule rule, WideSequent declared, std::optional<ord::OTerm> bound) {
  return make_node(std::move(rule), std::move(declared), std::move(bound),
                   [](const BranchLabel& l) -> NodeRef {
                     throw ExpandError("axiom node has no premise " + print_label(l));
                   });
}

NodeRef ProofTree::at(const Position& pos) const {
  if (!root_) throw KernelError("empty proof tree");
  if (pos.empty()) return root_;
  uint64_t h = position_hash(pos);
  {
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto it = memo_->map.find(h);
    if (it != memo_->map.end()) {
      for (auto& [p, n] : it->second)
        if (position_eq(p, pos)) return n;
    }
  }
  // Walk from the deepest memoized prefix.
  NodeRef cur = root_;
  size_t start = 0;
  {
    std::lock_guard<std::mutex> lock(memo_->mu);
    for (size_t k = pos.size(); k-- > 1;) {
      Position prefix;
      prefix.steps.assign(pos.steps.begin(), pos.steps.begin() + k);
      auto it = memo_->map.find(position_hash(prefix));
      if (it == memo_->map.end()) continue;
      for (auto& [p, n] : it->second) {
        if (position_eq(p, prefix)) {
          cur = n;
          start = k;
          break;
        }
      }
      if (start == k) break;
    }
  }
  for (size_t i = start; i < pos.size(); i++) {
    const PosStep& step = pos.steps[i];
    if (rule_fingerprint(cur->rule) != rule_fingerprint(step.rule))
      throw KernelError("inconsistent position: step rule does not match tree rule at depth " +
                        std::to_string(i));
    cur = cur->expand(step.label);
    if (!cur) throw KernelError("generator returned no node");
  }
  {
    std::lock_guard<std::mutex> lock(memo_->mu);
    memo_->map[h].push_back({pos, cur});
  }
  return cur;
}

ProofTree ProofTree::subtree(const Position& pos) const { return ProofTree(at(pos), theory_); }

// ---------------------------------------------------------------------------
// Exploration
// ---------------------------------------------------------------------------

std::vector<BranchLabel> default_read_probes(const Rule& read) {
  std::vector<BranchLabel> out;
  const Theory& th = read->read_theory;
  auto push_if_member = [&](const Rule& r) {
    if (th.contains(r)) out.push_back(BranchLabel{r});
  };
  push_if_member(rule_rep());
  push_if_member(rule_true(parse_formula("(= 0 0)")));
  std::vector<BranchLabel> intros;
  auto push_intro = [&](const Rule& r) {
    if (th.contains(r)) intros.push_back(BranchLabel{r});
  };
  Sequent pool = read->theta;
  pool.insert(read->read_tag);
  for (auto& f : pool) {
    try {
      switch (f.kind()) {
        case FKind::MuAtom: push_intro(rule_cl(f)); break;
        case FKind::And: push_intro(rule_and_i(f)); break;
        case FKind::Or:
          push_intro(rule_or_il(f));
          push_intro(rule_or_ir(f));
          break;
        case FKind::Forall: push_intro(rule_omega(f)); break;
        case FKind::Exists: push_intro(rule_ex_i(mk_zero(), f)); break;
        default: break;
      }
    } catch (const KernelError&) {
      // formulas whose introduction rule is malformed here are just skipped
    }
  }
  // keep the branching bounded; rotate by theta so deeper reads still see
  // varied introductions
  const size_t cap = 4;
  size_t start = intros.size() ? read->theta.hash() % intros.size() : 0;
  for (size_t i = 0; i < intros.size() && i < cap; i++)
    out.push_back(intros[(start + i) % intros.size()]);
  return out;
}

std::vector<BranchLabel> explore_labels(const Rule& r, const ExploreConfig& cfg) {
  switch (r->arity) {
    case PremiseArity::None:
    case PremiseArity::Single:
    case PremiseArity::PairLR:
    case PremiseArity::PairTopBot:
    case PremiseArity::BotOnly: return finite_labels(r);
    case PremiseArity::Naturals: {
      std::vector<BranchLabel> out;
      for (uint64_t n = 0; n <= cfg.omega_width; n++) out.push_back(BranchLabel{n});
      return out;
    }
    case PremiseArity::ReadBranches: {
      std::vector<BranchLabel> out =
          cfg.read_sampler ? cfg.read_sampler(r) : default_read_probes(r);
      for (auto& f : r->formula_premises) out.push_back(BranchLabel{f});
      return out;
    }
  }
  return {};
}

std::string Report::summary() const {
  if (ok) return "ok (" + std::to_string(explored) + " nodes)";
  std::string s = std::to_string(violations.size()) + " violation(s); first: " +
                  violations.front().what + " at " + print_position(violations.front().pos);
  return s;
}

void explore(const ProofTree& d, const ExploreConfig& cfg,
             const std::function<void(const TraceRecord&)>& visit) {
  std::deque<std::pair<Position, NodeRef>> queue;
  queue.push_back({Position{}, d.root()});
  size_t seen = 0;
  while (!queue.empty()) {
    auto [pos, node] = queue.front();
    queue.pop_front();
    if (++seen > cfg.max_nodes) break;
    visit(TraceRecord{pos, node});
    if (static_cast<int>(pos.size()) >= cfg.depth) continue;
    for (auto& l : explore_labels(node->rule, cfg)) {
      NodeRef child;
      try {
        child = node->expand(l);
      } catch (const ExpandError&) {
        continue;  // partial branches are skipped; coherence checks report them
      }
      queue.push_back({pos.extended(node->rule, l), child});
    }
  }
}

Report check_local_coherence(const ProofTree& d, const ExploreConfig& cfg) {
  Report rep;
  std::deque<std::pair<Position, NodeRef>> queue;
  queue.push_back({Position{}, d.root()});
  while (!queue.empty() && rep.explored < cfg.max_nodes) {
    auto [pos, node] = queue.front();
    queue.pop_front();
    rep.explored++;
    for (auto& f : node->rule->conclusion) {
      if (!node->declared.contains(f)) {
        rep.add(pos, "declared sequent misses rule conclusion formula " + print_formula(f));
        break;
      }
    }
    if (static_cast<int>(pos.size()) >= cfg.depth) continue;
    for (auto& l : explore_labels(node->rule, cfg)) {
      NodeRef child;
      try {
        child = node->expand(l);
      } catch (const KernelError& e) {
        rep.add(pos, std::string("expansion failed at ") + print_label(l) + ": " + e.what());
        continue;
      }
      WideSequent allowed = node->declared.set_union(rule_premise(node->rule, l));
      bool inside = true;
      std::string what = "child formula outside parent scope";
      if (cfg.lenient_brackets) {
        for (auto& f : child->declared.explicit_part) {
          if (f.kind() == FKind::Bracket) continue;
          if (!allowed.contains(f)) {
            inside = false;
            what = "child formula outside parent scope: " + print_formula(f);
            break;
          }
        }
      } else if (!child->declared.subset_of(allowed)) {
        inside = false;
        what = "child pattern outside parent scope";
        for (auto& f : child->declared.explicit_part) {
          if (!allowed.contains(f)) {
            what = "child formula outside parent scope: " + print_formula(f);
            break;
          }
        }
      }
      if (!inside) rep.add(pos.extended(node->rule, l), what);
      queue.push_back({pos.extended(node->rule, l), child});
    }
  }
  return rep;
}

Report check_eigenvariables(const ProofTree& d, const ExploreConfig& cfg) {
  Report rep;
  explore(d, cfg, [&](const TraceRecord& rec) {
    if (rec.node->rule->name != RuleName::AllI) return;
    const Name& y = rec.node->rule->var;
    for (auto& l : explore_labels(rec.node->rule, cfg)) {
      NodeRef child = rec.node->expand(l);
      Sequent premise = rule_premise(rec.node->rule, l).explicit_part;
      for (auto& f : child->declared.explicit_part) {
        if (premise.contains(f)) continue;  // the premise formula itself may use y
        if (free_vars(f).first.count(y))
          rep.add(rec.pos, "eigenvariable " + y + " free in side formula " + print_formula(f));
      }
    }
    rep.explored++;
  });
  return rep;
}

Report check_theory_membership(const ProofTree& d, const ExploreConfig& cfg) {
  Report rep;
  explore(d, cfg, [&](const TraceRecord& rec) {
    rep.explored++;
    if (!d.theory().contains(rec.node->rule))
      rep.add(rec.pos, std::string("rule outside theory: ") + print_rule(rec.node->rule));
  });
  return rep;
}

// ---------------------------------------------------------------------------
// Exact endsequent / well-foundedness
// ---------------------------------------------------------------------------

namespace {

bool gamma_rec(const NodeRef& node, size_t& fuel, Sequent& out, std::string& note) {
  if (fuel == 0) {
    note = "fuel exhausted: possibly ill-founded";
    return false;
  }
  fuel--;
  switch (node->rule->arity) {
    case PremiseArity::Naturals:
    case PremiseArity::ReadBranches:
      note = "infinite premise family: possibly ill-founded";
      return false;
    default: break;
  }
  Sequent gamma = node->rule->conclusion;
  for (auto& l : finite_labels(node->rule)) {
    NodeRef child = node->expand(l);
    Sequent sub;
    if (!gamma_rec(child, fuel, sub, note)) return false;
    gamma = gamma.set_union(sub.set_minus(rule_premise(node->rule, l).explicit_part));
  }
  out = std::move(gamma);
  return true;
}

}  // namespace

GammaResult gamma_finite(const ProofTree& d, size_t fuel) {
  GammaResult r;
  r.exact = gamma_rec(d.root(), fuel, r.gamma, r.note);
  return r;
}

WfResult is_deduction(const ProofTree& d, size_t fuel) {
  WfResult r;
  std::function<bool(const NodeRef&)> rec = [&](const NodeRef& node) -> bool {
    if (r.expansions >= fuel) return false;
    r.expansions++;
    switch (node->rule->arity) {
      case PremiseArity::Naturals:
      case PremiseArity::ReadBranches:
        return false;  // cannot exhaust an infinite premise family
      default: break;
    }
    for (auto& l : finite_labels(node->rule)) {
      if (!rec(node->expand(l))) return false;
    }
    return true;
  };
  r.verdict = rec(d.root()) ? WfVerdict::WellFounded : WfVerdict::Unknown;
  return r;
}

ProofTree graft(Rule r, const std::vector<std::pair<BranchLabel, ProofTree>>& children,
                Theory theory) {
  std::vector<BranchLabel> expected;
  switch (r->arity) {
    case PremiseArity::Naturals:
    case PremiseArity::ReadBranches:
      throw KernelError("graft: cannot graft an infinite-premise rule");
    default: expected = finite_labels(r);
  }
  if (expected.size() != children.size())
    throw KernelError("graft: child count mismatch for " + std::string(rule_name_str(r->name)));
  for (auto& l : expected) {
    bool found = false;
    for (auto& [cl, ct] : children) found = found || label_eq(cl, l);
    if (!found) throw KernelError("graft: missing child " + print_label(l));
  }
  WideSequent declared{r->conclusion};
  for (auto& [l, t] : children) {
    WideSequent prem = rule_premise(r, l);
    for (auto& f : t.root()->declared.explicit_part)
      if (!prem.contains(f)) declared.insert(f);
    for (auto& p : t.root()->declared.patterns) declared.add_pattern(p);
  }
  auto kids = std::make_shared<std::vector<std::pair<BranchLabel, NodeRef>>>();
  for (auto& [l, t] : children) kids->push_back({l, t.root()});
  NodeRef root = make_node(r, std::move(declared), std::nullopt,
                           [kids](const BranchLabel& l) -> NodeRef {
                             for (auto& [cl, n] : *kids)
                               if (label_eq(cl, l)) return n;
                             throw ExpandError("graft: no child at " + print_label(l));
                           });
  return ProofTree(std::move(root), std::move(theory));
}

std::string trace_line(const TraceRecord& rec) {
  std::vector<Sexpr> xs{Sexpr::sym("trace"),
                        Sexpr::list({Sexpr::sym("path"), position_to_sexpr(rec.pos)}),
                        Sexpr::list({Sexpr::sym("rule"),
                                     Sexpr::sym(rule_name_str(rec.node->rule->name))})};
  std::vector<Sexpr> gamma{Sexpr::sym("gamma")};
  for (auto& f : rec.node->declared.explicit_part) gamma.push_back(formula_to_sexpr(f));
  xs.push_back(Sexpr::list(std::move(gamma)));
  if (rec.node->bound)
    xs.push_back(Sexpr::list({Sexpr::sym("bound"), ord::term_to_sexpr(*rec.node->bound)}));
  return print_sexpr(Sexpr::list(std::move(xs)));
}

}  // namespace mu
