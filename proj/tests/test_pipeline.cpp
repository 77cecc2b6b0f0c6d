#include <doctest.h>

#include "corpus_builders.hpp"
#include "mu/bound.hpp"
#include "mu/pipeline.hpp"
#include "testutil.hpp"

using namespace mu;

static Formula F(const std::string& s) { return parse_formula(s); }

static FinDed even4_ded() { return corpus::even4_ded(); }

TEST_CASE("identity tree: coherence and the lemma bound") {
  PipelineConfig cfg;
  BoundedProofTree id = identity_tree(testutil::even_expr_atom(2), cfg);
  ExploreConfig ec;
  ec.depth = 20;
  Report c = check_local_coherence(id.tree, ec);
  INFO(c.summary());
  CHECK(c.ok);
  Report b = check_bound(id, ec);
  INFO(b.summary());
  CHECK(b.ok);
  CHECK(ord::eq_term(id.claimed, ord::mk_cardinal(1)));
}

TEST_CASE("axiom tree: coherence, bound, endsequent") {
  PipelineConfig cfg;
  ExploreConfig ec;
  ec.depth = 12;
  for (auto& s : {"(and (= 0 0) (not (= 0 (S 0))))", "(forall x (or (= x 0) (not (= x 0))))",
                  "(or (= 0 (S 0)) (= 0 0))"}) {
    Formula phi = F(s);
    BoundedProofTree ax = axiom_tree(phi, cfg);
    Report c = check_local_coherence(ax.tree, ec);
    INFO(s, ": ", c.summary());
    CHECK(c.ok);
    Report b = check_bound(ax, ec);
    INFO(s, ": ", b.summary());
    CHECK(b.ok);
    WideSequent want{Sequent{phi, negate(phi)}};
    CHECK(ax.tree.root()->declared.subset_of(want));
  }
  // mu-literal case routes through the identity tree
  BoundedProofTree ax = axiom_tree(testutil::even_expr_atom(2), cfg);
  CHECK(ax.tree.root()->rule->name == RuleName::OmegaFlat);
}

TEST_CASE("substitution function: conclusion, coherence, bound") {
  PipelineConfig cfg;
  Formula even2 = testutil::even_expr_atom(2);
  Formula psi = testutil::psi_zero_or_succ();
  LocalFunction sub = subst_function(even2, psi, "y", cfg);
  // conclusion: [n in mu]^{., <>}, psi(n), exists y (phi(y, psi) & ~psi(y))
  Formula psi2 = subst_term(psi, "y", mk_num(2));
  CHECK(sub.carrier.root()->declared.contains(psi2));
  CHECK(sub.carrier.root()->declared.contains(mk_bracket({even2}, even2, Position{})));
  ExploreConfig ec;
  ec.depth = 20;
  ec.max_nodes = 20000;
  Report c = check_local_coherence(sub.carrier, ec);
  INFO(c.summary());
  CHECK(c.ok);
  Report v = validate_local_function(sub, ec);
  INFO(v.summary());
  CHECK(v.ok);
  BoundedProofTree bt;
  bt.tree = sub.carrier;
  bt.level = 1;
  bt.base = ord::zero();
  bt.claimed = subst_claimed_bound(even2, psi, "y", cfg);
  Report b = check_bound(bt, ec);
  INFO(b.summary());
  CHECK(b.ok);
}

TEST_CASE("embedding the even4 proof") {
  PipelineConfig cfg;
  FinDed d = even4_ded();
  FinCheck fc = check_finitary(d, Theory::finitary(1, 1));
  INFO((fc.ok ? std::string("ok") : fc.errors.front()));
  CHECK(fc.ok);
  CHECK(fc.has_cut);
  CHECK(fc.max_cut_rank == 0);
  EmbedResult er = embed(d, {}, cfg);
  CHECK(er.cut_ceiling == 1);
  ExploreConfig ec;
  ec.depth = 14;
  Report c = check_local_coherence(er.tree.tree, ec);
  INFO(c.summary());
  CHECK(c.ok);
  Report b = check_bound(er.tree, ec);
  INFO(b.summary());
  CHECK(b.ok);
  Report t = check_theory_membership(er.tree.tree, ec);
  INFO(t.summary());
  CHECK(t.ok);
}

TEST_CASE("embedding Ind-arith produces the cut-free stack") {
  PipelineConfig cfg;
  Formula all = F("(forall x (< x (S x)))");
  FinDed d = fin_make(rule_ind_arith(mk_num(2), all), {});
  EmbedResult er = embed(d, {}, cfg);
  CHECK(er.cut_ceiling == 0);
  ExploreConfig ec;
  ec.depth = 20;
  Report c = check_local_coherence(er.tree.tree, ec);
  INFO(c.summary());
  CHECK(c.ok);
  Report b = check_bound(er.tree, ec);
  INFO(b.summary());
  CHECK(b.ok);
  // no Cut anywhere in the explored prefix
  bool saw_cut = false;
  explore(er.tree.tree, ec,
          [&](const TraceRecord& rec) { saw_cut = saw_cut || rec.node->rule->name == RuleName::Cut; });
  CHECK(!saw_cut);
}

TEST_CASE("reduce removes rank-0 cuts") {
  PipelineConfig cfg;
  EmbedResult er = embed(even4_ded(), {}, cfg);
  BoundedProofTree red = reduce(er.tree, 0, cfg);
  ExploreConfig ec;
  ec.depth = 16;
  bool saw_cut = false;
  explore(red.tree, ec, [&](const TraceRecord& rec) {
    if (rec.node->rule->name == RuleName::Cut && rank(rec.node->rule->formulas[0]) >= 0)
      saw_cut = true;
  });
  CHECK(!saw_cut);
  Report c = check_local_coherence(red.tree, ec);
  INFO(c.summary());
  CHECK(c.ok);
  Report b = check_bound(red, ec);
  INFO(b.summary());
  CHECK(b.ok);
}

TEST_CASE("collapse discharges CutOmegaFlat and the full ID1 pipeline runs") {
  PipelineConfig cfg;
  PipelineRun run = full_pipeline(even4_ded(), cfg);
  REQUIRE(run.stages.size() >= 3);
  const BoundedProofTree& fin = run.final_tree();
  ExploreConfig ec;
  ec.depth = 30;
  Theory pos = cfg.positive_theory(1);
  bool clean = true;
  explore(fin.tree, ec, [&](const TraceRecord& rec) {
    switch (rec.node->rule->name) {
      case RuleName::Cut:
      case RuleName::CutOmegaFlat:
      case RuleName::OmegaFlat:
      case RuleName::Read: clean = false; break;
      default: break;
    }
  });
  CHECK(clean);
  Report c = check_local_coherence(fin.tree, ec);
  INFO(c.summary());
  CHECK(c.ok);
  Report b = check_bound(fin, ec);
  INFO(b.summary());
  CHECK(b.ok);
  (void)pos;
}
