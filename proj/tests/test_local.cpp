#include <doctest.h>

#include "mu/local.hpp"
#include "mu/pipeline.hpp"
#include "testutil.hpp"

using namespace mu;

static Formula F(const std::string& s) { return parse_formula(s); }

namespace {

// The identity function's carrier (the subtree of the identity tree under the
// Omega-flat root) as a LocalFunction.
LocalFunction identity_function(const Formula& atom, const PipelineConfig& cfg) {
  BoundedProofTree id = identity_tree(atom, cfg);
  LocalFunction F;
  F.carrier = ProofTree(id.tree.root()->expand(LabelBot{}), id.tree.theory());
  F.phi_F = atom;
  F.source = id.tree.theory().reading_theory_for_tag(id.level);
  F.target = id.tree.theory();
  return F;
}

// A concrete finite proof of 2 in even in the positive theory.
ProofTree even2_proof(const Theory& th) {
  Formula even2 = testutil::even_expr_atom(2);
  Formula even0 = testutil::even_expr_atom(0);
  Formula body2 = rule_premise(rule_cl(even2), LabelTop{}).explicit_part.items()[0];
  Formula body0 = rule_premise(rule_cl(even0), LabelTop{}).explicit_part.items()[0];
  const FNode& b2 = body2.node();  // (or (= 2 0) (exists y ...))
  ProofTree t00 = ProofTree(
      make_leaf(rule_true(F("(= 0 0)")), WideSequent{Sequent{F("(= 0 0)")}}, ord::nat(1)), th);
  ProofTree or0 = graft(rule_or_il(body0), {{LabelTop{}, t00}}, th);
  ProofTree cl0 = graft(rule_cl(even0), {{LabelTop{}, or0}}, th);
  // exists y (2 = S S y and X y): witness 0
  Formula ex = b2.right;
  Formula inst = rule_premise(rule_ex_i(mk_zero(), ex), LabelTop{}).explicit_part.items()[0];
  ProofTree teq = ProofTree(
      make_leaf(rule_true(inst.node().left), WideSequent{Sequent{inst.node().left}}, ord::nat(1)),
      th);
  ProofTree andi = graft(rule_and_i(inst), {{LabelL{}, teq}, {LabelR{}, cl0}}, th);
  ProofTree exi = graft(rule_ex_i(mk_zero(), ex), {{LabelTop{}, andi}}, th);
  ProofTree orr = graft(rule_or_ir(body2), {{LabelTop{}, exi}}, th);
  return graft(rule_cl(even2), {{LabelTop{}, orr}}, th);
}

}  // namespace

TEST_CASE("validate_local_function") {
  PipelineConfig cfg;
  Formula even2 = testutil::even_expr_atom(2);
  LocalFunction id = identity_function(even2, cfg);
  ExploreConfig ec;
  ec.depth = 6;
  CHECK(validate_local_function(id, ec).ok);

  // a carrier whose root declares a bracket at a nonempty position fails
  Rule rd = rule_read(id.source, Sequent{even2}, even2, Position{});
  Position bad = Position{}.extended(rule_rep(), LabelTop{});
  WideSequent decl;
  decl.insert(mk_bracket({even2}, even2, bad));
  for (auto& f : rd->conclusion) decl.insert(f);
  LocalFunction broken = id;
  broken.carrier = ProofTree(make_leaf(rd, decl, std::nullopt), id.target);
  CHECK(!validate_local_function(broken, ec).ok);
}

TEST_CASE("upsilon follows the read chain") {
  PipelineConfig cfg;
  LocalFunction id = identity_function(testutil::even_expr_atom(2), cfg);
  ExploreConfig ec;
  ec.depth = 4;
  auto ups = upsilon(id, ec);
  REQUIRE(!ups.empty());
  CHECK(ups[0].empty());  // the root read is at <>
  CHECK(ups.size() > 1);  // extensions appear along the chain
}

TEST_CASE("apply the identity function to a concrete proof") {
  PipelineConfig cfg;
  Formula even2 = testutil::even_expr_atom(2);
  LocalFunction id = identity_function(even2, cfg);
  ProofTree d = even2_proof(id.source);
  ProofTree out = apply(id, d);
  // bar F(d)(<>) = Rep at a Read node
  CHECK(out.root()->rule->name == RuleName::Rep);
  ExploreConfig ec;
  ec.depth = 12;
  Report rep = check_local_coherence(out, ec);
  INFO(rep.summary());
  CHECK(rep.ok);
  // endsequent containment: declared(apply) within (Gamma(F) \ bracket) u (Gamma(d) \ phi_F)
  WideSequent bound = id.carrier.root()->declared;
  WideSequent b2;
  for (auto& f : bound.explicit_part)
    if (!(f.kind() == FKind::Bracket && f.node().tag == even2)) b2.insert(f);
  for (auto& f : d.root()->declared.explicit_part)
    if (!(f == even2)) b2.insert(f);
  CHECK(out.root()->declared.subset_of(b2));
  // the applied tree stays in the target theory on the explored prefix
  Report threp = check_theory_membership(out, ec);
  INFO(threp.summary());
  CHECK(threp.ok);
}

TEST_CASE("apply without lift rejects out-of-theory inputs") {
  PipelineConfig cfg;
  Formula even2 = testutil::even_expr_atom(2);
  LocalFunction id = identity_function(even2, cfg);
  // an input whose root is a Cut (not in the positive reading theory)
  Theory inf = Theory::inf(1, 1, true);
  ProofTree d = even2_proof(id.source);
  ProofTree bad = graft(rule_cut(F("(= 0 0)")),
                        {{LabelL{}, ProofTree(make_leaf(rule_true(F("(= 0 0)")),
                                                        WideSequent{Sequent{F("(= 0 0)")}},
                                                        std::nullopt),
                                              inf)},
                         {LabelR{}, d}},
                        inf);
  // the root of bar F already inspects the input's root rule
  CHECK_THROWS_AS(apply(id, bad), ExpandError);
  // lifting accepts it: the unexpected Cut is copied identically
  LocalFunction lifted = lift(id, inf);
  ProofTree out2 = apply(lifted, bad);
  NodeRef n = out2.root();
  CHECK(n->rule->name == RuleName::Cut);
  // the reading continues on the cut's branches
  NodeRef c = n->expand(LabelR{});
  CHECK(c->rule->name == RuleName::Rep);
}

// Depth-2 fixed point: mu x X2 . (x not-in even or (x = 0 or exists y (x = S y and X2 y))).
// The inner (closed) fixed point occurs negatively, so the identity function's
// theta acquires a negated mu-literal along the Cl/OrIL chain.
static Formula outer2_atom(uint64_t n) {
  Formula inner1 = mk_mu_atom(mk_var("x"), "x", "X",
                              F("(or (= x 0) (exists y (and (= x (S (S y))) (X y))))"));
  Formula body = mk_or(mk_neg(inner1),
                       mk_or(F("(= x 0)"), F("(exists y (and (= x (S y)) (X2 y)))")));
  return mk_mu_atom(mk_num(n), "x", "X2", body);
}

TEST_CASE("lift converts a matching Omega-flat input into CutOmegaFlat") {
  PipelineConfig cfg;
  cfg.id1 = false;
  cfg.c0 = 2;
  Formula outer1 = outer2_atom(1);
  REQUIRE(level_of_depth(depth(outer1), 2).has_value());
  CHECK(*level_of_depth(depth(outer1), 2) == 2);

  LocalFunction idf = identity_function(outer1, cfg);
  // the input proves 1 in outer2 by Cl then OrIL, ending at Omega-flat for
  // the inner literal 1 not-in even
  Formula even1 = testutil::even_expr_atom(1);
  Theory big = Theory::inf(2, 2, false).restrict_cuts(0);
  BoundedProofTree inner_id = identity_tree(even1, cfg);
  ProofTree oflat =
      graft(rule_omega_flat(even1),
            {{LabelBot{}, ProofTree(inner_id.tree.root()->expand(LabelBot{}), big)}}, big);
  Formula body1 = rule_premise(rule_cl(outer1), LabelTop{}).explicit_part.items()[0];
  ProofTree oril = graft(rule_or_il(body1), {{LabelTop{}, oflat}}, big);
  ProofTree d = graft(rule_cl(outer1), {{LabelTop{}, oril}}, big);

  LocalFunction lifted = lift(idf, big);
  ProofTree out = apply(lifted, d);
  // explore the output: a CutOmegaFlat for the inner literal must appear
  ExploreConfig ec;
  ec.depth = 8;
  ec.lenient_brackets = true;  // the lifting lemma only covers the L_mu part
  bool saw_cutoflat = false;
  explore(out, ec, [&](const TraceRecord& rec) {
    if (rec.node->rule->name == RuleName::CutOmegaFlat) saw_cutoflat = true;
  });
  CHECK(saw_cutoflat);
  Report rep = check_local_coherence(out, ec);
  INFO(rep.summary());
  CHECK(rep.ok);
}

TEST_CASE("rule-for-rule conservativity") {
  PipelineConfig cfg;
  Formula even2 = testutil::even_expr_atom(2);
  LocalFunction id = identity_function(even2, cfg);
  ExploreConfig ec;
  ec.depth = 4;
  // T* = T: trivially conservative
  auto rep = is_rule_for_rule_conservative(id.source, id.source, id, ec);
  CHECK(rep.verdict == Conservativity::Pass);
  // the full ID1 theory only adds empty-conclusion rules over this function
  auto rep2 = is_rule_for_rule_conservative(Theory::inf(1, 1, true), id.source, id, ec);
  CHECK(rep2.verdict == Conservativity::Pass);
}
