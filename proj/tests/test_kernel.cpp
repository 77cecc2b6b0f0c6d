#include <doctest.h>

#include "mu/pipeline.hpp"
#include "mu/tree.hpp"
#include "testutil.hpp"

using namespace mu;

static Formula F(const std::string& s) { return parse_formula(s); }

static ProofTree leaf_tree(Rule r, Theory th) {
  WideSequent decl{r->conclusion};
  return ProofTree(make_leaf(std::move(r), std::move(decl), std::nullopt), th);
}

TEST_CASE("delta_of_position") {
  CHECK(delta_of_position(Position{}).empty());
  // Delta(eps.bot) for CutOmegaFlat = {[n in mu]^{n in mu, <>}}
  Formula even0 = testutil::even_expr_atom(0);
  Rule cof = rule_cut_omega_flat(even0);
  Position p = Position{}.extended(cof, LabelBot{});
  Sequent d = delta_of_position(p);
  REQUIRE(d.size() == 1);
  CHECK(d.items()[0] == mk_bracket({even0}, even0, Position{}));
  // Delta(eps.L) for Cut_phi = {phi}
  Rule cut = rule_cut(F("(= 0 0)"));
  Sequent dl = delta_of_position(Position{}.extended(cut, LabelL{}));
  CHECK(dl.contains(F("(= 0 0)")));
  CHECK(delta_of_position(Position{}.extended(cut, LabelR{})).contains(F("(not (= 0 0))")));
}

TEST_CASE("rule conclusions follow the displays") {
  Formula even0 = testutil::even_expr_atom(0);
  CHECK(rule_cut(F("(= 0 0)"))->conclusion.empty());
  CHECK(rule_omega_flat(even0)->conclusion.contains(mk_neg(even0)));
  Rule ind = rule_ind_mu(mk_num(4), testutil::even_expr_atom(4), "y", testutil::psi_zero_or_succ());
  CHECK(ind->conclusion.size() == 3);
  CHECK(ind->conclusion.contains(mk_neg(testutil::even_expr_atom(4))));
  // Ind-arith conclusion {~phi(0), exists x (phi & ~phi(Sx)), phi(t)}
  Rule ia = rule_ind_arith(mk_num(2), F("(forall x (< x (S x)))"));
  CHECK(ia->conclusion.size() == 3);
  CHECK(ia->conclusion.contains(F("(< (S (S 0)) (S (S (S 0))))")));
}

TEST_CASE("gamma_finite") {
  Theory th = Theory::inf_plus(1, 1, true);
  // single True node
  GammaResult g1 = gamma_finite(leaf_tree(rule_true(F("(= 0 0)")), th), 100);
  CHECK(g1.exact);
  CHECK(g1.gamma == Sequent{F("(= 0 0)")});

  // Cl(OrIL(True_{0=0})) proves 0 in even
  Formula even0 = testutil::even_expr_atom(0);
  Formula body = rule_premise(rule_cl(even0), LabelTop{}).explicit_part.items()[0];
  ProofTree t_true = leaf_tree(rule_true(F("(= 0 0)")), th);
  ProofTree t_or = graft(rule_or_il(body), {{LabelTop{}, t_true}}, th);
  ProofTree t_cl = graft(rule_cl(even0), {{LabelTop{}, t_or}}, th);
  GammaResult g2 = gamma_finite(t_cl, 100);
  CHECK(g2.exact);
  CHECK(g2.gamma == Sequent{even0});

  // Rep(True_eta) keeps eta
  ProofTree t_rep = graft(rule_rep(), {{LabelTop{}, t_true}}, th);
  GammaResult g3 = gamma_finite(t_rep, 100);
  CHECK(g3.exact);
  CHECK(g3.gamma == Sequent{F("(= 0 0)")});

  // fuel exhaustion reports inexactness
  GammaResult g4 = gamma_finite(t_cl, 1);
  CHECK(!g4.exact);
}

TEST_CASE("graft and subtree") {
  Theory th = Theory::inf_plus(1, 1, true);
  ProofTree t_true = leaf_tree(rule_true(F("(= 0 0)")), th);
  ProofTree t = graft(rule_rep(), {{LabelTop{}, t_true}}, th);
  // subtree(graft(R, {d}), top) = d
  Position p = Position{}.extended(rule_rep(), LabelTop{});
  CHECK(rule_eq(t.subtree(p).root()->rule, t_true.root()->rule));
  CHECK(rule_eq(t.subtree(Position{}).root()->rule, rule_rep()));
  // missing child rejected
  CHECK_THROWS_AS(graft(rule_and_i(F("(and (= 0 0) (= 0 0))")), {{LabelL{}, t_true}}, th),
                  KernelError);
}

TEST_CASE("local coherence catches bad declared sequents") {
  Theory th = Theory::inf_plus(1, 1, true);
  // node declaring Gamma = {} whose rule has Delta = {eta}
  NodeRef bad = make_leaf(rule_true(F("(= 0 0)")), WideSequent{}, std::nullopt);
  ExploreConfig ec;
  Report rep = check_local_coherence(ProofTree(bad, th), ec);
  CHECK(!rep.ok);

  // a finite tree with exact gammas passes
  Formula even0 = testutil::even_expr_atom(0);
  Formula body = rule_premise(rule_cl(even0), LabelTop{}).explicit_part.items()[0];
  ProofTree t_true = leaf_tree(rule_true(F("(= 0 0)")), th);
  ProofTree t_or = graft(rule_or_il(body), {{LabelTop{}, t_true}}, th);
  ProofTree t_cl = graft(rule_cl(even0), {{LabelTop{}, t_or}}, th);
  Report rep2 = check_local_coherence(t_cl, ec);
  CHECK(rep2.ok);
}

TEST_CASE("identity tree explores coherently and is unknown-well-founded") {
  PipelineConfig cfg;
  BoundedProofTree id = identity_tree(testutil::even_expr_atom(2), cfg);
  ExploreConfig ec;
  ec.depth = 10;
  Report rep = check_local_coherence(id.tree, ec);
  INFO(rep.summary());
  CHECK(rep.ok);
  // root is Omega-flat; its child is the Read for [ {n in even} ]^{.,<>}
  CHECK(id.tree.root()->rule->name == RuleName::OmegaFlat);
  NodeRef child = id.tree.root()->expand(LabelBot{});
  CHECK(child->rule->name == RuleName::Read);
  CHECK(child->rule->theta == Sequent{testutil::even_expr_atom(2)});
  CHECK(child->rule->eps.empty());
  // subtree at the bot position roots at the Read rule
  Position p = Position{}.extended(id.tree.root()->rule, LabelBot{});
  CHECK(id.tree.subtree(p).root()->rule->name == RuleName::Read);
  // infinite Read chain: within finite fuel the verdict stays unknown
  CHECK(is_deduction(id.tree, 2000).verdict == WfVerdict::Unknown);
  // finite trees are recognized
  Theory th = Theory::inf_plus(1, 1, true);
  ProofTree t_true = leaf_tree(rule_true(F("(= 0 0)")), th);
  CHECK(is_deduction(t_true, 100).verdict == WfVerdict::WellFounded);
}

TEST_CASE("eigenvariable check") {
  Theory th = Theory::finitary(1, 1);
  // forall I over Def(x = x): eigenvariable y absent from side formulas
  Formula all = F("(forall x (= x x))");
  Rule alli = rule_all_i("y", all);
  ProofTree prem = leaf_tree(rule_def(F("(= y y)")), th);
  ProofTree t = graft(alli, {{LabelTop{}, prem}}, th);
  ExploreConfig ec;
  CHECK(check_eigenvariables(t, ec).ok);
  // y free in a side formula of the premise's declared sequent
  NodeRef bad_prem = make_leaf(rule_def(F("(= y y)")),
                               WideSequent{Sequent{F("(= y y)"), F("(< y (S y))")}},
                               std::nullopt);
  std::vector<std::pair<BranchLabel, ProofTree>> kids{{LabelTop{}, ProofTree(bad_prem, th)}};
  ProofTree t2 = graft(alli, kids, th);
  CHECK(!check_eigenvariables(t2, ec).ok);
}

TEST_CASE("theory_restrict_cuts") {
  Theory id1inf = Theory::inf(1, 1, true);
  Rule cut0 = rule_cut(F("(= 0 0)"));
  CHECK(id1inf.restrict_cuts(1).contains(cut0));   // rank 0 < 1
  CHECK(!id1inf.restrict_cuts(0).contains(cut0));  // rank 0 < 0 fails
  // CutOmegaFlat is unaffected by the rank restriction
  Rule cof = rule_cut_omega_flat(testutil::even_expr_atom(0));
  CHECK(id1inf.restrict_cuts(0).contains(cof));
  // positive fragment has no cuts at all
  CHECK(!Theory::inf_plus(1, 1, true).contains(cut0));
  CHECK(Theory::inf_plus(1, 1, true).contains(rule_rep()));
}

TEST_CASE("certificate and trace serialization round-trips") {
  Formula even0 = testutil::even_expr_atom(0);
  Rule rd = rule_read(Theory::inf_plus(1, 1, true), Sequent{even0}, even0, Position{});
  std::string s = print_rule(rd);
  CHECK(print_rule(rule_from_sexpr(parse_sexpr(s))) == s);
  // positions with encoded-rule steps
  Position p = Position{}.extended(rule_omega(F("(forall x (= x x))")), uint64_t{3});
  std::string ps = print_position(p);
  CHECK(print_position(position_from_sexpr(parse_sexpr(ps))) == ps);
}
