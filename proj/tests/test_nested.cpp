#include <doctest.h>

#include "mu/local.hpp"
#include "mu/pipeline.hpp"
#include "nested_walk.hpp"
#include "testutil.hpp"

using namespace mu;

static Formula F(const std::string& s) { return parse_formula(s); }

namespace {

// mu x X . ((x not-in mu w W.(w = 0 or (not (X w) or W w))) or x = 0): the
// inner fixed point carries X negatively and occurs negatively in the body,
// so the expression has depth W.
Formula nested_atom(uint64_t n) {
  Formula inner_body = F("(or (= w 0) (or (not (X w)) (W w)))");
  Formula inner = mk_mu_atom(mk_var("x"), "w", "W", inner_body);
  Formula body = mk_or(mk_neg(inner), F("(= x 0)"));
  return mk_mu_atom(mk_num(n), "x", "X", body);
}

}  // namespace

TEST_CASE("the handcrafted nested expression has depth W") {
  Formula a = nested_atom(0);
  DepthExpr d = depth(a);
  CHECK(d.degree() == 1);
  CHECK(d.coeff[1] == 1);
  CHECK(d.coeff[0] == 0);
  auto lv = level_of_depth(d, 2);
  REQUIRE(lv.has_value());
  CHECK(*lv == kLevelOmega);
}

TEST_CASE("nested substitution: conclusion shape and no annotations") {
  PipelineConfig cfg;
  cfg.id1 = false;
  cfg.c0 = 2;
  Formula atom = nested_atom(0);
  Formula psi = testutil::psi_zero_or_succ();
  LocalFunction sub = subst_function_nested(atom, psi, "y", cfg);
  CHECK(!sub.carrier.root()->bound.has_value());  // W-level bounds are out of scope
  CHECK(sub.carrier.root()->declared.contains(mk_bracket({atom}, atom, Position{})));
  CHECK(sub.carrier.root()->declared.contains(subst_term(psi, "y", mk_num(0))));
  ExploreConfig ec;
  ec.depth = 6;
  CHECK(validate_local_function(sub, ec).ok);
}

TEST_CASE("nested substitution: the four inner-read premise cases") {
  PipelineConfig cfg;
  cfg.id1 = false;
  cfg.c0 = 2;
  nested_walk::WalkResult r =
      nested_walk::run(nested_atom(0), testutil::psi_zero_or_succ(), "y", cfg);
  INFO(r.detail);
  CHECK(r.oflat_replaced);
  CHECK(r.case_a);
  CHECK(r.case_b);
  CHECK(r.case_c);
  CHECK(r.case_d);
  CHECK(r.ok);
}

TEST_CASE("nested substitution: local coherence on a guided prefix") {
  PipelineConfig cfg;
  cfg.id1 = false;
  cfg.c0 = 2;
  Formula atom = nested_atom(0);
  LocalFunction sub = subst_function_nested(atom, testutil::psi_zero_or_succ(), "y", cfg);
  ExploreConfig ec;
  ec.depth = 30;
  ec.max_nodes = 4000;
  Report rep = check_local_coherence(sub.carrier, ec);
  INFO(rep.summary());
  CHECK(rep.ok);
}
