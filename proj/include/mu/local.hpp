#pragma once

#include "mu/tree.hpp"

namespace mu {

// A locally defined function: a proof tree over the target theory extended by
// Read rules for phi_F over the source theory.
struct LocalFunction {
  ProofTree carrier;
  Formula phi_F;  // n in mu x X . phi
  Theory source;
  Theory target;
  std::optional<Theory> lift_to;  // engaged after lifting

  bool owns_read(const Rule& r) const {
    return r->name == RuleName::Read && r->read_tag == phi_F && r->read_theory == source;
  }
};

Report validate_local_function(const LocalFunction& F, const ExploreConfig& cfg);

std::vector<Position> upsilon(const LocalFunction& F, const ExploreConfig& cfg);

// bar F(d); when F.lift_to is engaged the five-case lifted reading is used.
ProofTree apply(const LocalFunction& F, const ProofTree& d);

LocalFunction lift(const LocalFunction& F, const Theory& t_star);

enum class Conservativity { Pass, Violation, Unknown };
struct ConservativityReport {
  Conservativity verdict = Conservativity::Pass;
  std::string detail;
};
ConservativityReport is_rule_for_rule_conservative(const Theory& t_star, const Theory& t,
                                                   const LocalFunction& F,
                                                   const ExploreConfig& cfg);

}  // namespace mu
