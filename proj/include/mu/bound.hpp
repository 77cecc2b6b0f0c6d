#pragma once

#include "mu/tree.hpp"

namespace mu {

struct BoundedProofTree {
  ProofTree tree;
  int level = 1;                     // c of the ll-check
  ord::OTerm base;                   // gamma
  ord::OTerm claimed;                // root bound
};

// Ordinal-bound verification over the explored prefix:
//   (i) strict <<^c_gamma decrease along every edge (plus ancestor pairs up
//       to deep_distance apart),
//   (ii) free position variables licensed by a bracket in the declared
//        sequent,
//   (iii) mu-variables licensed by a negated mu-literal subformula.
Report check_bound(const BoundedProofTree& b, const ExploreConfig& cfg, int deep_distance = 1);

// Per-edge record stream for the bound report format.
struct EdgeRecord {
  Position parent, child;
  ord::OTerm parent_bound, child_bound;
  bool ok;
};
void bound_edge_records(const BoundedProofTree& b, const ExploreConfig& cfg,
                        const std::function<void(const EdgeRecord&)>& emit);
std::string edge_record_line(const EdgeRecord& rec);

// Composition bound for bar F(d): (alpha_F with the root variable replaced by
// beta_d, max-base). beta_d must be closed.
std::pair<ord::OTerm, ord::OTerm> bound_of_apply(const ord::OTerm& alpha_f,
                                                 const ord::OTerm& beta_d,
                                                 const ord::OTerm& gamma, const Formula& tag);

// Helpers shared with tests.
void collect_pos_vars(const ord::OTerm& t, std::vector<ord::OTerm>& out);
void collect_mu_vars(const ord::OTerm& t, std::vector<ord::OTerm>& out);
bool declared_licenses_pos_var(const WideSequent& w, const Formula& tag, const Position& eps);
bool declared_licenses_mu_var(const WideSequent& w, const Formula& mu_tag);

}  // namespace mu
