#pragma once

#include "mu/bound.hpp"
#include "mu/finitary.hpp"
#include "mu/local.hpp"

namespace mu {

struct PipelineConfig {
  bool id1 = true;  // single-level section-4 mode; false = the ID_{<omega} hierarchy
  int c0 = 1;       // window size (>= 2 in hierarchy mode)

  Theory embed_theory(int cut_ceiling) const;
  Theory cutfree_theory(int level) const;   // ID^inf_{level,<0}
  Theory positive_theory(int level) const;  // ID^{inf,+}
};

// Base used for pre-collapse annotations: 0 at levels <= 1, the sum of the
// lower cardinals at higher levels (the lower-level identity material inside
// formula-premise branches needs a K-dominator).
ord::OTerm base_for_level(int level);

// Lemma thm:identity. The mu-atom fixes both the expression and the numeral.
BoundedProofTree identity_tree(const Formula& mu_atom, const PipelineConfig& cfg);

// Lemma thm:ax.
BoundedProofTree axiom_tree(const Formula& phi, const PipelineConfig& cfg);

// Lemma thm:substitution / thm:substitution2. psi has the single free
// variable psi_var.
LocalFunction subst_function(const Formula& mu_atom, const Formula& psi, const Name& psi_var,
                             const PipelineConfig& cfg);
ord::OTerm subst_claimed_bound(const Formula& mu_atom, const Formula& psi, const Name& psi_var,
                               const PipelineConfig& cfg);

// Lemma thm:substitution3 (structural only; no ordinal annotations).
LocalFunction subst_function_nested(const Formula& mu_atom, const Formula& psi,
                                    const Name& psi_var, const PipelineConfig& cfg);

// Theorem thm:id1_embedding / thm:idomega_embedding.
struct EmbedResult {
  BoundedProofTree tree;
  int cut_ceiling = 0;
};
EmbedResult embed(const FinDed& d, const std::map<Name, uint64_t>& numerals,
                  const PipelineConfig& cfg);

// Inversions.
BoundedProofTree invert_and(const BoundedProofTree& d, const Formula& conj, bool left);
BoundedProofTree invert_all(const BoundedProofTree& d, const Formula& all, uint64_t m);

// Eliminations. d_and proves phiL ^ phiR side, d_or proves ~phiL v ~phiR side.
BoundedProofTree eliminate_or(const BoundedProofTree& d_or, const BoundedProofTree& d_and,
                              const Formula& conj);
BoundedProofTree eliminate_exists(const BoundedProofTree& d_ex, const BoundedProofTree& d_all,
                                  const Formula& all);
BoundedProofTree eliminate_mu(const BoundedProofTree& d_mu, const BoundedProofTree& d_neg,
                              const Formula& mu_atom, const PipelineConfig& cfg);

// The Reduce theorem: removes rank-n cuts.
BoundedProofTree reduce(const BoundedProofTree& d, uint64_t n, const PipelineConfig& cfg);

// Collapsing D at `level` (removes CutOmegaFlat of that level).
BoundedProofTree collapse(const BoundedProofTree& d, int level, const ord::OTerm& gamma,
                          const PipelineConfig& cfg);

struct PipelineStage {
  std::string name;
  BoundedProofTree tree;
};
struct PipelineRun {
  std::vector<PipelineStage> stages;
  const BoundedProofTree& final_tree() const { return stages.back().tree; }
};
PipelineRun full_pipeline(const FinDed& d, const PipelineConfig& cfg);

}  // namespace mu
