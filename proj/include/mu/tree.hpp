#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mu/ordinal.hpp"
#include "mu/rule.hpp"
#include "mu/theory.hpp"

namespace mu {

struct ExpandError : KernelError {
  using KernelError::KernelError;
};

// A lazily unfolded proof-tree node. Generators are pure: expanding the same
// branch twice yields structurally equal nodes.
struct TreeNode;
using NodeRef = std::shared_ptr<const TreeNode>;

struct TreeNode {
  Rule rule;
  WideSequent declared;                 // declared Gamma at this node
  std::optional<ord::OTerm> bound;      // ordinal annotation, when produced
  std::function<NodeRef(const BranchLabel&)> expand;
};

NodeRef make_node(Rule rule, WideSequent declared, std::optional<ord::OTerm> bound,
                  std::function<NodeRef(const BranchLabel&)> expand);
NodeRef make_leaf(Rule rule, WideSequent declared, std::optional<ord::OTerm> bound);

class ProofTree {
 public:
  ProofTree() = default;
  ProofTree(NodeRef root, Theory theory) : root_(std::move(root)), theory_(std::move(theory)) {}

  const NodeRef& root() const { return root_; }
  const Theory& theory() const { return theory_; }
  const WideSequent& endsequent() const { return root_->declared; }

  // Generator access by position; memoized, thread-safe.
  NodeRef at(const Position& pos) const;
  ProofTree subtree(const Position& pos) const;

 private:
  NodeRef root_;
  Theory theory_;

  struct Memo {
    std::mutex mu;
    std::unordered_map<uint64_t, std::vector<std::pair<Position, NodeRef>>> map;
  };
  std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

// Branch sampling for prefix exploration of infinite premise families.
struct ExploreConfig {
  int depth = 50;
  size_t max_nodes = 200000;
  uint64_t omega_width = 2;  // probe 0..omega_width at omega rules
  std::function<std::vector<BranchLabel>(const Rule&)> read_sampler;  // encoded-rule probes
  // Restrict the coherence subset condition to bracket-free formulas, the
  // scope of the lifting endsequent lemma (its Gamma guarantee covers only
  // the L_mu part).
  bool lenient_brackets = false;
};

std::vector<BranchLabel> explore_labels(const Rule& r, const ExploreConfig& cfg);
// Default probe set for a Read rule: introduction rules for the formulas of
// theta (when they lie in the read theory), Rep, and a theta-missing filler.
std::vector<BranchLabel> default_read_probes(const Rule& read);

struct Violation {
  Position pos;
  std::string what;
};

struct Report {
  bool ok = true;
  std::vector<Violation> violations;
  size_t explored = 0;

  void add(const Position& pos, std::string what) {
    ok = false;
    violations.push_back({pos, std::move(what)});
  }
  std::string summary() const;
};

// Local coherence of declared sequents over the explored prefix:
//   (i) declared(tau) includes Delta(rule(tau));
//   (ii) declared(tau.i) is contained in declared(tau) + premise_i(rule(tau)).
Report check_local_coherence(const ProofTree& d, const ExploreConfig& cfg);

// Eigenvariable validity on the explored prefix.
Report check_eigenvariables(const ProofTree& d, const ExploreConfig& cfg);

// Theory membership of every explored rule.
Report check_theory_membership(const ProofTree& d, const ExploreConfig& cfg);

// Exact endsequent of a well-founded finite tree, with fuel.
struct GammaResult {
  bool exact = false;
  Sequent gamma;
  std::string note;
};
GammaResult gamma_finite(const ProofTree& d, size_t fuel);

enum class WfVerdict { WellFounded, IllFoundedWitness, Unknown };
struct WfResult {
  WfVerdict verdict = WfVerdict::Unknown;
  size_t expansions = 0;
};
WfResult is_deduction(const ProofTree& d, size_t fuel);

// Finite grafting: d(<>) = R, d(i.tau) = children[i](tau).
struct LabelKey {
  uint64_t h;
  BranchLabel label;
};
ProofTree graft(Rule r, const std::vector<std::pair<BranchLabel, ProofTree>>& children,
                Theory theory);

struct TraceRecord {
  Position pos;
  NodeRef node;
};
void explore(const ProofTree& d, const ExploreConfig& cfg,
             const std::function<void(const TraceRecord&)>& visit);

std::string trace_line(const TraceRecord& rec);

}  // namespace mu
