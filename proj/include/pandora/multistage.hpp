#pragma once

#include <unordered_map>
#include <vector>

#include "pandora/pandora_core.hpp"

namespace pandora::multistage {

// A finite staged-inspection process.  Internal nodes reveal one of several
// signals; arrivalCost is the incremental amount paid upon landing on the
// node (the stage's cost may itself be information, so it sits on the child
// and realizes with the branch).  The root's arrivalCost must be 0.  Leaves
// carry the final value.
struct Node {
  double arrivalCost = 0.0;
  std::vector<double> branchProbs;
  std::vector<Node> children;
  double value = 0.0;  // leaves only

  bool is_leaf() const { return children.empty(); }
};

// Structural checks: branch probabilities sum to 1 within 1e-9, sizes match,
// costs >= 0, root arrival cost 0.  Throws InputError.
void validate(const Node& root);

// Generalized strike at the subtree root: the unique outside-option level z
// making one further inspection stage exactly indifferent, i.e. the least
// fixed point of z -> E_child[-cost + W(child, z)] where W is the optimal
// continue/stop-and-claim-z value and leaves evaluate to max(v, z).
// Bisection to 1e-10 relative tolerance.
double generalized_strike(const Node& root);

// Per-node indices in preorder: sigma at internal nodes, the running-minimum
// kappa everywhere, and the covered call min(path sigmas, v) at leaves.
struct TreeIndices {
  std::vector<double> sigma;       // internal nodes only, preorder among internals
  std::vector<double> leafKappa;   // per leaf, preorder among leaves
  double rootSigma = 0.0;
};
TreeIndices compute_indices(const Node& root);

// Draw a root-to-leaf path (child index per stage).
std::vector<int> sample_path(const Node& root, RngStream& rng);

// A deterministic inspection rule: one continue/stop bit per internal node and
// one acquire/pass bit per leaf, both in preorder.  Acquisition only happens
// at leaves, i.e. after every stage on the path has been completed.
struct StagePolicy {
  std::vector<bool> continueAt;
  std::vector<bool> acquireAt;
};

std::size_t internal_count(const Node& root);
std::size_t leaf_count(const Node& root);

struct PolicySearch {
  double bestValue = 0.0;
  StagePolicy bestPolicy;
};

// Brute-force optimum of E[Av + (1-A)z - cost] over every StagePolicy, where
// z may be claimed at any stop.  Deliberately enumerative so it can serve as
// an independent oracle for the fixed-point solver.  Trees above ~20 decision
// bits are rejected.
PolicySearch enumerate_policies(const Node& tree, double outsideOption);

// Value of one specific policy under outside option z (same objective).
double policy_value(const Node& tree, const StagePolicy& policy, double outsideOption);

// Sigma for every internal node, keyed by node address; lets repeated
// simulations over the same trees skip the fixed-point solves.
using SigmaCache = std::unordered_map<const Node*, double>;
SigmaCache cache_sigmas(const Node& root);

// The welfare-optimal multi-bidder procedure: repeatedly act on the highest
// priority, where a mid-inspection bidder's priority is the current node's
// sigma and a finished bidder's priority is her value.  The top bidder
// advances one stage (paying the arrival cost) or, if finished, wins.
// Terminates without award when the top priority is negative.  Ties break to
// the lower bidder index, then the shallower stage.
SearchOutcome descending_priority(const std::vector<Node>& trees,
                                  const std::vector<std::vector<int>>& paths);
SearchOutcome descending_priority(const std::vector<Node>& trees,
                                  const std::vector<std::vector<int>>& paths,
                                  const std::vector<SigmaCache>& sigmas);

// Exact expected welfare of descending_priority over the joint path law, and
// exact E[max_i kappa_i^+], both by exhaustive enumeration.  Capacity-guarded.
double descending_priority_expected_welfare(const std::vector<Node>& trees);
double max_leaf_kappa_expectation(const std::vector<Node>& trees);

}  // namespace pandora::multistage
