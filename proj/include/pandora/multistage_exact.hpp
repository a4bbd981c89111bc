#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <vector>

#include "pandora/multistage.hpp"

namespace pandora::multistage {

// Rational-arithmetic mirror of Node, for audits where floating point would
// blur the equality cases.  Same conventions: arrivalCost sits on the child
// and is paid on entering it; the root's must be zero; leaves carry a value.
struct ExactNode {
  mpq_class arrivalCost = 0;
  std::vector<mpq_class> branchProbs;
  std::vector<ExactNode> children;
  mpq_class value = 0;
  bool is_leaf() const { return children.empty(); }
};

// Branch probabilities must sum to exactly 1 per node; costs >= 0; root cost 0.
void validate(const ExactNode& root);

std::size_t internal_count(const ExactNode& root);
std::size_t leaf_count(const ExactNode& root);

// Exact least fixed point of g(z) = E_child[-cost + W(child, z)], with
// W(., z) the optimal continue/stop-and-claim-z value.  g is piecewise linear
// with rational breakpoints, so the fixed point is an exact rational.
mpq_class exact_generalized_strike(const ExactNode& node);

struct ExactAmortization {
  mpq_class lhs;       // E[A v - cost paid]
  mpq_class rhs;       // E[A kappa], kappa = min(path sigmas, v)
  bool nonExposed;     // never quits a node whose sigma beats every ancestor
                       // sigma, never passes a leaf worth more than the path cap
};

// Exact expectations of the amortized inequality under one policy.  lhs <= rhs
// always; lhs == rhs exactly when the policy is non-exposed, with both clauses
// checked only along positive-probability paths.
ExactAmortization amortization_check(const ExactNode& root, const StagePolicy& policy);

// Every stop/continue x acquire/pass assignment; capacity-guarded (~2^20).
std::vector<StagePolicy> all_policies(const ExactNode& root);

ExactNode exact_from_tree(const Node& root);
Node tree_from_exact(const ExactNode& root);

}  // namespace pandora::multistage
