#pragma once

#include <optional>
#include <vector>

#include "pandora/distributions.hpp"
#include "pandora/stats.hpp"

namespace pandora {

// A bidder who may pay `cost` once to learn her value draw.
struct BidderType {
  Distribution valueDist;
  double cost = 0.0;
};

// The strike price: unique solution of E[(v - sigma)^+] = cost.  Exact for
// finite-support laws; bisection to 1e-10 relative tolerance otherwise.  A
// zero cost returns the support supremum (+inf when unbounded).
double strike_price(const Distribution& valueDist, double cost);

inline double covered_call_value(double strike, double value) {
  return std::min(strike, value);
}

// The zero-cost stand-in whose value is distributed as the covered call
// min(sigma, v).
struct Counterpart {
  Distribution law;
  double strike = 0.0;
};
Counterpart covered_counterpart(const BidderType& bidder);

// One realized run of a sequential inspection procedure.
struct SearchOutcome {
  int winner = -1;                 // -1: no award
  std::vector<int> inspected;      // in inspection order
  double totalCost = 0.0;
  double grossValue = 0.0;         // winner's realized value (0 if no award)
  double welfare = 0.0;            // grossValue - totalCost
};

// Optimal sequential search on realized values: inspect in decreasing strike
// order, stop once the best observed value weakly exceeds every remaining
// strike, award the best nonnegative observation.  Negative-strike bidders
// are never inspected.
SearchOutcome weitzman_search(const std::vector<double>& strikes,
                              const std::vector<double>& values,
                              const std::vector<double>& costs);
SearchOutcome weitzman_search(const std::vector<BidderType>& bidders,
                              const std::vector<double>& values);

// Monte Carlo E[max_i min(sigma_i, v_i)^+] — the first-best welfare benchmark.
McEstimate first_best_welfare(const std::vector<BidderType>& bidders, RngStream& rng,
                              std::size_t nDraws);

// Exact optimal adaptive inspection policy by state-space enumeration.
// Capacity: n <= 3 bidders, supports of <= 5 atoms each.
double brute_force_first_best(const std::vector<BidderType>& bidders);

// Exact E[max_i min(sigma_i, v_i)^+] by joint support enumeration (same
// capacity as brute_force_first_best).
double max_covered_call_expectation(const std::vector<BidderType>& bidders);

// Exact expected welfare of the realized weitzman_search trace by joint
// support enumeration.
double weitzman_expected_welfare_exact(const std::vector<BidderType>& bidders);

}  // namespace pandora
