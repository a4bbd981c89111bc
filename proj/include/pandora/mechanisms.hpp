#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pandora/fpa.hpp"
#include "pandora/pandora_core.hpp"
#include "pandora/rng.hpp"
#include "pandora/stats.hpp"

namespace pandora::mech {

// ---------------------------------------------------------------------------
// Audit events.  Simulators report every inspection, bid/claim and award to an
// optional sink; tests and the JSON-lines exporter recompute accounting from
// this trace.
// ---------------------------------------------------------------------------
struct AuctionEvent {
  std::string type;    // "inspect" | "bid" | "claim" | "award" | "no-sale"
  int bidder = -1;
  double clock = 0.0;  // clock or price level at which the event fired
  double amount = 0.0; // cost paid, bid placed, or price
};
using EventSink = std::function<void(const AuctionEvent&)>;

// Sentinel marking a bidder who submits nothing.
inline constexpr double kNoBid = -std::numeric_limits<double>::infinity();

// First-price winner among the submitted levels (kNoBid entries do not
// compete): highest wins, exact ties go to the lower covered call, and a
// residual tie — equal level AND equal covered call — is split evenly via a
// deterministic hash of all realized values, so coupled descending and sealed
// runs agree draw by draw while neither bidder is systematically favored.
int pick_first_price_winner(const std::vector<double>& levels,
                            const std::vector<double>& kappas,
                            const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Single-item outcome accounting: u_i = A_i v_i - I_i c_i - t_i.
// ---------------------------------------------------------------------------
struct AuctionOutcome {
  int winner = -1;                 // -1: no sale
  double price = 0.0;
  std::vector<int> inspected;      // ascending bidder indices
  double costsPaid = 0.0;          // sum of inspection costs
  double welfare = 0.0;            // winner value - costsPaid (or -costsPaid)
  double revenue = 0.0;            // price when sold, else 0
  std::vector<double> utilities;   // per bidder
};

// ---------------------------------------------------------------------------
// Descending clock.  A bidder's plan is two trigger levels derived from one
// monotone bid schedule: inspect when the clock reaches bid(strike), claim at
// bid(min(value, strike)).  Claiming therefore never happens above the level
// that triggered inspection, so a claim is always in the money.
// ---------------------------------------------------------------------------
struct DutchStrategy {
  double strike = 0.0;
  double cost = 0.0;
  double inspectPrice = 0.0;
  fpa::BidFunction bid;
  bool neverBids = false;  // strike below the schedule domain: zero-bid

  // price this bidder would claim at once her value is known
  double claim_price(double v) const {
    return bid(covered_call_value(strike, v));
  }
};

// Build the plan from a sealed-bid schedule and the bidder's primitives.  A
// strike below the schedule domain (or below the reserve) yields a strategy
// that never inspects and never claims.
DutchStrategy dutch_lambda_strategy(const fpa::BidFunction& bidFn, const BidderType& bidder,
                                    double reserve = 0.0);

// One realized descending-clock run.  The winner is the highest claim level;
// exact claim ties go to the lower covered-call claimant (then lower index).
// Bidder i pays her inspection cost iff her trigger sits strictly above the
// final price, or she wins.
AuctionOutcome simulate_dutch(const std::vector<DutchStrategy>& strategies,
                              const std::vector<double>& values, const EventSink& sink = {});

// Per-bidder reserve floors: bidder i may claim only while the clock is at or
// above reserves[i], and only when her covered call covers that floor.  All
// reserves zero reproduces simulate_dutch decision-for-decision.
AuctionOutcome simulate_dutch_with_reserves(const std::vector<DutchStrategy>& strategies,
                                            const std::vector<double>& reserves,
                                            const std::vector<double>& values,
                                            const EventSink& sink = {});

// Sealed first-price auction among the zero-cost stand-ins, on the same value
// draw and through the same bid schedules and tie rule.  (winner, price) is
// bit-identical to simulate_dutch on the coupled draw; utilities are the
// stand-ins' kappa - price.
AuctionOutcome simulate_counterpart_fpa(const std::vector<DutchStrategy>& strategies,
                                        const std::vector<double>& values,
                                        const EventSink& sink = {});

// ---------------------------------------------------------------------------
// Simultaneous second-price auction with endogenous inspection.  Interim
// types are a finite grid of equally likely (value law, cost) pairs; the
// equilibrium object per bidder family is a cost threshold per type knot
// (inspect and bid the realized value below it, otherwise bid the expected
// value net of cost) plus the induced bid law.
// ---------------------------------------------------------------------------
struct SpaConfig {
  int thetaGrid = 1000;   // interim type knots
  int bidGrid = 1000;     // shared bid-law grid
  double damping = 0.3;   // smoothing weight on the best-response law
  double tol = 2e-4;      // mean absolute CDF change at exit
  int maxIter = 300;
  int valueQuad = 128;    // quantile nodes for value-law integrals
  double bidHi = -1.0;    // grid ceiling; <0: from the families' quantiles
  bool mandatoryPreBidInspection = false;  // bidding requires inspection
};

struct SpaFamily {
  // u in (0,1) indexes the equally likely interim types
  std::function<BidderType(double)> at;
  int count = 1;
};

struct SpaStrategy {
  std::vector<double> thetaKnots;     // (j + 0.5) / K
  std::vector<double> knotCost;       // c at each knot
  std::vector<double> meanValue;      // E[v] at each knot
  std::vector<double> thresholdCost;  // inspect iff knot cost <= threshold
  std::vector<double> bidGrid;
  std::vector<double> bidCdf;         // induced bid law G
  bool converged = true;
  double residual = 0.0;
  int iterations = 0;
};

// Damped fixed point of the per-knot threshold best responses against the
// highest-competing-bid law.  Non-convergence returns the last iterate with
// converged = false and the residual.
std::vector<SpaStrategy> spa_solve(const std::vector<SpaFamily>& families,
                                   const SpaConfig& cfg = {});

// One bidder's realized draw: which family, which type knot, and the value.
struct SpaBidderDraw {
  int family = 0;
  int knot = 0;
  double value = 0.0;
};

// One sealed run: highest bid wins at the second-highest; exact bid ties are
// broken uniformly from tieRng.  A winner who had not inspected pays her cost
// upon winning.  With mandatoryPreBidInspection, non-inspectors are absent.
// Bidders whose no-inspection bid is negative abstain.
AuctionOutcome simulate_spa(const std::vector<SpaStrategy>& strategies,
                            const std::vector<SpaBidderDraw>& draws,
                            bool mandatoryPreBidInspection, RngStream& tieRng,
                            const EventSink& sink = {});

// ---------------------------------------------------------------------------
// Sequential posted price at the Monte Carlo median of the best covered call.
// ---------------------------------------------------------------------------
struct PostedPriceResult {
  double price = 0.0;            // median of max_i covered call
  McEstimate winnerKappa;        // accepted covered call (0 when unsold)
  McEstimate realizedWelfare;    // winner value - inspection costs
  McEstimate maxKappa;           // E[max covered call^+] on the same draws
  McEstimate halfBoundMargin;    // per-draw winnerKappa - maxKappa / 2
  double saleProbability = 0.0;
};

// Visits bidders in index order: i inspects iff price <= strike_i, accepts
// iff price <= kappa_i, first acceptance ends the run.  The accepted covered
// call averages at least half of E[max kappa] up to Monte Carlo error.
PostedPriceResult posted_price_sequential(const std::vector<BidderType>& bidders,
                                          RngStream& rng, std::size_t nDraws);

// ---------------------------------------------------------------------------
// Sequential incumbent/knockout bargaining, script-driven.  Buyers are
// approached in order; one may become the incumbent by bidding the reserve;
// later entrants fight the incumbent in a knockout that resolves at the
// loser's maximum willingness (continuous limit of open raising); the loser
// never re-enters.  Strategies are inputs, not solved for.
// ---------------------------------------------------------------------------
struct BkrsNode {
  enum Kind { Arrival, Knockout };
  Kind kind = Arrival;
  int bidder = -1;
  double standingPrice = 0.0;
  bool hasIncumbent = false;
  bool asIncumbent = false;            // knockout role
  std::optional<double> value;         // visible only after own inspection
};

struct BkrsAction {
  bool enter = false;    // arrival: bid the reserve / challenge
  bool inspect = false;  // arrival: inspect first, then decide again
  double cap = 0.0;      // knockout: maximum willingness
};

// nullopt at any reachable node aborts with an error naming the node
using BkrsScript = std::function<std::optional<BkrsAction>(const BkrsNode&)>;

AuctionOutcome simulate_bkrs(const BkrsScript& script, const std::vector<int>& order,
                             double reserve, const std::vector<double>& values,
                             const std::vector<double>& costs, const EventSink& sink = {});

// ---------------------------------------------------------------------------
// Virtual-value benchmark for reserves.
// ---------------------------------------------------------------------------
struct MyersonResult {
  McEstimate revenue;            // E[max_i phi_i(X_i)^+]
  std::vector<double> reserves;  // phi_i^{-1}(0)
  bool regularOnGrid = true;     // every phi_i nondecreasing on the check grid
};

// phi(x) = x - (1 - F(x)) / f(x); reserves by bisection, revenue by Monte
// Carlo.  Laws must carry a density (a pure point mass is treated as fully
// extractable: phi(x) = x).
MyersonResult myerson_revenue_and_reserves(const std::vector<Distribution>& dists,
                                           RngStream& rng, std::size_t nDraws = 200000);

}  // namespace pandora::mech
