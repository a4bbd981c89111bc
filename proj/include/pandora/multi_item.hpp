#pragma once

#include <memory>
#include <vector>

#include "pandora/mechanisms.hpp"
#include "pandora/pandora_core.hpp"
#include "pandora/rng.hpp"

namespace pandora::mech {

// ---------------------------------------------------------------------------
// Uniform descending auction over several heterogeneous items with
// unit-demand bidders: one clock for all items; a claim removes bidder and
// item; the clock runs to zero.
// ---------------------------------------------------------------------------
struct MultiItemOutcome {
  std::vector<int> itemOf;                    // per bidder; -1 unmatched
  std::vector<double> prices;                 // per item; 0 when unsold
  std::vector<std::pair<int, int>> inspected; // (bidder, item) in event order
  double welfare = 0.0;                       // matched values - all inspection costs
};

struct MultiAction {
  enum Kind { None, Inspect, Claim };
  Kind kind = None;
  int item = -1;
};

// Event-driven responder.  The engine repeatedly asks every active bidder for
// the highest clock level at which she wants to act given the available item
// set, advances the clock to the highest pending trigger, and lets that
// bidder act.  Triggers at or below zero never fire.
class MultiItemStrategy {
 public:
  virtual ~MultiItemStrategy() = default;
  virtual double next_trigger(double clock, const std::vector<char>& available) = 0;
  virtual MultiAction act(double clock, const std::vector<char>& available) = 0;
  virtual void on_inspected(int item, double value) = 0;
};

// values[i][j], costs[i][j]: bidder i, item j.  Trigger ties across bidders
// go to the lower bidder index.  Inspection costs are charged when the
// engine executes an Inspect action.
MultiItemOutcome uniform_descending(int nItems,
                                    const std::vector<std::shared_ptr<MultiItemStrategy>>& strategies,
                                    const std::vector<std::vector<double>>& values,
                                    const std::vector<std::vector<double>>& costs,
                                    const EventSink& sink = {});

// The shaded-participation strategy: draw r on [e^-2, 1] with density
// 1/(2r), shade every strike and every learned value by (1-r), act only when
// the clock first touches the best remaining shaded level, and claim the
// item whose shaded covered call the clock reached.  It never inspects out
// of the money and pays exactly (1-r) * min(strike, value) for the item it
// takes; ties between equal triggers go to the lower item index.
std::shared_ptr<MultiItemStrategy> multi_deviation_strategy(
    const std::vector<BidderType>& itemTypes, RngStream& rng, double* rOut = nullptr);

// ---------------------------------------------------------------------------
// Assignment benchmarks on a weight matrix (rows: bidders, cols: items).
// ---------------------------------------------------------------------------
struct Matching {
  std::vector<int> itemOf;  // per row; -1 unmatched
  double value = 0.0;
};

// Repeatedly takes the largest strictly positive remaining entry (ties: the
// lowest row, then column, index).  Always within a factor two of optimal.
Matching greedy_match(const std::vector<std::vector<double>>& weights);

// Exact optimum over partial one-to-one assignments, counting only positive
// entries; bitmask DP over columns (at most 20 columns).
Matching optimal_assignment(const std::vector<std::vector<double>>& weights);

}  // namespace pandora::mech
