#include "pandora/multi_item.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pandora/common.hpp"

namespace pandora::mech {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

MultiItemOutcome uniform_descending(int nItems,
                                    const std::vector<std::shared_ptr<MultiItemStrategy>>& strategies,
                                    const std::vector<std::vector<double>>& values,
                                    const std::vector<std::vector<double>>& costs,
                                    const EventSink& sink) {
  const std::size_t n = strategies.size();
  const std::size_t m = static_cast<std::size_t>(nItems);
  if (values.size() != n || costs.size() != n)
    throw InputError("uniform_descending: strategy/value/cost lists disagree");
  for (std::size_t i = 0; i < n; ++i)
    if (values[i].size() != m || costs[i].size() != m)
      throw InputError("uniform_descending: per-item rows disagree with the item count");

  MultiItemOutcome out;
  out.itemOf.assign(n, -1);
  out.prices.assign(m, 0.0);
  std::vector<char> available(m, 1), active(n, 1);
  std::vector<std::vector<char>> seen(n, std::vector<char>(m, 0));
  double clock = kInf;

  while (true) {
    double best = 0.0;  // triggers at or below zero never fire
    int who = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const double t = std::min(strategies[i]->next_trigger(clock, available), clock);
      if (t > best) {  // ties stay with the lower index
        best = t;
        who = static_cast<int>(i);
      }
    }
    if (who < 0) break;
    clock = best;

    const MultiAction a = strategies[who]->act(clock, available);
    if (a.kind == MultiAction::Inspect && a.item >= 0 && a.item < nItems &&
        !seen[who][a.item]) {
      seen[who][a.item] = 1;
      out.inspected.emplace_back(who, a.item);
      out.welfare -= costs[who][a.item];
      if (sink) sink({"inspect", who, clock, costs[who][a.item]});
      strategies[who]->on_inspected(a.item, values[who][a.item]);
    } else if (a.kind == MultiAction::Claim && a.item >= 0 && a.item < nItems &&
               available[a.item]) {
      out.itemOf[who] = a.item;
      out.prices[a.item] = clock;
      available[a.item] = 0;
      active[who] = 0;
      out.welfare += values[who][a.item];
      if (sink) sink({"claim", who, clock, clock});
    } else {
      // a declared trigger with no usable action: the bidder is done
      active[who] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shaded-participation strategy.
// ---------------------------------------------------------------------------

namespace {

class DeviationStrategy final : public MultiItemStrategy {
 public:
  DeviationStrategy(const std::vector<BidderType>& itemTypes, RngStream& rng) {
    r_ = std::exp(2.0 * rng.next_double() - 2.0);  // density 1/(2r) on [e^-2, 1]
    const std::size_t m = itemTypes.size();
    shStrike_.resize(m);
    shValue_.assign(m, -kInf);
    seen_.assign(m, 0);
    for (std::size_t j = 0; j < m; ++j)
      shStrike_[j] = (1.0 - r_) * strike_price(itemTypes[j].valueDist, itemTypes[j].cost);
  }

  double r() const { return r_; }

  double next_trigger(double, const std::vector<char>& available) override {
    double t = -kInf;
    for (std::size_t j = 0; j < shStrike_.size(); ++j) {
      if (!available[j]) continue;
      t = std::max(t, seen_[j] ? shValue_[j] : shStrike_[j]);
    }
    return t;
  }

  MultiAction act(double clock, const std::vector<char>& available) override {
    // an inspected item whose shaded value the clock reached is claimed first
    int best = -1;
    for (std::size_t j = 0; j < shStrike_.size(); ++j) {
      if (!available[j] || !seen_[j] || shValue_[j] < clock) continue;
      if (best < 0 || shValue_[j] > shValue_[best]) best = static_cast<int>(j);
    }
    if (best >= 0) return {MultiAction::Claim, best};
    for (std::size_t j = 0; j < shStrike_.size(); ++j) {
      if (!available[j] || seen_[j] || shStrike_[j] < clock) continue;
      if (best < 0 || shStrike_[j] > shStrike_[best]) best = static_cast<int>(j);
    }
    if (best >= 0) return {MultiAction::Inspect, best};
    return {MultiAction::None, -1};
  }

  void on_inspected(int item, double value) override {
    seen_[item] = 1;
    shValue_[item] = (1.0 - r_) * value;
  }

 private:
  double r_ = 1.0;
  std::vector<double> shStrike_, shValue_;
  std::vector<char> seen_;
};

}  // namespace

std::shared_ptr<MultiItemStrategy> multi_deviation_strategy(
    const std::vector<BidderType>& itemTypes, RngStream& rng, double* rOut) {
  auto s = std::make_shared<DeviationStrategy>(itemTypes, rng);
  if (rOut) *rOut = s->r();
  return s;
}

// ---------------------------------------------------------------------------
// Matching benchmarks.
// ---------------------------------------------------------------------------

Matching greedy_match(const std::vector<std::vector<double>>& weights) {
  const std::size_t n = weights.size();
  const std::size_t m = n ? weights[0].size() : 0;
  for (const auto& row : weights)
    if (row.size() != m) throw InputError("greedy_match: ragged weight matrix");

  Matching out;
  out.itemOf.assign(n, -1);
  std::vector<char> rowFree(n, 1), colFree(m, 1);
  while (true) {
    double best = 0.0;
    int bi = -1, bj = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!rowFree[i]) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (!colFree[j]) continue;
        if (weights[i][j] > best) {  // strict: ties keep the earliest cell
          best = weights[i][j];
          bi = static_cast<int>(i);
          bj = static_cast<int>(j);
        }
      }
    }
    if (bi < 0) break;
    out.itemOf[bi] = bj;
    out.value += best;
    rowFree[bi] = 0;
    colFree[bj] = 0;
  }
  return out;
}

Matching optimal_assignment(const std::vector<std::vector<double>>& weights) {
  const std::size_t n = weights.size();
  const std::size_t m = n ? weights[0].size() : 0;
  for (const auto& row : weights)
    if (row.size() != m) throw InputError("optimal_assignment: ragged weight matrix");
  if (m > 14) throw CapacityError("optimal_assignment: more than 14 items");

  const std::size_t masks = static_cast<std::size_t>(1) << m;
  // dp[mask]: best total over the rows handled so far with columns `mask` used
  std::vector<double> dp(masks, -kInf), nx(masks);
  std::vector<std::vector<int>> choice(n, std::vector<int>(masks, -1));
  dp[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(nx.begin(), nx.end(), -kInf);
    for (std::size_t mask = 0; mask < masks; ++mask) {
      if (dp[mask] == -kInf) continue;
      if (dp[mask] > nx[mask]) {
        nx[mask] = dp[mask];
        choice[i][mask] = -1;
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (mask & (1u << j)) continue;
        if (weights[i][j] <= 0.0) continue;
        const std::size_t nm = mask | (1u << j);
        const double v = dp[mask] + weights[i][j];
        if (v > nx[nm]) {
          nx[nm] = v;
          choice[i][nm] = static_cast<int>(j);
        }
      }
    }
    dp.swap(nx);
  }
  std::size_t bestMask = 0;
  for (std::size_t mask = 1; mask < masks; ++mask)
    if (dp[mask] > dp[bestMask]) bestMask = mask;

  Matching out;
  out.itemOf.assign(n, -1);
  out.value = dp[bestMask] == -kInf ? 0.0 : dp[bestMask];
  std::size_t mask = bestMask;
  for (std::size_t i = n; i-- > 0;) {
    const int j = choice[i][mask];
    if (j >= 0) {
      out.itemOf[i] = j;
      mask &= ~(static_cast<std::size_t>(1) << j);
    }
  }
  return out;
}

}  // namespace pandora::mech
