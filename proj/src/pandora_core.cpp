#include "pandora/pandora_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

namespace pandora {

double strike_price(const Distribution& valueDist, double cost) {
  if (!(cost >= 0.0) || !std::isfinite(cost))
    throw InputError("strike_price: cost must be finite and >= 0");
  if (cost == 0.0) return valueDist.support_hi();
  if (auto exact = valueDist.partial_expectation_inverse(cost)) return *exact;

  const double mean = valueDist.mean();
  // E[(v-t)^+] >= mean - t, so p(lo) > 0 is guaranteed here
  double lo = mean - cost - 1.0;
  double hi = valueDist.quantile(1.0 - 1e-9);
  if (hi <= lo) hi = lo + 1.0;
  auto p = [&](double t) { return valueDist.partial_expectation(t) - cost; };
  // expand upward until the residual changes sign
  double step = std::max(hi - lo, 1.0);
  for (int i = 0; p(hi) > 0.0; ++i) {
    if (i >= 200) throw SolverError("strike_price: failed to bracket the strike");
    hi += step;
    step *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (p(mid) > 0.0) lo = mid;
    else hi = mid;
    const double scale = std::max({1.0, std::fabs(lo), std::fabs(hi)});
    if (hi - lo <= 1e-12 * scale) break;
  }
  const double sigma = 0.5 * (lo + hi);
  if (std::fabs(p(sigma)) > 1e-10 * std::max(1.0, cost))
    throw SolverError("strike_price: residual above tolerance");
  return sigma;
}

Counterpart covered_counterpart(const BidderType& bidder) {
  const double sigma = strike_price(bidder.valueDist, bidder.cost);
  if (sigma >= bidder.valueDist.support_hi()) return {bidder.valueDist, sigma};
  return {Distribution::truncated_above(bidder.valueDist, sigma), sigma};
}

SearchOutcome weitzman_search(const std::vector<double>& strikes,
                              const std::vector<double>& values,
                              const std::vector<double>& costs) {
  const std::size_t n = strikes.size();
  if (values.size() != n || costs.size() != n)
    throw InputError("weitzman_search: strikes/values/costs sizes differ");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return strikes[a] > strikes[b]; });

  SearchOutcome out;
  double bestV = -std::numeric_limits<double>::infinity();
  int bestIdx = -1;
  for (int i : order) {
    if (strikes[i] < 0.0) break;      // never worth opening
    if (bestV >= strikes[i]) break;   // stopping rule
    out.inspected.push_back(i);
    out.totalCost += costs[i];
    const double v = values[i];
    if (v > bestV || (v == bestV && i < bestIdx)) {
      bestV = v;
      bestIdx = i;
    }
  }
  if (bestIdx >= 0 && bestV >= 0.0) {
    out.winner = bestIdx;
    out.grossValue = bestV;
  }
  out.welfare = out.grossValue - out.totalCost;
  return out;
}

SearchOutcome weitzman_search(const std::vector<BidderType>& bidders,
                              const std::vector<double>& values) {
  std::vector<double> strikes(bidders.size()), costs(bidders.size());
  for (std::size_t i = 0; i < bidders.size(); ++i) {
    strikes[i] = strike_price(bidders[i].valueDist, bidders[i].cost);
    costs[i] = bidders[i].cost;
  }
  return weitzman_search(strikes, values, costs);
}

McEstimate first_best_welfare(const std::vector<BidderType>& bidders, RngStream& rng,
                              std::size_t nDraws) {
  if (bidders.empty()) throw InputError("first_best_welfare: no bidders");
  std::vector<double> strikes(bidders.size());
  for (std::size_t i = 0; i < bidders.size(); ++i)
    strikes[i] = strike_price(bidders[i].valueDist, bidders[i].cost);
  OnlineMeanVar acc;
  for (std::size_t k = 0; k < nDraws; ++k) {
    double best = 0.0;
    for (std::size_t i = 0; i < bidders.size(); ++i) {
      const double kappa = std::min(strikes[i], bidders[i].valueDist.sample_one(rng));
      best = std::max(best, kappa);
    }
    acc.add(best);
  }
  return acc.estimate();
}

namespace {

struct EnumerableInstance {
  std::vector<std::vector<std::pair<double, double>>> atoms;  // per bidder
  std::vector<double> strikes;
  std::vector<double> costs;
};

EnumerableInstance enumerable(const std::vector<BidderType>& bidders, const char* who) {
  if (bidders.empty() || bidders.size() > 3)
    throw CapacityError(std::string(who) + ": needs 1..3 bidders");
  EnumerableInstance e;
  for (const auto& b : bidders) {
    auto a = b.valueDist.atoms();
    if (!a) throw CapacityError(std::string(who) + ": needs finite-support value laws");
    if (a->size() > 5)
      throw CapacityError(std::string(who) + ": supports of more than 5 atoms");
    e.atoms.push_back(std::move(*a));
    e.strikes.push_back(strike_price(b.valueDist, b.cost));
    e.costs.push_back(b.cost);
  }
  return e;
}

// Visits every joint atom combination with its probability.
void for_each_joint(const EnumerableInstance& e,
                    const std::function<void(const std::vector<double>&, double)>& fn) {
  const std::size_t n = e.atoms.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> vals(n);
  for (;;) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      vals[i] = e.atoms[i][idx[i]].first;
      p *= e.atoms[i][idx[i]].second;
    }
    fn(vals, p);
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++idx[i] < e.atoms[i].size()) break;
      idx[i] = 0;
    }
    if (i == n) break;
  }
}

}  // namespace

double brute_force_first_best(const std::vector<BidderType>& bidders) {
  const auto e = enumerable(bidders, "brute_force_first_best");
  const std::size_t n = e.atoms.size();
  // Only the best observed value and the remaining set matter for the optimal
  // continuation; memoize over both.
  std::map<std::pair<unsigned, double>, double> memo;
  const double kNone = -std::numeric_limits<double>::infinity();
  std::function<double(unsigned, double)> value = [&](unsigned remaining, double bestV) {
    const double stopPayoff = std::max(bestV, 0.0);
    if (remaining == 0) return stopPayoff;
    const auto key = std::make_pair(remaining, bestV);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    double best = stopPayoff;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(remaining & (1u << i))) continue;
      double cont = -e.costs[i];
      for (const auto& [v, p] : e.atoms[i])
        cont += p * value(remaining & ~(1u << i), std::max(bestV, v));
      best = std::max(best, cont);
    }
    memo[key] = best;
    return best;
  };
  return value((1u << n) - 1, kNone);
}

double max_covered_call_expectation(const std::vector<BidderType>& bidders) {
  const auto e = enumerable(bidders, "max_covered_call_expectation");
  double total = 0.0;
  for_each_joint(e, [&](const std::vector<double>& vals, double p) {
    double best = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i)
      best = std::max(best, std::min(e.strikes[i], vals[i]));
    total += p * best;
  });
  return total;
}

double weitzman_expected_welfare_exact(const std::vector<BidderType>& bidders) {
  const auto e = enumerable(bidders, "weitzman_expected_welfare_exact");
  double total = 0.0;
  for_each_joint(e, [&](const std::vector<double>& vals, double p) {
    total += p * weitzman_search(e.strikes, vals, e.costs).welfare;
  });
  return total;
}

}  // namespace pandora
