#include "pandora/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <cstring>
#include <numeric>
#include <sstream>

#include "pandora/common.hpp"

namespace pandora::mech {

namespace {

void emit(const EventSink& sink, const char* type, int bidder, double clock, double amount) {
  if (sink) sink(AuctionEvent{type, bidder, clock, amount});
}

std::uint64_t fold_bits(std::uint64_t h, double x) {
  std::uint64_t b;
  static_assert(sizeof(b) == sizeof(x));
  std::memcpy(&b, &x, sizeof(b));
  return detail::mix64(h ^ b);
}

}  // namespace

int pick_first_price_winner(const std::vector<double>& levels, const std::vector<double>& kappas,
                            const std::vector<double>& values) {
  int w = -1;
  std::vector<int> tied;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == kNoBid) continue;
    if (w < 0 || levels[i] > levels[w] ||
        (levels[i] == levels[w] && kappas[i] < kappas[w])) {
      w = static_cast<int>(i);
      tied.assign(1, w);
    } else if (levels[i] == levels[w] && kappas[i] == kappas[w]) {
      tied.push_back(static_cast<int>(i));
    }
  }
  if (tied.size() > 1) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (double v : values) h = fold_bits(h, v);
    w = tied[h % tied.size()];
  }
  return w;
}

DutchStrategy dutch_lambda_strategy(const fpa::BidFunction& bidFn, const BidderType& bidder,
                                    double reserve) {
  DutchStrategy s;
  s.cost = bidder.cost;
  s.strike = strike_price(bidder.valueDist, bidder.cost);
  s.bid = bidFn;
  if (bidFn.values.empty() || s.strike < bidFn.values.front() || s.strike < reserve) {
    // nothing this bidder could claim is reachable: sit the auction out
    s.neverBids = true;
    s.inspectPrice = kNoBid;
    return s;
  }
  s.inspectPrice = s.bid(s.strike);
  return s;
}

AuctionOutcome simulate_dutch_with_reserves(const std::vector<DutchStrategy>& strategies,
                                            const std::vector<double>& reserves,
                                            const std::vector<double>& values,
                                            const EventSink& sink) {
  const std::size_t n = strategies.size();
  if (values.size() != n || (!reserves.empty() && reserves.size() != n))
    throw InputError("simulate_dutch: strategy/value/reserve lists disagree");

  std::vector<double> claims(n, kNoBid), kappas(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (strategies[i].neverBids) continue;
    const double r = reserves.empty() ? 0.0 : reserves[i];
    kappas[i] = covered_call_value(strategies[i].strike, values[i]);
    if (kappas[i] < r) continue;  // the floor exceeds her willingness
    const double c = strategies[i].claim_price(values[i]);
    if (c < r) continue;
    claims[i] = c;
  }

  const int w = pick_first_price_winner(claims, kappas, values);
  const double price = w >= 0 ? claims[w] : 0.0;

  AuctionOutcome out;
  out.winner = w;
  out.price = price;
  out.revenue = price;
  out.utilities.assign(n, 0.0);

  // the clock stops at the winning claim (or runs to zero): everyone whose
  // trigger sits above that level has already inspected
  std::vector<std::pair<double, int>> triggers;
  for (std::size_t i = 0; i < n; ++i) {
    if (strategies[i].neverBids) continue;
    if (strategies[i].inspectPrice > price || static_cast<int>(i) == w)
      triggers.emplace_back(strategies[i].inspectPrice, static_cast<int>(i));
  }
  std::sort(triggers.begin(), triggers.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [lvl, i] : triggers) {
    emit(sink, "inspect", i, lvl, strategies[i].cost);
    out.costsPaid += strategies[i].cost;
    out.utilities[i] -= strategies[i].cost;
  }
  for (const auto& [lvl, i] : triggers) out.inspected.push_back(i);
  std::sort(out.inspected.begin(), out.inspected.end());

  if (w >= 0) {
    out.utilities[w] += values[w] - price;
    out.welfare = values[w] - out.costsPaid;
    emit(sink, "claim", w, price, price);
    emit(sink, "award", w, price, price);
  } else {
    out.welfare = -out.costsPaid;
    emit(sink, "no-sale", -1, 0.0, 0.0);
  }
  return out;
}

AuctionOutcome simulate_dutch(const std::vector<DutchStrategy>& strategies,
                              const std::vector<double>& values, const EventSink& sink) {
  return simulate_dutch_with_reserves(strategies, {}, values, sink);
}

AuctionOutcome simulate_counterpart_fpa(const std::vector<DutchStrategy>& strategies,
                                        const std::vector<double>& values,
                                        const EventSink& sink) {
  const std::size_t n = strategies.size();
  if (values.size() != n) throw InputError("simulate_counterpart_fpa: list sizes disagree");

  std::vector<double> bids(n, kNoBid), kappas(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (strategies[i].neverBids) continue;
    kappas[i] = covered_call_value(strategies[i].strike, values[i]);
    bids[i] = strategies[i].claim_price(values[i]);
    emit(sink, "bid", static_cast<int>(i), bids[i], bids[i]);
  }
  const int w = pick_first_price_winner(bids, kappas, values);
  const double price = w >= 0 ? bids[w] : 0.0;

  AuctionOutcome out;
  out.winner = w;
  out.price = price;
  out.revenue = price;
  out.utilities.assign(n, 0.0);
  if (w >= 0) {
    out.utilities[w] = kappas[w] - price;
    out.welfare = kappas[w];
    emit(sink, "award", w, price, price);
  } else {
    emit(sink, "no-sale", -1, 0.0, 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simultaneous second-price auction.
// ---------------------------------------------------------------------------

namespace {

// family data cached on the shared grids
struct FamilyTable {
  int count = 1;
  std::vector<double> knotCost, meanValue, thetaKnots;
  std::vector<std::vector<double>> cdfOnGrid;   // per knot, on bid grid
  std::vector<std::vector<double>> quadValues;  // per knot, quantile nodes
};

// linear interpolation of a cumulative integral table on a uniform grid,
// extended with slope 0 below and slope 1 above (the integrand is a CDF)
double psi_at(const std::vector<double>& psi, double lo, double step, double x) {
  if (x <= lo) return 0.0;
  const double top = lo + step * static_cast<double>(psi.size() - 1);
  if (x >= top) return psi.back() + (x - top);
  const double t = (x - lo) / step;
  const std::size_t j = static_cast<std::size_t>(t);
  const double f = t - static_cast<double>(j);
  return psi[j] * (1.0 - f) + psi[j + 1] * f;
}

}  // namespace

std::vector<SpaStrategy> spa_solve(const std::vector<SpaFamily>& families, const SpaConfig& cfg) {
  if (families.empty()) throw InputError("spa_solve: no bidder families");
  if (cfg.thetaGrid < 1 || cfg.bidGrid < 2) throw InputError("spa_solve: grid sizes invalid");
  if (!(cfg.damping > 0.0 && cfg.damping < 1.0))
    throw InputError("spa_solve: damping must lie in (0,1)");

  const std::size_t Fn = families.size();
  const int K = cfg.thetaGrid;
  const std::size_t B = static_cast<std::size_t>(cfg.bidGrid);
  const int Q = cfg.valueQuad;

  // materialize the interim knots and find the bid-grid ceiling
  std::vector<FamilyTable> tab(Fn);
  std::vector<std::vector<Distribution>> laws(Fn);
  double hi = cfg.bidHi;
  for (std::size_t f = 0; f < Fn; ++f) {
    tab[f].count = families[f].count;
    if (tab[f].count < 1) throw InputError("spa_solve: family count must be positive");
    for (int j = 0; j < K; ++j) {
      const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(K);
      BidderType t = families[f].at(u);
      tab[f].thetaKnots.push_back(u);
      tab[f].knotCost.push_back(t.cost);
      tab[f].meanValue.push_back(t.valueDist.mean());
      if (cfg.bidHi <= 0.0) {
        const double q = t.valueDist.quantile(0.9999);
        if (q > hi) hi = q;
        if (tab[f].meanValue.back() > hi) hi = tab[f].meanValue.back();
      }
      laws[f].push_back(std::move(t.valueDist));
    }
  }
  if (!(hi > 0.0)) throw InputError("spa_solve: bid grid ceiling must be positive");

  const double step = hi / static_cast<double>(B - 1);
  std::vector<double> grid(B);
  for (std::size_t b = 0; b < B; ++b) grid[b] = step * static_cast<double>(b);

  for (std::size_t f = 0; f < Fn; ++f) {
    tab[f].cdfOnGrid.resize(K);
    tab[f].quadValues.resize(K);
    for (int j = 0; j < K; ++j) {
      auto& row = tab[f].cdfOnGrid[j];
      row.resize(B);
      for (std::size_t b = 0; b < B; ++b) row[b] = laws[f][j].cdf(grid[b]);
      auto& qv = tab[f].quadValues[j];
      qv.resize(Q);
      for (int q = 0; q < Q; ++q)
        qv[q] = laws[f][j].quantile((static_cast<double>(q) + 0.5) / static_cast<double>(Q));
    }
  }

  // truthful start: every type inspects and bids its value
  std::vector<std::vector<double>> G(Fn, std::vector<double>(B, 0.0));
  for (std::size_t f = 0; f < Fn; ++f)
    for (int j = 0; j < K; ++j)
      for (std::size_t b = 0; b < B; ++b)
        G[f][b] += tab[f].cdfOnGrid[j][b] / static_cast<double>(K);

  std::vector<std::vector<double>> thresholds(Fn, std::vector<double>(K, 0.0));
  std::vector<double> H(B), psi(B), gbr(B);

  double residual = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < cfg.maxIter && !converged; ++it) {
    residual = 0.0;
    for (std::size_t f = 0; f < Fn; ++f) {
      // law of the highest competing bid for one member of family f
      for (std::size_t b = 0; b < B; ++b) {
        double h = 1.0;
        for (std::size_t g = 0; g < Fn; ++g) {
          const int e = tab[g].count - (g == f ? 1 : 0);
          if (e > 0) h *= std::pow(G[g][b], e);
        }
        H[b] = h;
      }
      psi[0] = 0.0;
      for (std::size_t b = 1; b < B; ++b)
        psi[b] = psi[b - 1] + 0.5 * (H[b - 1] + H[b]) * step;

      std::fill(gbr.begin(), gbr.end(), 0.0);
      for (int j = 0; j < K; ++j) {
        // expected spoils of inspecting and bidding the realized value
        double win = 0.0;
        for (int q = 0; q < Q; ++q) win += psi_at(psi, 0.0, step, tab[f].quadValues[j][q]);
        win /= static_cast<double>(Q);

        // threshold: the largest cost at which inspecting still weakly beats
        // bidding the expected value net of cost
        const double mean = tab[f].meanValue[j];
        auto gap = [&](double c) {
          double ni = 0.0;
          if (!cfg.mandatoryPreBidInspection) {
            const double vt = mean - c;
            if (vt > 0.0) ni = psi_at(psi, 0.0, step, vt);
          }
          return (win - c) - ni;
        };
        double cbar;
        if (gap(0.0) < 0.0) {
          cbar = 0.0;
        } else {
          double lo = 0.0, chi = win + 1e-9 * (1.0 + win);
          for (int s = 0; s < 60; ++s) {
            const double mid = 0.5 * (lo + chi);
            if (gap(mid) >= 0.0) lo = mid; else chi = mid;
          }
          cbar = lo;
        }
        thresholds[f][j] = cbar;

        // this type's contribution to the family's bid law
        const double w = 1.0 / static_cast<double>(K);
        if (tab[f].knotCost[j] <= cbar) {
          for (std::size_t b = 0; b < B; ++b) gbr[b] += w * tab[f].cdfOnGrid[j][b];
        } else if (cfg.mandatoryPreBidInspection) {
          for (std::size_t b = 0; b < B; ++b) gbr[b] += w;  // absent: counts as the zero bid
        } else {
          const double vt = mean - tab[f].knotCost[j];
          if (vt <= 0.0) {
            for (std::size_t b = 0; b < B; ++b) gbr[b] += w;
          } else {
            for (std::size_t b = 0; b < B; ++b)
              if (grid[b] >= vt) gbr[b] += w;
          }
        }
      }

      double dist = 0.0;
      for (std::size_t b = 0; b < B; ++b) dist += std::fabs(gbr[b] - G[f][b]);
      dist /= static_cast<double>(B);
      residual = std::max(residual, dist);
      for (std::size_t b = 0; b < B; ++b)
        G[f][b] = (1.0 - cfg.damping) * G[f][b] + cfg.damping * gbr[b];
    }
    converged = residual < cfg.tol;
  }

  std::vector<SpaStrategy> out(Fn);
  for (std::size_t f = 0; f < Fn; ++f) {
    out[f].thetaKnots = std::move(tab[f].thetaKnots);
    out[f].knotCost = std::move(tab[f].knotCost);
    out[f].meanValue = std::move(tab[f].meanValue);
    out[f].thresholdCost = std::move(thresholds[f]);
    out[f].bidGrid = grid;
    out[f].bidCdf = std::move(G[f]);
    out[f].converged = converged;
    out[f].residual = residual;
    out[f].iterations = it;
  }
  return out;
}

AuctionOutcome simulate_spa(const std::vector<SpaStrategy>& strategies,
                            const std::vector<SpaBidderDraw>& draws,
                            bool mandatoryPreBidInspection, RngStream& tieRng,
                            const EventSink& sink) {
  const std::size_t n = draws.size();
  std::vector<double> bids(n, kNoBid), costs(n, 0.0), values(n, 0.0);
  std::vector<char> preInspected(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = draws[i];
    const auto& st = strategies.at(static_cast<std::size_t>(d.family));
    const double c = st.knotCost.at(static_cast<std::size_t>(d.knot));
    costs[i] = c;
    values[i] = d.value;
    if (c <= st.thresholdCost[d.knot]) {
      preInspected[i] = 1;
      bids[i] = d.value;
      emit(sink, "inspect", static_cast<int>(i), 0.0, c);
      emit(sink, "bid", static_cast<int>(i), bids[i], bids[i]);
    } else if (!mandatoryPreBidInspection) {
      const double vt = st.meanValue[d.knot] - c;
      if (vt > 0.0) {
        bids[i] = vt;
        emit(sink, "bid", static_cast<int>(i), bids[i], bids[i]);
      }
    }
  }

  // highest bid wins; exact ties drawn uniformly
  int w = -1;
  double best = kNoBid;
  int nTied = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (bids[i] == kNoBid) continue;
    if (w < 0 || bids[i] > best) {
      best = bids[i];
      w = static_cast<int>(i);
      nTied = 1;
    } else if (bids[i] == best) {
      ++nTied;
      // reservoir pick keeps each tied bidder equally likely
      if (tieRng.next_double() * static_cast<double>(nTied) < 1.0) w = static_cast<int>(i);
    }
  }

  AuctionOutcome out;
  out.utilities.assign(n, 0.0);
  if (w < 0) {
    // pre-bid inspectors still paid their costs
    for (std::size_t i = 0; i < n; ++i)
      if (preInspected[i]) {
        out.inspected.push_back(static_cast<int>(i));
        out.costsPaid += costs[i];
        out.utilities[i] -= costs[i];
      }
    out.welfare = -out.costsPaid;
    emit(sink, "no-sale", -1, 0.0, 0.0);
    return out;
  }

  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (static_cast<int>(i) != w && bids[i] != kNoBid && bids[i] > second) second = bids[i];

  out.winner = w;
  out.price = second;
  out.revenue = second;
  for (std::size_t i = 0; i < n; ++i) {
    const bool insp = preInspected[i] || static_cast<int>(i) == w;
    if (!insp) continue;
    out.inspected.push_back(static_cast<int>(i));
    out.costsPaid += costs[i];
    out.utilities[i] -= costs[i];
  }
  if (!preInspected[w])  // due diligence happens on acquisition
    emit(sink, "inspect", w, second, costs[w]);
  out.utilities[w] += values[w] - second;
  out.welfare = values[w] - out.costsPaid;
  emit(sink, "award", w, second, second);
  return out;
}

// ---------------------------------------------------------------------------
// Sequential posted price.
// ---------------------------------------------------------------------------

PostedPriceResult posted_price_sequential(const std::vector<BidderType>& bidders,
                                          RngStream& rng, std::size_t nDraws) {
  if (bidders.empty()) throw InputError("posted_price_sequential: no bidders");
  if (nDraws < 2) throw InputError("posted_price_sequential: need at least two draws");
  const std::size_t n = bidders.size();
  std::vector<double> strikes(n);
  for (std::size_t i = 0; i < n; ++i)
    strikes[i] = strike_price(bidders[i].valueDist, bidders[i].cost);

  // price: median of the best covered call
  RngStream priceRng = rng.substream(1);
  std::vector<double> best(nDraws);
  for (std::size_t d = 0; d < nDraws; ++d) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double k = covered_call_value(strikes[i], bidders[i].valueDist.sample_one(priceRng));
      if (k > m) m = k;
    }
    best[d] = m;
  }
  PostedPriceResult res;
  res.price = sample_quantile(best, 0.5);

  // sequential visits on fresh draws
  RngStream simRng = rng.substream(2);
  OnlineMeanVar z, welf, mx, margin;
  std::size_t sold = 0;
  std::vector<double> vs(n);
  for (std::size_t d = 0; d < nDraws; ++d) {
    for (std::size_t i = 0; i < n; ++i) vs[i] = bidders[i].valueDist.sample_one(simRng);
    double costs = 0.0, zd = 0.0, vWin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (strikes[i] < res.price) continue;  // would never accept: skip, no cost
      costs += bidders[i].cost;
      const double k = covered_call_value(strikes[i], vs[i]);
      if (k >= res.price) {
        zd = k;
        vWin = vs[i];
        ++sold;
        break;
      }
    }
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      m = std::max(m, covered_call_value(strikes[i], vs[i]));
    z.add(zd);
    welf.add(vWin - costs);
    mx.add(m);
    margin.add(zd - 0.5 * m);
  }
  res.winnerKappa = z.estimate();
  res.realizedWelfare = welf.estimate();
  res.maxKappa = mx.estimate();
  res.halfBoundMargin = margin.estimate();
  res.saleProbability = static_cast<double>(sold) / static_cast<double>(nDraws);
  return res;
}

// ---------------------------------------------------------------------------
// Sequential incumbent/knockout bargaining.
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void unscripted(const BkrsNode& node) {
  std::ostringstream os;
  os << "bkrs: no scripted decision at node {"
     << (node.kind == BkrsNode::Arrival ? "arrival" : "knockout") << ", bidder " << node.bidder
     << (node.asIncumbent ? " (incumbent)" : "") << ", standing price " << node.standingPrice
     << "}";
  throw SimulationError(os.str());
}

}  // namespace

AuctionOutcome simulate_bkrs(const BkrsScript& script, const std::vector<int>& order,
                             double reserve, const std::vector<double>& values,
                             const std::vector<double>& costs, const EventSink& sink) {
  const std::size_t n = values.size();
  if (costs.size() != n) throw InputError("simulate_bkrs: value/cost lists disagree");
  for (int b : order)
    if (b < 0 || static_cast<std::size_t>(b) >= n)
      throw InputError("simulate_bkrs: order refers to an unknown bidder");

  AuctionOutcome out;
  out.utilities.assign(n, 0.0);
  std::vector<char> inspected(n, 0);
  double standing = reserve;
  int incumbent = -1;

  auto inspect = [&](int b) {
    if (inspected[b]) return;
    inspected[b] = 1;
    out.inspected.push_back(b);
    out.costsPaid += costs[b];
    out.utilities[b] -= costs[b];
    emit(sink, "inspect", b, standing, costs[b]);
  };
  auto seen = [&](int b) -> std::optional<double> {
    if (inspected[b]) return values[b];
    return std::nullopt;
  };
  auto ask = [&](const BkrsNode& node) -> BkrsAction {
    auto a = script(node);
    if (!a) unscripted(node);
    return *a;
  };

  for (int b : order) {
    BkrsNode node{BkrsNode::Arrival, b, standing, incumbent >= 0, false, seen(b)};
    BkrsAction act = ask(node);
    if (act.inspect && !inspected[b]) {
      inspect(b);
      node.value = seen(b);
      act = ask(node);  // decide again with the value in hand
    }
    if (!act.enter) continue;

    if (incumbent < 0) {
      incumbent = b;
      standing = reserve;  // the entering bid
      emit(sink, "bid", b, standing, standing);
      continue;
    }

    // knockout: open raising resolves at the loser's maximum willingness
    const double capCh =
        ask(BkrsNode{BkrsNode::Knockout, b, standing, true, false, seen(b)}).cap;
    const double capIn =
        ask(BkrsNode{BkrsNode::Knockout, incumbent, standing, true, true, seen(incumbent)}).cap;
    if (capCh > capIn) {
      standing = std::max(standing, capIn);
      incumbent = b;
    } else {
      standing = std::max(standing, capCh);
    }
    emit(sink, "bid", incumbent, standing, standing);
  }

  if (incumbent >= 0) {
    inspect(incumbent);  // taking the object requires knowing the match
    out.winner = incumbent;
    out.price = standing;
    out.revenue = standing;
    out.utilities[incumbent] += values[incumbent] - standing;
    out.welfare = values[incumbent] - out.costsPaid;
    emit(sink, "award", incumbent, standing, standing);
  } else {
    out.welfare = -out.costsPaid;
    emit(sink, "no-sale", -1, 0.0, 0.0);
  }
  std::sort(out.inspected.begin(), out.inspected.end());
  return out;
}

// ---------------------------------------------------------------------------
// Virtual-value benchmark.
// ---------------------------------------------------------------------------

MyersonResult myerson_revenue_and_reserves(const std::vector<Distribution>& dists,
                                           RngStream& rng, std::size_t nDraws) {
  if (dists.empty()) throw InputError("myerson: no bidders");
  const std::size_t n = dists.size();
  MyersonResult res;
  res.reserves.resize(n);

  std::vector<char> pointMass(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto atoms = dists[i].atoms();
    if (atoms && atoms->size() == 1) {
      // a known value is fully extractable
      pointMass[i] = 1;
      res.reserves[i] = (*atoms)[0].first;
      continue;
    }
    auto phi = [&](double x) {
      const double f = dists[i].pdf(x);
      return x - (1.0 - dists[i].cdf(x)) / std::max(f, 1e-300);
    };
    const double qlo = dists[i].quantile(1e-4), qhi = dists[i].quantile(1.0 - 1e-4);
    const int M = 512;
    double prev = phi(qlo);
    double lo = qlo, hi = qhi;
    bool bracket = prev >= 0.0;  // phi already nonnegative at the low end
    if (bracket) lo = hi = qlo;
    for (int j = 1; j < M; ++j) {
      const double x = qlo + (qhi - qlo) * static_cast<double>(j) / static_cast<double>(M - 1);
      const double p = phi(x);
      if (p < prev - 1e-9 * (1.0 + std::fabs(prev))) res.regularOnGrid = false;
      if (!bracket && p >= 0.0) {
        lo = qlo + (qhi - qlo) * static_cast<double>(j - 1) / static_cast<double>(M - 1);
        hi = x;
        bracket = true;  // keep the first crossing when phi is regular
      }
      prev = p;
    }
    if (!bracket) {
      // phi negative throughout the grid: post at the top of the range
      res.reserves[i] = qhi;
      continue;
    }
    for (int s = 0; s < 100 && hi - lo > 1e-12 * (1.0 + std::fabs(hi)); ++s) {
      const double mid = 0.5 * (lo + hi);
      if (phi(mid) < 0.0) lo = mid; else hi = mid;
    }
    res.reserves[i] = 0.5 * (lo + hi);
  }

  OnlineMeanVar acc;
  for (std::size_t d = 0; d < nDraws; ++d) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = dists[i].sample_one(rng);
      double p;
      if (pointMass[i]) {
        p = x;
      } else {
        const double f = dists[i].pdf(x);
        p = x - (1.0 - dists[i].cdf(x)) / std::max(f, 1e-300);
      }
      if (p > m) m = p;
    }
    acc.add(m);
  }
  res.revenue = acc.estimate();
  return res;
}

}  // namespace pandora::mech
