#include "pandora/fpa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

#include "pandora/common.hpp"

namespace pandora::fpa {

double BidFunction::operator()(double v) const {
  if (values.empty()) throw InputError("bid function: empty");
  if (v <= values.front()) return bids.front();
  if (v >= values.back()) return bids.back();
  const auto it = std::upper_bound(values.begin(), values.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - values.begin());
  const double x0 = values[i - 1], x1 = values[i];
  const double t = (v - x0) / (x1 - x0);
  return bids[i - 1] + t * (bids[i] - bids[i - 1]);
}

namespace {

void enforce_shape(std::vector<double>& bids, const std::vector<double>& values) {
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bids.size(); ++i) {
    running = std::max(running, bids[i]);
    bids[i] = std::min(running, values[i]);
    running = bids[i];
  }
}

// b(v) = v - int_{v0}^{v} F^{n-1} dx / F(v)^{n-1}: the symmetric equilibrium
// schedule for n bidders sharing law F, integrated from the first knot with a
// refined trapezoid rule
std::vector<double> equilibrium_bids_on_knots(const Distribution& d, int n,
                                              const std::vector<double>& knots) {
  const double ex = static_cast<double>(n - 1);
  auto fpow = [&](double x) { return std::pow(d.cdf(x), ex); };

  std::vector<double> bids(knots.size());
  double integral = 0.0;
  double prevF = fpow(knots[0]);
  bids[0] = knots[0];
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double a = knots[i - 1], b = knots[i];
    const int sub = 4;
    double x0 = a, f0 = prevF;
    for (int s = 1; s <= sub; ++s) {
      const double x1 = a + (b - a) * s / sub;
      const double f1 = fpow(x1);
      integral += 0.5 * (f0 + f1) * (x1 - x0);
      x0 = x1;
      f0 = f1;
    }
    prevF = f0;
    const double Fv = fpow(b);
    bids[i] = Fv > 0.0 ? b - integral / Fv : b;
  }
  enforce_shape(bids, knots);
  return bids;
}

}  // namespace

BidFunction symmetric_fpa(const Distribution& d, int n, int gridSize) {
  return symmetric_fpa_with_reserve(d, n, -std::numeric_limits<double>::infinity(),
                                    gridSize);
}

BidFunction symmetric_fpa_with_reserve(const Distribution& d, int n, double reserve,
                                       int gridSize) {
  if (n < 2) throw InputError("symmetric equilibrium: needs n >= 2 bidders");
  if (gridSize < 2) throw InputError("symmetric equilibrium: grid too small");

  double lo = d.support_lo();
  double hi = d.support_hi();
  if (!std::isfinite(lo)) lo = d.quantile(1e-9);
  if (!std::isfinite(hi)) hi = d.quantile(1.0 - 1e-7);
  if (std::isfinite(reserve)) lo = std::max(lo, reserve);
  if (lo >= hi) {
    // law degenerate (or fully below the reserve): everyone bids the point
    const double v = std::max(hi, lo);
    BidFunction out;
    out.values = {v};
    out.bids = {v};
    out.degenerate = true;
    return out;
  }

  // quantile-spaced knots so resolution follows the mass; endpoints pinned
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(gridSize));
  knots.push_back(lo);
  for (int i = 1; i + 1 < gridSize; ++i) {
    const double q = static_cast<double>(i) / (gridSize - 1);
    double v = d.quantile(std::min(std::max(q, 1e-12), 1.0 - 1e-12));
    knots.push_back(std::min(std::max(v, lo), hi));
  }
  knots.push_back(hi);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  if (knots.size() == 1) {
    BidFunction out;
    out.values = knots;
    out.bids = knots;
    out.degenerate = true;
    return out;
  }

  BidFunction out;
  out.values = knots;
  out.bids = equilibrium_bids_on_knots(d, n, knots);
  return out;
}

namespace {

struct Kind {
  Distribution dist;
  int count = 0;
  std::vector<double> knots;    // value grid: the bid function domain
  std::vector<double> bids;     // current bid per knot
  double lo = 0.0, hi = 0.0;
  bool unsellable = false;
};

// P(bid(value) < x) for each grid point, treating the schedule as the
// piecewise-linear interpolation over the knots (so one bidder's bid law is
// continuous wherever the schedule strictly increases). A discrete
// atoms-at-knots CDF is deliberately avoided: best responses against atoms
// undercut them by one grid cell and the iteration cycles instead of settling.
std::vector<double> strict_cdf_on_grid(const Kind& k, const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  const auto& bids = k.bids;
  const auto& knots = k.knots;
  const std::size_t n = bids.size();
  std::size_t i = 0;  // first knot whose bid is >= the current grid point
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid[j];
    // values below the lowest knot clamp to the bottom bid, never less
    if (x <= bids.front()) { out[j] = 0.0; continue; }
    // the untruncated upper tail clamps to the top bid, which loses ties
    if (x > bids.back()) { out[j] = 1.0; continue; }
    while (i < n && bids[i] < x) ++i;
    double vStar;
    if (bids[i] == x) {
      vStar = knots[i];  // leftmost value on a flat stretch: flats bid >= x
    } else {
      vStar = knots[i - 1] + (knots[i] - knots[i - 1]) * (x - bids[i - 1]) /
                                 (bids[i] - bids[i - 1]);
    }
    out[j] = std::max(0.0, k.dist.cdf(vStar) - k.dist.atom_at(vStar));
  }
  return out;
}

// Damped discretized best responses on the common bid grid with monotone
// projection. Returns true on convergence; false when a limit cycle or the
// iteration budget is hit, so the caller can switch methods.
bool best_response_iteration(std::vector<Kind>& kinds, const std::vector<double>& grid,
                             const FpaConfig& cfg, int& iterOut, double& residOut) {
  const std::size_t K = kinds.size();
  const std::size_t B = grid.size();
  const double range = grid.back() - grid.front();
  const double cell = grid[1] - grid[0];

  double lambda = cfg.damping;
  double prevResidual = std::numeric_limits<double>::infinity();
  int goodRun = 0;
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.maxIter));

  for (int iter = 0; iter < cfg.maxIter; ++iter) {
    std::vector<std::vector<double>> gcdf(K);
    for (std::size_t k = 0; k < K; ++k) gcdf[k] = strict_cdf_on_grid(kinds[k], grid);

    double residual = 0.0;
    std::vector<std::vector<double>> newBids(K);
    for (std::size_t k = 0; k < K; ++k) {
      if (kinds[k].unsellable) continue;
      // win probability bidding grid[j]: every rival strictly below (ties lose)
      std::vector<double> win(B);
      for (std::size_t j = 0; j < B; ++j) {
        double w = 1.0;
        for (std::size_t m = 0; m < K; ++m) {
          const int e = kinds[m].count - (m == k ? 1 : 0);
          if (e == 0) continue;
          const double gm = gcdf[m][j];
          if (gm == 0.0) { w = 0.0; break; }
          w *= std::pow(gm, e);
        }
        win[j] = w;
      }
      auto& kd = kinds[k];
      std::vector<double> br(kd.knots.size());
      for (std::size_t u = 0; u < kd.knots.size(); ++u) {
        const double v = kd.knots[u];
        double bestU = 0.0;
        double bestB = grid[0];
        for (std::size_t j = 0; j < B && grid[j] <= v; ++j) {
          const double util = win[j] * (v - grid[j]);
          if (util > bestU) {
            bestU = util;
            bestB = grid[j];
          }
        }
        br[u] = bestB;
      }
      newBids[k].resize(kd.knots.size());
      for (std::size_t u = 0; u < kd.knots.size(); ++u)
        newBids[k][u] = (1.0 - lambda) * kd.bids[u] + lambda * br[u];
      enforce_shape(newBids[k], kd.knots);
      for (std::size_t u = 0; u < kd.knots.size(); ++u)
        residual = std::max(residual, std::fabs(newBids[k][u] - kd.bids[u]));
    }
    for (std::size_t k = 0; k < K; ++k)
      if (!kinds[k].unsellable) kinds[k].bids = std::move(newBids[k]);

    // Best responses are quantized to the bid grid, so near a fixed point the
    // damped iterate keeps moving by about lambda * cell; accept that floor as
    // converged (the eps-best-response certificate is the real quality gate).
    const double tolEff =
        std::max(cfg.tol * std::max(1.0, range), 1.1 * lambda * cell);
    if (residual < tolEff) {
      iterOut = iter + 1;
      residOut = residual;
      return true;
    }
    history.push_back(residual);
    // no real progress across a 30-iteration window: a limit cycle, not a path
    if (iter >= 40 && residual > 0.6 * history[static_cast<std::size_t>(iter - 30)] &&
        residual > 50.0 * tolEff) {
      iterOut = iter + 1;
      residOut = residual;
      return false;
    }
    if (residual > prevResidual) {
      lambda = std::max(lambda * 0.5, 0.1);  // overshoot: damp harder
      goodRun = 0;
    } else if (++goodRun >= 5) {
      lambda = std::min(cfg.damping, lambda * 1.5);  // settling: speed back up
      goodRun = 0;
    }
    prevResidual = residual;
    iterOut = iter + 1;
    residOut = residual;
  }
  return false;
}

// One backward pass of the first-order-condition system from a trial top bid.
// An active kind's inverse schedule v_k(b) falls from its cap as b descends,
//   dv_k/db = (F_k/f_k) (T - 1/(v_k - b)),  T = [sum_m n_m/(v_m - b)]/(N - 1)
// with the sums over active kinds (marginal win-probability gain times surplus
// equals win probability). A kind whose cap is too low for the current range
// stays pinned at that cap and joins once T has risen to 1/(cap - b) -- T is
// continuous across the switch, its log-CDF slope starting at exactly zero.
// The right top bid closes every active gap v_k - b exactly at the bottom b0.
struct Shot {
  int verdict = 0;  // 0: collapsed above b0 (top bid too high)
                    // 1: reached b0 with slack (top bid too low)
                    // 2: on target
  double bStop = 0.0;
  std::vector<double> bs;               // recorded bid levels, descending
  std::vector<std::vector<double>> vs;  // vs[s][i]: kind s value at bs[i]
};

Shot shoot_down(const std::vector<Kind*>& sell, double bTop, double mStar,
                double scale, bool record) {
  const std::size_t S = sell.size();
  std::vector<double> v(S);
  std::vector<char> active(S, 0);
  for (std::size_t s = 0; s < S; ++s) v[s] = sell[s]->hi;

  const double collapseEps = 1e-8 * scale;
  const double floorEps = 1e-9 * scale;
  const double gapFloor = 1e-16 * scale;
  const double tiny = 1e-300;
  const double tolB = 1e-7 * scale;

  Shot shot;

  // The serious range ends at the precomputed bottom bid mStar: kinds whose
  // support reaches below it close their gap v - b there, while a kind whose
  // support starts above rides the collapse down to its own floor. The shot
  // is judged purely by where its terminal event lands relative to mStar.
  auto classify = [&](double b) {
    if (b > mStar + tolB) return 0;
    if (b < mStar - tolB) return 1;
    return 2;
  };

  // keep at least two bidders active (largest caps first), then admit every
  // pinned kind whose joining condition T >= 1/(cap - b) has been reached
  auto refresh_active = [&](double b) -> bool {
    for (bool changed = true; changed;) {
      changed = false;
      int cnt = 0;
      double num = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        if (!active[s]) continue;
        cnt += sell[s]->count;
        num += static_cast<double>(sell[s]->count) / std::max(v[s] - b, tiny);
      }
      if (cnt < 2) {
        std::size_t pick = S;
        double bestGap = 0.0;
        for (std::size_t s = 0; s < S; ++s)
          if (!active[s] && v[s] - b > bestGap) {
            bestGap = v[s] - b;
            pick = s;
          }
        if (pick == S) return false;  // nobody left with surplus at this bid
        active[pick] = 1;
        changed = true;
        continue;
      }
      const double T = num / static_cast<double>(cnt - 1);
      for (std::size_t s = 0; s < S; ++s) {
        if (active[s]) continue;
        const double gap = v[s] - b;
        if (gap > tiny && T >= 1.0 / gap) {
          active[s] = 1;
          changed = true;
        }
      }
    }
    return true;
  };

  // false when a stage lands on the wrong side of the diagonal (caller must
  // shrink the step)
  auto rhs = [&](double b, const std::vector<double>& vv, std::vector<double>& dv) {
    int cnt = 0;
    double num = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      if (!active[s]) continue;
      if (vv[s] - b <= gapFloor) return false;
      cnt += sell[s]->count;
      num += static_cast<double>(sell[s]->count) / (vv[s] - b);
    }
    const double T = num / static_cast<double>(std::max(cnt - 1, 1));
    for (std::size_t s = 0; s < S; ++s) {
      if (!active[s]) {
        dv[s] = 0.0;
        continue;
      }
      const double Fv = sell[s]->dist.cdf(vv[s]);
      const double fv = sell[s]->dist.pdf(vv[s]);
      dv[s] = (Fv / std::max(fv, tiny)) * (T - 1.0 / (vv[s] - b));
    }
    return true;
  };

  double b = bTop;
  if (!refresh_active(b)) {
    shot.bStop = b;
    shot.verdict = 0;
    return shot;
  }
  if (record) {
    shot.bs.push_back(b);
    shot.vs.assign(S, {});
    for (std::size_t s = 0; s < S; ++s) shot.vs[s].push_back(v[s]);
  }
  std::vector<double> k1(S), k2(S), k3(S), k4(S), tmp(S);
  for (int step = 0; step < 200000; ++step) {
    double gap = std::numeric_limits<double>::infinity();
    bool floored = false;
    for (std::size_t s = 0; s < S; ++s) {
      if (!active[s]) continue;
      gap = std::min(gap, v[s] - b);
      if (v[s] <= sell[s]->lo + floorEps) floored = true;
    }
    if (gap <= collapseEps || floored || b < mStar - tolB) {
      shot.bStop = b;
      shot.verdict = classify(b);
      return shot;
    }

    double h = std::min(0.08 * gap, 2e-3 * (bTop - mStar));
    rhs(b, v, k1);
    // the system stiffens as gaps close: reject any step whose stages cross
    // the diagonal or that moves a schedule more than half its gap, halving h
    bool accepted = false;
    while (!accepted) {
      bool ok = true;
      for (std::size_t s = 0; s < S; ++s) tmp[s] = v[s] - 0.5 * h * k1[s];
      ok = rhs(b - 0.5 * h, tmp, k2);
      if (ok) {
        for (std::size_t s = 0; s < S; ++s) tmp[s] = v[s] - 0.5 * h * k2[s];
        ok = rhs(b - 0.5 * h, tmp, k3);
      }
      if (ok) {
        for (std::size_t s = 0; s < S; ++s) tmp[s] = v[s] - h * k3[s];
        ok = rhs(b - h, tmp, k4);
      }
      if (ok) {
        for (std::size_t s = 0; s < S; ++s) {
          tmp[s] = v[s] - h / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
          if (!std::isfinite(tmp[s]) ||
              (active[s] && std::abs(tmp[s] - v[s]) > 0.5 * (v[s] - b)))
            ok = false;
        }
      }
      if (ok) {
        accepted = true;
      } else {
        h *= 0.5;
        if (h < 1e-14 * scale) {  // pinched against the diagonal: call it closed
          shot.bStop = b;
          shot.verdict = classify(b);
          return shot;
        }
      }
    }
    for (std::size_t s = 0; s < S; ++s) {
      v[s] = tmp[s];
      // an active kind pushed past its cap belongs outside the range: pin it
      if (active[s] && v[s] >= sell[s]->hi) {
        v[s] = sell[s]->hi;
        active[s] = 0;
      }
    }
    b -= h;
    if (!refresh_active(b)) {
      shot.bStop = b;
      shot.verdict = 0;
      return shot;
    }
    if (record) {
      shot.bs.push_back(b);
      for (std::size_t s = 0; s < S; ++s) shot.vs[s].push_back(v[s]);
    }
  }
  shot.bStop = b;
  shot.verdict = classify(b);
  return shot;
}

// bisect the common top bid, then invert the recorded trajectories onto each
// kind's value knots
void shooting_solve(const std::vector<Kind*>& sell, double scale, int& iterOut,
                    double& residOut) {
  double loMin = std::numeric_limits<double>::infinity();
  double capMax = -std::numeric_limits<double>::infinity();
  const Kind* star = sell.front();
  for (const Kind* k : sell) {
    loMin = std::min(loMin, k->lo);
    capMax = std::max(capMax, k->hi);
    if (k->lo > star->lo) star = k;
  }

  // Bottom of the serious range: below it everyone bids their own value (they
  // can never win), so the lowest type of the highest-floored kind faces only
  // primitive CDFs and its best dip pins the common bottom bid directly:
  //   mStar = argmax (loStar - b) * prod_k F_k(b)^(count_k)   over rivals k.
  // With a shared floor (or a twin in the same kind) the product vanishes
  // below loStar and the argmax sits at loStar itself.
  const double loStar = star->lo;
  auto dip = [&](double b) {
    double phi = loStar - b;
    for (const Kind* k : sell) {
      const int e = k->count - (k == star ? 1 : 0);
      if (e > 0) phi *= std::pow(k->dist.cdf(b), e);
    }
    return phi;
  };
  double mStar = loStar;
  if (loStar > loMin) {
    const int M = 4000;
    double best = 0.0;
    int bestI = M;
    for (int i = 0; i <= M; ++i) {
      const double b = loMin + (loStar - loMin) * i / M;
      const double phi = dip(b);
      if (phi > best) {
        best = phi;
        bestI = i;
      }
    }
    if (bestI < M) {
      double lo = loMin + (loStar - loMin) * std::max(bestI - 1, 0) / M;
      double hi = loMin + (loStar - loMin) * std::min(bestI + 1, M) / M;
      for (int it = 0; it < 80; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (dip(m1) < dip(m2)) lo = m1;
        else hi = m2;
      }
      mStar = 0.5 * (lo + hi);
    }
  }
  // the top bid never reaches the second-highest cap (a winner there would be
  // paying above every remaining rival's value)
  std::vector<double> caps;
  for (const Kind* k : sell) caps.insert(caps.end(), k->count, k->hi);
  std::sort(caps.begin(), caps.end(), std::greater<>());
  const double capSecond = caps.size() >= 2 ? caps[1] : capMax;
  double loB = mStar + 1e-9 * scale;
  double hiB = capSecond - 1e-9 * scale;
  if (!(loB < hiB))
    throw SolverError("equilibrium: no room between bottom bid and value caps");

  int used = 0;
  for (int it = 0; it < 200 && hiB - loB > 1e-13 * scale; ++it) {
    const double mid = 0.5 * (loB + hiB);
    const Shot probe = shoot_down(sell, mid, mStar, scale, false);
    ++used;
    if (probe.verdict == 0) hiB = mid;
    else if (probe.verdict == 1) loB = mid;
    else {
      loB = hiB = mid;
      break;
    }
  }
  const double bTop = 0.5 * (loB + hiB);
  const Shot fin = shoot_down(sell, bTop, mStar, scale, true);
  const double mStop = std::min(fin.bStop, mStar);
  iterOut = used;
  residOut = hiB - loB;

  for (std::size_t s = 0; s < sell.size(); ++s) {
    Kind& kd = *sell[s];
    // walk down from the top keeping strictly falling values; a stretch pinned
    // at the cap collapses to its lowest bid, the point where the kind enters
    std::vector<double> vD, bD;
    for (std::size_t i = 0; i < fin.bs.size(); ++i) {
      const double vi = fin.vs[s][i];
      if (vD.empty() || vi < vD.back()) {
        vD.push_back(vi);
        bD.push_back(fin.bs[i]);
      } else if (vi == vD.back()) {
        bD.back() = fin.bs[i];
      }
    }
    // ascending (value, bid) pairs, anchored at the bottom of the serious
    // range; a kind whose support starts above mStop pastes onto it with a
    // flat stretch (its lowest types all bid mStop)
    std::vector<double> vA{mStop}, bA{mStop};
    for (std::size_t i = vD.size(); i-- > 0;) {
      if (vD[i] > vA.back()) {
        vA.push_back(vD[i]);
        bA.push_back(bD[i]);
      }
    }
    kd.bids.resize(kd.knots.size());
    std::size_t j = 0;
    for (std::size_t u = 0; u < kd.knots.size(); ++u) {
      const double x = kd.knots[u];
      if (x <= vA.front()) {
        kd.bids[u] = x;  // below the bottom bid: can't win, bid value
      } else if (x >= vA.back()) {
        kd.bids[u] = bA.back();
      } else {
        while (j + 1 < vA.size() && vA[j + 1] < x) ++j;
        const double t = (x - vA[j]) / (vA[j + 1] - vA[j]);
        kd.bids[u] = bA[j] + t * (bA[j + 1] - bA[j]);
      }
    }
    enforce_shape(kd.bids, kd.knots);
  }
}

}  // namespace

EquilibriumProfile asymmetric_fpa_kinds(const std::vector<Distribution>& kindDists,
                                        const std::vector<int>& counts,
                                        const FpaConfig& cfg) {
  if (kindDists.size() != counts.size())
    throw InputError("equilibrium: kind/count lists differ in length");
  if (kindDists.empty()) throw InputError("equilibrium: no bidders");
  if (cfg.gridSize < 2 || cfg.bidGridSize < 2)
    throw InputError("equilibrium: grid too small");
  if (!(cfg.truncationQuantile > 0.0 && cfg.truncationQuantile < 1.0))
    throw InputError("equilibrium: truncation quantile must lie in (0,1)");

  int total = 0;
  for (int c : counts) {
    if (c < 1) throw InputError("equilibrium: kind counts must be >= 1");
    total += c;
  }
  if (total < 2) throw InputError("equilibrium: needs at least 2 bidders");

  const std::size_t K = kindDists.size();
  const std::size_t V = static_cast<std::size_t>(cfg.gridSize);
  std::vector<Kind> kinds;
  kinds.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    Kind kd{kindDists[k], counts[k], {}, {}, 0.0, 0.0, false};
    const double q0 = cfg.truncationQuantile;
    kd.knots.reserve(V);
    for (std::size_t i = 0; i < V; ++i) {
      const double q = q0 * (static_cast<double>(i) + 0.5) / static_cast<double>(V);
      const double v = kd.dist.quantile(q);
      if (kd.knots.empty() || v > kd.knots.back()) kd.knots.push_back(v);
    }
    kd.lo = kd.knots.front();
    kd.hi = kd.knots.back();
    kinds.push_back(std::move(kd));
  }

  // a kind whose whole (truncated) support sits below some rival's minimum can
  // never win; it bids truthfully and is excluded from the solve
  std::vector<int> unsellable;
  for (std::size_t k = 0; k < K; ++k) {
    double rivalLo = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < K; ++m) {
      if (m == k && kinds[m].count == 1) continue;
      rivalLo = std::max(rivalLo, kinds[m].lo);
    }
    if (kinds[k].hi <= rivalLo) {
      kinds[k].unsellable = true;
      unsellable.push_back(static_cast<int>(k));
    }
  }

  double gLo = std::numeric_limits<double>::infinity();
  double gHi = -std::numeric_limits<double>::infinity();
  for (const auto& k : kinds) {
    gLo = std::min(gLo, k.lo);
    gHi = std::max(gHi, k.hi);
  }
  if (!(gLo < gHi)) throw InputError("equilibrium: all value mass at a single point");
  const std::size_t B = static_cast<std::size_t>(cfg.bidGridSize);
  std::vector<double> grid(B);
  for (std::size_t j = 0; j < B; ++j)
    grid[j] = gLo + (gHi - gLo) * static_cast<double>(j) / static_cast<double>(B - 1);

  // start from proportional shading toward the common low end; a kind that can
  // never win just bids its value
  for (auto& k : kinds) {
    if (k.unsellable) {
      k.bids = k.knots;
      continue;
    }
    k.bids.resize(k.knots.size());
    const double shade = static_cast<double>(total - 1) / static_cast<double>(total);
    for (std::size_t u = 0; u < k.knots.size(); ++u)
      k.bids[u] = gLo + shade * (k.knots[u] - gLo);
    enforce_shape(k.bids, k.knots);
  }

  std::vector<Kind*> sell;
  for (auto& k : kinds)
    if (!k.unsellable) sell.push_back(&k);
  if (sell.empty()) throw SolverError("equilibrium: no kind can ever win");
  const double scale = gHi - gLo;

  int iterations = 0;
  double residual = 0.0;
  if (sell.size() == 1) {
    Kind& kd = *sell[0];
    if (kd.count >= 2) {
      // one law competes only with itself: the classic symmetric schedule
      kd.bids = equilibrium_bids_on_knots(kd.dist, kd.count, kd.knots);
    } else {
      // alone against rivals who never top their own ceilings
      double rivalTop = -std::numeric_limits<double>::infinity();
      for (const auto& k : kinds)
        if (k.unsellable) rivalTop = std::max(rivalTop, k.hi);
      for (std::size_t u = 0; u < kd.knots.size(); ++u)
        kd.bids[u] = std::min(kd.knots[u], rivalTop);
    }
  } else if (!best_response_iteration(kinds, grid, cfg, iterations, residual)) {
    // oscillation: fall back to boundary shooting on the first-order conditions
    try {
      shooting_solve(sell, scale, iterations, residual);
    } catch (const InputError&) {
      throw SolverError(
          "equilibrium: best responses oscillate and the value law has no "
          "density for boundary shooting");
    }
  }

  EquilibriumProfile out;
  out.iterations = iterations;
  out.residual = residual;
  out.truncationQuantile = cfg.truncationQuantile;
  out.unsellableKinds = std::move(unsellable);
  for (std::size_t k = 0; k < K; ++k) {
    BidFunction fn;
    fn.values = kinds[k].knots;
    fn.bids = kinds[k].bids;
    fn.degenerate = fn.values.size() == 1;
    for (int c = 0; c < kinds[k].count; ++c) {
      out.bidders.push_back(fn);
      out.kindOf.push_back(static_cast<int>(k));
    }
  }
  return out;
}

EquilibriumProfile asymmetric_fpa(const std::vector<Distribution>& dists,
                                  const FpaConfig& cfg) {
  std::vector<Distribution> kindDists;
  std::vector<int> counts;
  for (const auto& d : dists) {
    bool found = false;
    for (std::size_t k = 0; k < kindDists.size(); ++k) {
      if (kindDists[k].same_object(d)) {
        ++counts[k];
        found = true;
        break;
      }
    }
    if (!found) {
      kindDists.push_back(d);
      counts.push_back(1);
    }
  }
  return asymmetric_fpa_kinds(kindDists, counts, cfg);
}

namespace {

// P(fn(V) < b): invert the monotone bid schedule, subtracting any atom that
// bids exactly b
double strict_bid_cdf(const BidFunction& fn, const Distribution& d, double b) {
  if (b > fn.bids.back()) return 1.0;
  // values below the lowest knot clamp to the bottom bid, never less
  if (b <= fn.bids.front()) return 0.0;
  const auto it = std::lower_bound(fn.bids.begin(), fn.bids.end(), b);
  const std::size_t i = static_cast<std::size_t>(it - fn.bids.begin());
  double vStar;
  if (fn.bids[i] == b) {
    vStar = fn.values[i];
  } else {
    const double b0 = fn.bids[i - 1], b1 = fn.bids[i];
    const double v0 = fn.values[i - 1], v1 = fn.values[i];
    vStar = v0 + (v1 - v0) * (b - b0) / (b1 - b0);
  }
  return std::max(0.0, d.cdf(vStar) - d.atom_at(vStar));
}

// upper envelope of lines y = w*v - w*g (nondecreasing slopes), queried at v
struct Envelope {
  std::vector<double> slope, icept, from;  // from[i]: envelope leader for v >= from[i]

  void build(const std::vector<double>& w, const std::vector<double>& g) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double s = w[j];
      const double c = -w[j] * g[j];
      if (!slope.empty() && s == slope.back()) {
        if (c <= icept.back()) continue;  // parallel and never above
        slope.pop_back();
        icept.pop_back();
        from.pop_back();
      }
      double x = -std::numeric_limits<double>::infinity();
      while (!slope.empty()) {
        // new line takes the lead at x; if that is before the back line ever
        // led, the back line is dominated
        x = (icept.back() - c) / (s - slope.back());
        if (x <= from.back()) {
          slope.pop_back();
          icept.pop_back();
          from.pop_back();
          x = -std::numeric_limits<double>::infinity();
          continue;
        }
        break;
      }
      from.push_back(slope.empty() ? -std::numeric_limits<double>::infinity() : x);
      slope.push_back(s);
      icept.push_back(c);
    }
  }

  double query(double v) const {
    if (slope.empty()) return 0.0;
    const auto it = std::upper_bound(from.begin(), from.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - from.begin()) - 1;
    return slope[i] * v + icept[i];
  }
};

}  // namespace

double verify_eps_br(const EquilibriumProfile& profile,
                     const std::vector<Distribution>& dists, RngStream& rng,
                     std::size_t nMc, int bidGrid) {
  const std::size_t n = profile.bidders.size();
  if (dists.size() != n)
    throw InputError("best-response check: profile/distribution count mismatch");
  if (n < 2) throw InputError("best-response check: needs >= 2 bidders");
  if (bidGrid < 2) throw InputError("best-response check: bid grid too small");

  double gLo = std::numeric_limits<double>::infinity();
  double gHi = -std::numeric_limits<double>::infinity();
  for (const auto& fn : profile.bidders) {
    gLo = std::min(gLo, fn.bids.front());
    gHi = std::max(gHi, fn.values.back());
  }
  std::vector<double> grid(static_cast<std::size_t>(bidGrid));
  for (int j = 0; j < bidGrid; ++j)
    grid[static_cast<std::size_t>(j)] =
        gLo + (gHi - gLo) * static_cast<double>(j) / static_cast<double>(bidGrid - 1);

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // win probability on the candidate grid (rivals strictly below; ties lose)
    std::vector<double> win(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      double w = 1.0;
      for (std::size_t m = 0; m < n && w > 0.0; ++m) {
        if (m == i) continue;
        w *= strict_bid_cdf(profile.bidders[m], dists[m], grid[j]);
      }
      win[j] = w;
    }
    Envelope env;
    env.build(win, grid);

    RngStream sub = rng.substream(1000 + i);
    std::vector<double> vs(nMc);
    dists[i].sample(sub, vs);
    double maxRegret = 0.0;
    for (double v : vs) {
      const double b = profile.bidders[i](v);
      double w = 1.0;
      for (std::size_t m = 0; m < n && w > 0.0; ++m) {
        if (m == i) continue;
        w *= strict_bid_cdf(profile.bidders[m], dists[m], b);
      }
      const double uHave = w * (v - b);
      const double uBest = std::max(0.0, env.query(v));
      maxRegret = std::max(maxRegret, uBest - uHave);
    }
    worst = std::max(worst, maxRegret);
  }
  return worst;
}

void export_profile_csv(const EquilibriumProfile& profile, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f, "bidder,value,bid\n");
  for (std::size_t i = 0; i < profile.bidders.size(); ++i) {
    const auto& fn = profile.bidders[i];
    for (std::size_t u = 0; u < fn.values.size(); ++u)
      std::fprintf(f, "%zu,%.6g,%.6g\n", i, fn.values[u], fn.bids[u]);
  }
  std::fclose(f);
}

}  // namespace pandora::fpa
