#include "pandora/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "pandora/common.hpp"
#include "pandora/fpa.hpp"
#include "pandora/normal.hpp"
#include "pandora/pandora_core.hpp"

namespace pandora::calib {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // golden-ratio rotation step

// Cholesky factor of a validated 2x2 covariance block.
struct Bivariate {
  double meanX = 0.0, meanY = 0.0;
  double l11 = 0.0, l21 = 0.0, l22 = 0.0;
};

Bivariate make_bivariate(double meanX, double meanY, double varX, double varY, double cov,
                         const char* what) {
  auto fail = [&](const char* why) {
    std::ostringstream os;
    os << what << ": covariance block is not positive semidefinite (" << why << ")";
    throw ParameterError(os.str());
  };
  if (!(varX >= 0.0) || !(varY >= 0.0)) fail("negative variance");
  const double scale = std::max({varX, varY, 1e-300});
  if (varX <= 0.0) {
    if (std::fabs(cov) > 1e-12 * scale) fail("covariance with a zero-variance component");
    return {meanX, meanY, 0.0, 0.0, std::sqrt(varY)};
  }
  const double l11 = std::sqrt(varX);
  const double l21 = cov / l11;
  const double rem = varY - l21 * l21;
  if (rem < -1e-12 * scale) fail("correlation exceeds 1 in magnitude");
  return {meanX, meanY, l11, l21, std::sqrt(std::max(rem, 0.0))};
}

std::pair<double, double> biv_from_normals(const Bivariate& b, double z1, double z2) {
  return {b.meanX + b.l11 * z1, b.meanY + b.l21 * z1 + b.l22 * z2};
}

struct StartupStages {
  Bivariate stage0, stage1;
  double sPost = 0.0;  // sd of the inspection-revealed log component
};

StartupStages validate_startup(const StartupParams& p) {
  if (p.nBidders < 1) throw ParameterError("startup: nBidders must be >= 1");
  if (!(p.sigmaV2 >= 0.0) || !(p.sigmaC2 >= 0.0))
    throw ParameterError("startup: variances must be nonnegative");
  if (!(p.rho >= -1.0 && p.rho <= 1.0)) throw ParameterError("startup: rho must lie in [-1, 1]");
  if (!(p.alpha0 >= 0.0 && p.alpha0 <= 1.0 && p.alpha1 >= 0.0 && p.alpha1 <= 1.0))
    throw ParameterError("startup: variance shares must lie in [0, 1]");
  if (p.alpha0 + p.alpha1 > 1.0 + 1e-12)
    throw ParameterError("startup: alpha0 + alpha1 must not exceed 1");

  const double den = p.alpha0 + p.alpha1;
  const double sv = std::sqrt(p.sigmaV2), sc = std::sqrt(p.sigmaC2);
  StartupStages st;
  if (den > 0.0) {
    const double covScale = p.rho * sv * sc / std::sqrt(den);
    st.stage0 = make_bivariate(0.0, p.muC, p.alpha0 * p.sigmaV2, p.alpha0 / den * p.sigmaC2,
                               p.alpha0 * covScale, "startup stage 0");
    st.stage1 = make_bivariate(0.0, 0.0, p.alpha1 * p.sigmaV2, p.alpha1 / den * p.sigmaC2,
                               p.alpha1 * covScale, "startup stage 1");
  } else {
    // no ex-ante or interim value variance; all cost dispersion lands on the
    // interim component, keeping the total at sigmaC2
    st.stage0 = make_bivariate(0.0, p.muC, 0.0, 0.0, 0.0, "startup stage 0");
    st.stage1 = make_bivariate(0.0, 0.0, 0.0, p.sigmaC2, 0.0, "startup stage 1");
  }
  st.sPost = std::sqrt(std::max(0.0, (1.0 - p.alpha0 - p.alpha1) * p.sigmaV2));
  return st;
}

// Deterministic low-discrepancy cover of the unit square: the first knot
// coordinate is stratified, the second steps by the golden ratio.
std::pair<double, double> knot_square(int j, int nKnots) {
  const double u1 = (static_cast<double>(j) + 0.5) / static_cast<double>(nKnots);
  double u2 = (static_cast<double>(j) + 1.0) * kInvPhi;
  u2 -= std::floor(u2);
  u2 = std::clamp(u2, 1e-12, 1.0 - 1e-12);
  return {u1, u2};
}

int uniform_knot(int nKnots, RngStream& rng) {
  const int j = static_cast<int>(rng.next_double() * static_cast<double>(nKnots));
  return std::min(j, nKnots - 1);
}

double poisson_draw(double lambda, RngStream& rng) {
  double k = 0.0;
  while (lambda > 0.0) {
    const double chunk = std::min(lambda, 60.0);
    const double limit = std::exp(-chunk);
    double p = 1.0;
    for (;;) {
      p *= rng.next_double();
      if (p <= limit) break;
      k += 1.0;
    }
    lambda -= chunk;
  }
  return k;
}

}  // namespace

double StartupComponents::value() const { return std::exp(v0 + v1 + v2); }
double StartupComponents::cost() const { return std::exp(c0 + c1); }

StartupComponents draw_startup_components(const StartupParams& p, RngStream& rng) {
  const StartupStages st = validate_startup(p);
  StartupComponents out;
  std::tie(out.v0, out.c0) = biv_from_normals(st.stage0, rng.next_gaussian(), rng.next_gaussian());
  std::tie(out.v1, out.c1) = biv_from_normals(st.stage1, rng.next_gaussian(), rng.next_gaussian());
  out.v2 = st.sPost * rng.next_gaussian();
  return out;
}

Distribution ScenarioFamily::value_law(int knot) const {
  const double m = logMean0 + interimLogShift[static_cast<std::size_t>(knot)];
  if (sPost > 0.0) return Distribution::log_normal(m, sPost * sPost);
  return Distribution::point_mass(std::exp(m));
}

BidderType ScenarioFamily::bidder(int knot) const {
  return {value_law(knot), cost[static_cast<std::size_t>(knot)]};
}

Scenario draw_startup_scenario(const StartupParams& p, RngStream& rng, int nKnots) {
  if (nKnots < 1) throw ParameterError("startup: nKnots must be >= 1");
  const StartupStages st = validate_startup(p);

  Scenario sc;
  sc.id = "startup";
  sc.nKnots = nKnots;
  for (int i = 0; i < p.nBidders; ++i) {
    const auto [v0, c0] =
        biv_from_normals(st.stage0, rng.next_gaussian(), rng.next_gaussian());
    sc.stage0LogValue.push_back(v0);
    sc.stage0LogCost.push_back(c0);

    ScenarioFamily fam;
    fam.count = 1;
    fam.logMean0 = v0;
    fam.sPost = st.sPost;
    fam.interimLogShift.resize(static_cast<std::size_t>(nKnots));
    fam.cost.resize(static_cast<std::size_t>(nKnots));
    fam.strike.resize(static_cast<std::size_t>(nKnots));
    for (int j = 0; j < nKnots; ++j) {
      const auto [u1, u2] = knot_square(j, nKnots);
      const auto [v1, c1] =
          biv_from_normals(st.stage1, normal_quantile(u1), normal_quantile(u2));
      const auto idx = static_cast<std::size_t>(j);
      fam.interimLogShift[idx] = v1;
      fam.cost[idx] = std::exp(c0 + c1);
      fam.strike[idx] = strike_price(fam.value_law(j), fam.cost[idx]);
    }
    sc.families.push_back(std::move(fam));
    sc.familyOf.push_back(i);
  }
  return sc;
}

Scenario build_timber_scenario(const TimberParams& p, int nKnots) {
  if (nKnots < 1) throw ParameterError("timber: nKnots must be >= 1");
  if (p.nLoggers < 0 || p.nMills < 0 || p.nLoggers + p.nMills < 1)
    throw ParameterError("timber: needs nonnegative kind counts summing to >= 1");
  if (!(p.K >= 0.0)) throw ParameterError("timber: inspection cost must be nonnegative");
  if (!(p.sigmaV2 >= 0.0)) throw ParameterError("timber: sigmaV2 must be nonnegative");
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0))
    throw ParameterError("timber: alpha must lie in [0, 1]");

  const double sInterim = std::sqrt(p.alpha * p.sigmaV2);
  const double sPost = std::sqrt((1.0 - p.alpha) * p.sigmaV2);

  Scenario sc;
  sc.id = "timber";
  sc.nKnots = nKnots;
  sc.mandatoryPreBidInspection = true;
  const std::pair<int, double> kinds[2] = {{p.nLoggers, p.muLogger},
                                           {p.nMills, p.muLogger + p.muDiff}};
  for (const auto& [count, mean] : kinds) {
    if (count == 0) continue;
    ScenarioFamily fam;
    fam.count = count;
    fam.logMean0 = mean;
    fam.sPost = sPost;
    fam.interimLogShift.resize(static_cast<std::size_t>(nKnots));
    fam.cost.assign(static_cast<std::size_t>(nKnots), p.K);
    fam.strike.resize(static_cast<std::size_t>(nKnots));
    for (int j = 0; j < nKnots; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(nKnots);
      fam.interimLogShift[idx] = sInterim * normal_quantile(u);
      fam.strike[idx] = strike_price(fam.value_law(j), p.K);
    }
    const int famIndex = static_cast<int>(sc.families.size());
    sc.families.push_back(std::move(fam));
    sc.familyOf.insert(sc.familyOf.end(), static_cast<std::size_t>(count), famIndex);
  }
  return sc;
}

ComparisonRow run_comparison(const Scenario& sc, const MechanismSelection& sel,
                             std::size_t nDraws, RngStream& rng, std::size_t fitSamples) {
  if (sc.families.empty() || sc.nKnots < 1) throw InputError("run_comparison: empty scenario");
  if (nDraws < 2) throw InputError("run_comparison: nDraws must be >= 2");
  const int nB = sc.n_bidders();
  const int nF = static_cast<int>(sc.families.size());
  const int K = sc.nKnots;

  ComparisonRow row;
  row.scenario = sc.id;
  row.nDraws = nDraws;

  RngStream fitR = rng.substream(1);
  RngStream tieR = rng.substream(2);
  RngStream priceR = rng.substream(3);
  RngStream evalR = rng.substream(4);

  auto append_note = [&](const std::string& s) {
    if (!row.note.empty()) row.note += "; ";
    row.note += s;
    row.solverOk = false;
  };

  // --- descending-auction side: covered-call fits, then the bid profile ----
  fpa::EquilibriumProfile profile;
  bool haveProfile = false;
  if (sel.dutch) {
    try {
      std::vector<Distribution> kindDists;
      std::vector<int> counts;
      std::vector<double> samples(fitSamples);
      for (const auto& fam : sc.families) {
        for (auto& s : samples) {
          const int j = uniform_knot(K, fitR);
          const auto idx = static_cast<std::size_t>(j);
          const double v = std::exp(fam.logMean0 + fam.interimLogShift[idx] +
                                    fam.sPost * fitR.next_gaussian());
          s = std::min(fam.strike[idx], v);
        }
        const LogNormalFit fit = fit_lognormal_cdf(samples);
        kindDists.push_back(fit.degenerate ? Distribution::point_mass(std::exp(fit.logMean))
                                           : fit.fitted());
        counts.push_back(fam.count);
      }
      profile = fpa::asymmetric_fpa_kinds(kindDists, counts);
      haveProfile = true;
      row.dutch.solverConverged = profile.residual <= 0.0 || profile.iterations > 0;
      row.dutch.solverResidual = profile.residual;
      row.dutch.solverIterations = profile.iterations;
    } catch (const std::exception& e) {
      append_note(std::string("descending solve failed: ") + e.what());
    }
  }

  // --- sealed-bid side: threshold equilibrium over the knot families -------
  std::vector<mech::SpaStrategy> spaStrategies;
  bool haveSpa = false;
  if (sel.spa) {
    try {
      std::vector<mech::SpaFamily> fams;
      for (const auto& fam : sc.families) {
        mech::SpaFamily f;
        f.count = fam.count;
        f.at = [&fam, K](double u) {
          const int j = std::min(static_cast<int>(u * static_cast<double>(K)), K - 1);
          return fam.bidder(std::max(j, 0));
        };
        fams.push_back(std::move(f));
      }
      mech::SpaConfig cfg;
      cfg.thetaGrid = K;
      cfg.mandatoryPreBidInspection = sc.mandatoryPreBidInspection;
      spaStrategies = mech::spa_solve(fams, cfg);
      haveSpa = true;
      row.spa.solverConverged = spaStrategies.front().converged;
      row.spa.solverResidual = spaStrategies.front().residual;
      row.spa.solverIterations = spaStrategies.front().iterations;
    } catch (const std::exception& e) {
      append_note(std::string("sealed-bid solve failed: ") + e.what());
    }
  }

  // --- posted price: quote from an independent stream ----------------------
  double postedPrice = 0.0;
  if (sel.posted) {
    const std::size_t m = std::max<std::size_t>(1000, std::min<std::size_t>(fitSamples, 100000));
    std::vector<double> best(m);
    for (auto& b : best) {
      double top = 0.0;
      for (int i = 0; i < nB; ++i) {
        const auto& fam = sc.families[static_cast<std::size_t>(sc.familyOf[static_cast<std::size_t>(i)])];
        const auto idx = static_cast<std::size_t>(uniform_knot(K, priceR));
        const double v = std::exp(fam.logMean0 + fam.interimLogShift[idx] +
                                  fam.sPost * priceR.next_gaussian());
        top = std::max(top, std::min(fam.strike[idx], v));
      }
      b = top;
    }
    postedPrice = sample_quantile(best, 0.5);
  }

  // --- evaluation on common draws ------------------------------------------
  OnlineMeanVar fbAcc;
  OnlineMeanVar dW, dRev, dLoss, sW, sRev, sLoss, pW, pRev, pLoss;
  double fbInspSum = 0.0;
  double dInsp = 0.0, dMatch = 0.0, dPre = 0.0;
  double sInsp = 0.0, sMatch = 0.0, sPre = 0.0;
  double pInsp = 0.0, pMatch = 0.0, pSale = 0.0;

  std::vector<double> strikes(static_cast<std::size_t>(nB)), values(strikes.size()),
      costs(strikes.size()), kappas(strikes.size()), levels(strikes.size());
  std::vector<int> knots(strikes.size());
  std::vector<mech::SpaBidderDraw> spaDraws(strikes.size());

  for (std::size_t d = 0; d < nDraws; ++d) {
    int fbWinner = -1;
    double fbBest = 0.0;
    for (int i = 0; i < nB; ++i) {
      const auto bi = static_cast<std::size_t>(i);
      const int f = sc.familyOf[bi];
      const auto& fam = sc.families[static_cast<std::size_t>(f)];
      const int j = uniform_knot(K, evalR);
      const auto idx = static_cast<std::size_t>(j);
      knots[bi] = j;
      strikes[bi] = fam.strike[idx];
      costs[bi] = fam.cost[idx];
      values[bi] =
          std::exp(fam.logMean0 + fam.interimLogShift[idx] + fam.sPost * evalR.next_gaussian());
      kappas[bi] = std::min(strikes[bi], values[bi]);
      if (kappas[bi] > fbBest) {
        fbBest = kappas[bi];
        fbWinner = i;
      }
      spaDraws[bi] = {f, j, values[bi]};
    }
    fbAcc.add(fbBest);
    fbInspSum +=
        static_cast<double>(weitzman_search(strikes, values, costs).inspected.size());

    if (haveProfile) {
      for (int i = 0; i < nB; ++i) {
        const auto bi = static_cast<std::size_t>(i);
        levels[bi] = kappas[bi] > 0.0 ? profile.bidders[bi](kappas[bi]) : mech::kNoBid;
      }
      const int w = mech::pick_first_price_winner(levels, kappas, values);
      const double price = w >= 0 ? levels[static_cast<std::size_t>(w)] : 0.0;
      const double wel = w >= 0 ? kappas[static_cast<std::size_t>(w)] : 0.0;
      dW.add(wel);
      dRev.add(w >= 0 ? price : 0.0);
      dLoss.add(fbBest - wel);
      int insp = 0;
      for (int i = 0; i < nB; ++i) {
        const auto bi = static_cast<std::size_t>(i);
        if (strikes[bi] > 0.0 && (profile.bidders[bi](strikes[bi]) > price || i == w)) ++insp;
      }
      dInsp += static_cast<double>(insp);
      if (w >= 0) ++dPre;  // a descending claim always follows own inspection
      if (w == fbWinner) ++dMatch;
    }

    if (haveSpa) {
      const mech::AuctionOutcome out =
          mech::simulate_spa(spaStrategies, spaDraws, sc.mandatoryPreBidInspection, tieR);
      sW.add(out.welfare);
      sRev.add(out.revenue);
      sLoss.add(fbBest - out.welfare);
      sInsp += static_cast<double>(out.inspected.size());
      if (out.winner >= 0) {
        const auto wi = static_cast<std::size_t>(out.winner);
        const auto& st = spaStrategies[static_cast<std::size_t>(sc.familyOf[wi])];
        const auto kj = static_cast<std::size_t>(knots[wi]);
        if (st.knotCost[kj] <= st.thresholdCost[kj]) ++sPre;
        if (out.winner == fbWinner) ++sMatch;
      }
    }

    if (sel.posted) {
      double wel = 0.0, rev = 0.0;
      int buyer = -1;
      for (int i = 0; i < nB && buyer < 0; ++i) {
        const auto bi = static_cast<std::size_t>(i);
        if (strikes[bi] < postedPrice) continue;
        pInsp += 1.0;
        if (kappas[bi] >= postedPrice) {
          buyer = i;
          wel = kappas[bi];
          rev = postedPrice;
        }
      }
      pW.add(wel);
      pRev.add(rev);
      pLoss.add(fbBest - wel);
      if (buyer >= 0) {
        ++pSale;
        if (buyer == fbWinner) ++pMatch;
      }
    }
  }

  const double nD = static_cast<double>(nDraws);
  row.firstBest = fbAcc.estimate();
  row.firstBestFracInspect = fbInspSum / (nD * static_cast<double>(nB));

  auto fill = [&](MechanismColumn& col, OnlineMeanVar& w, OnlineMeanVar& rev, OnlineMeanVar& loss,
                  double insp, double match, double pre) {
    col.computed = true;
    col.welfare = w.estimate();
    col.revenue = rev.estimate();
    if (row.firstBest.mean > 0.0) {
      col.lossPct = 100.0 * loss.mean() / row.firstBest.mean;
      col.lossPctSe = 100.0 * loss.se() / row.firstBest.mean;
    }
    col.fracInspect = insp / (nD * static_cast<double>(nB));
    col.matchesFirstBestRate = match / nD;
    col.winnerPreInspectedRate = pre / nD;
  };
  if (haveProfile) fill(row.dutch, dW, dRev, dLoss, dInsp, dMatch, dPre);
  if (haveSpa) fill(row.spa, sW, sRev, sLoss, sInsp, sMatch, sPre);
  if (sel.posted) fill(row.posted, pW, pRev, pLoss, pInsp, pMatch, pSale);

  (void)nF;
  return row;
}

StartupRun run_startup(const StartupParams& p, int nOuter, std::size_t nDraws, RngStream& rng,
                       const MechanismSelection& sel, int nKnots, std::size_t fitSamples) {
  if (nOuter < 1) throw InputError("run_startup: nOuter must be >= 1");
  StartupRun run;
  for (int k = 0; k < nOuter; ++k) {
    RngStream sR = rng.substream(static_cast<std::uint64_t>(2 * k));
    RngStream cR = rng.substream(static_cast<std::uint64_t>(2 * k + 1));
    Scenario sc = draw_startup_scenario(p, sR, nKnots);
    sc.id = "startup draw " + std::to_string(k);
    run.perDraw.push_back(run_comparison(sc, sel, nDraws, cR, fitSamples));
  }

  // equal-weight pooling across the ex-ante draws
  ComparisonRow pooled;
  pooled.scenario = "startup pooled";
  pooled.nDraws = nDraws * static_cast<std::size_t>(nOuter);
  const double m = static_cast<double>(nOuter);
  double fbMean = 0.0, fbVar = 0.0, fbInsp = 0.0;
  for (const auto& r : run.perDraw) {
    fbMean += r.firstBest.mean / m;
    fbVar += r.firstBest.se * r.firstBest.se / (m * m);
    fbInsp += r.firstBestFracInspect / m;
    pooled.solverOk = pooled.solverOk && r.solverOk;
    if (!r.note.empty()) pooled.note += (pooled.note.empty() ? "" : "; ") + r.note;
  }
  pooled.firstBest = {fbMean, std::sqrt(fbVar), pooled.nDraws};
  pooled.firstBestFracInspect = fbInsp;

  auto pool = [&](MechanismColumn ComparisonRow::* col) {
    MechanismColumn out;
    out.computed = true;
    double wMean = 0.0, wVar = 0.0, rMean = 0.0, rVar = 0.0, dVar = 0.0;
    for (const auto& r : run.perDraw) {
      const MechanismColumn& c = r.*col;
      if (!c.computed) {
        out.computed = false;
        return out;
      }
      wMean += c.welfare.mean / m;
      wVar += c.welfare.se * c.welfare.se / (m * m);
      rMean += c.revenue.mean / m;
      rVar += c.revenue.se * c.revenue.se / (m * m);
      const double diffSe = c.lossPctSe * r.firstBest.mean / 100.0;
      dVar += diffSe * diffSe / (m * m);
      out.fracInspect += c.fracInspect / m;
      out.matchesFirstBestRate += c.matchesFirstBestRate / m;
      out.winnerPreInspectedRate += c.winnerPreInspectedRate / m;
      out.solverConverged = out.solverConverged && c.solverConverged;
      out.solverResidual = std::max(out.solverResidual, c.solverResidual);
      out.solverIterations = std::max(out.solverIterations, c.solverIterations);
    }
    out.welfare = {wMean, std::sqrt(wVar), pooled.nDraws};
    out.revenue = {rMean, std::sqrt(rVar), pooled.nDraws};
    if (fbMean > 0.0) {
      out.lossPct = 100.0 * (fbMean - wMean) / fbMean;
      out.lossPctSe = 100.0 * std::sqrt(dVar) / fbMean;
    }
    return out;
  };
  if (sel.dutch) pooled.dutch = pool(&ComparisonRow::dutch);
  if (sel.spa) pooled.spa = pool(&ComparisonRow::spa);
  if (sel.posted) pooled.posted = pool(&ComparisonRow::posted);
  run.pooled = std::move(pooled);
  return run;
}

double blackswan_bound(double c) {
  if (!(c > 0.0 && c < 1.0)) throw InputError("blackswan_bound: c must lie in (0, 1)");
  return (1.0 - c - c * std::log(1.0 / c)) / (1.0 - c);
}

BlackswanMcResult blackswan_mc(double c, double M, std::size_t n, std::size_t nDraws,
                               RngStream& rng) {
  if (!(c > 0.0 && c < 1.0)) throw InputError("blackswan_mc: c must lie in (0, 1)");
  if (!(M > 1.0)) throw InputError("blackswan_mc: M must exceed 1");
  if (n < 1 || nDraws < 2) throw InputError("blackswan_mc: needs bidders and draws");

  BlackswanMcResult res;
  res.bound = blackswan_bound(c);
  const double nd = static_cast<double>(n);
  const double strike = M * (1.0 - c);
  res.firstBest = strike * (1.0 - std::pow(1.0 - 1.0 / M, nd));

  // expected welfare of "each bidder inspects with probability x/n", in
  // closed form; pick the best mass on a grid around M ln(1/c)
  auto meanWelfare = [&](double x) {
    return M * (1.0 - std::pow(1.0 - x / (nd * M), nd)) - c * x;
  };
  const double center = M * std::log(1.0 / c);
  double bestX = center, bestW = meanWelfare(center);
  for (int g = 0; g <= 180; ++g) {
    const double x = std::min(center * (0.2 + 1.8 * static_cast<double>(g) / 180.0), nd);
    const double w = meanWelfare(x);
    if (w > bestW) {
      bestW = w;
      bestX = x;
    }
  }
  res.entryMass = bestX;

  // conditional Monte Carlo over the strategy's entry randomness: draw the
  // entrant count, then add the exact expected welfare given that count (the
  // value draws integrate out in closed form, which removes the enormous
  // jackpot variance without biasing the estimate)
  const double logKeep = std::log1p(-1.0 / M);
  OnlineMeanVar acc;
  for (std::size_t d = 0; d < nDraws; ++d) {
    const double entrants = poisson_draw(bestX, rng);
    acc.add(M * (1.0 - std::exp(entrants * logKeep)) - c * entrants);
  }
  res.ratio = acc.mean() / res.firstBest;
  res.se = acc.se() / res.firstBest;
  return res;
}

double english_bound(double p) {
  if (!(p > 0.0 && p < 0.5)) throw InputError("english_bound: p must lie in (0, 0.5)");
  const double M = 1.0 / (p * p);
  const double strike = 0.5;
  return 1.0 - (M / strike) * (-std::log1p(-strike / M));
}

BkrsComparisonResult bkrs_counterexample(const BkrsParams& p, std::size_t nDraws,
                                         RngStream& rng) {
  if (p.n < 1 || nDraws < 2) throw InputError("bkrs_counterexample: needs bidders and draws");
  if (!(p.pi > 0.0 && p.pi <= 1.0) || !(p.pR > 0.0 && p.pR <= 1.0) ||
      !(p.pS >= 0.0 && p.pS < 1.0))
    throw InputError("bkrs_counterexample: probabilities out of range");
  if (!(p.eps > p.reserve && p.reserve >= 0.0))
    throw InputError("bkrs_counterexample: needs reserve < eps");
  if (!(p.vR / 2.0 < p.vS) || !(p.eps < p.vR / 2.0))
    throw InputError("bkrs_counterexample: needs eps < vR/2 < vS");

  const double cR = p.vR * p.pR / 2.0;
  const double cS = p.vS - p.eps;
  const double strikeR = p.vR / 2.0;
  const double strikeS = p.vS - cS / (1.0 - p.pS);

  // equilibrium path: with no incumbent yet, an arrival inspects and enters
  // on a success; once anyone holds the item, everyone later stays out, so a
  // knockout is never reached (hitting one would abort the run)
  const mech::BkrsScript script = [](const mech::BkrsNode& node)
      -> std::optional<mech::BkrsAction> {
    if (node.kind != mech::BkrsNode::Arrival) return std::nullopt;
    mech::BkrsAction a;
    if (node.hasIncumbent) return a;
    if (!node.value) {
      a.inspect = true;
      return a;
    }
    a.enter = *node.value > 0.0;
    return a;
  };

  const auto nB = static_cast<std::size_t>(p.n);
  std::vector<double> values(nB), costs(nB), strikes(nB);
  std::vector<int> order(nB);
  for (std::size_t i = 0; i < nB; ++i) order[i] = static_cast<int>(i);

  BkrsComparisonResult res;
  OnlineMeanVar bkrsAcc, fbAcc;
  for (std::size_t d = 0; d < nDraws; ++d) {
    for (std::size_t i = 0; i < nB; ++i) {
      if (rng.next_double() < p.pi) {  // risky
        values[i] = rng.next_double() < p.pR ? p.vR : 0.0;
        costs[i] = cR;
        strikes[i] = strikeR;
      } else {  // safe; a bad match is worthless and never taken
        values[i] = rng.next_double() < p.pS ? -1.0 : p.vS;
        costs[i] = cS;
        strikes[i] = strikeS;
      }
    }
    bkrsAcc.add(mech::simulate_bkrs(script, order, p.reserve, values, costs).welfare);
    fbAcc.add(weitzman_search(strikes, values, costs).welfare);
  }
  res.bkrsWelfare = bkrsAcc.estimate();
  res.firstBest = fbAcc.estimate();
  res.ratio = res.firstBest.mean > 0.0 ? res.bkrsWelfare.mean / res.firstBest.mean : 0.0;
  return res;
}

}  // namespace pandora::calib
