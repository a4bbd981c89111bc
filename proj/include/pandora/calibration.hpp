#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pandora/distributions.hpp"
#include "pandora/mechanisms.hpp"
#include "pandora/rng.hpp"
#include "pandora/stats.hpp"

namespace pandora::calib {

// ---------------------------------------------------------------------------
// Start-up acquisition market.  All primitives are joint log-normal:
//   log v = V0 + V1 + V2,   log c = C0 + C1,
// where the stage-0 pair (V0, C0) is common knowledge (the source of bidder
// asymmetry), the stage-1 pair (V1, C1) is the bidder's private interim type,
// and V2 is revealed only by paying the inspection cost.  alpha0 and alpha1
// set the variance shares of the value stages; cost variance splits between
// its two stages in proportion alpha0 : alpha1.  rho correlates log-cost with
// log-value within each stage.
// ---------------------------------------------------------------------------
struct StartupParams {
  double sigmaV2 = 1.0;    // total log-value variance
  double sigmaC2 = 0.2;    // total log-cost variance
  double muC = -0.62;      // log-cost mean (log-value mean normalized to 0)
  double rho = 0.7;        // within-stage value/cost correlation
  double alpha0 = 0.1;     // ex-ante share of value variance
  double alpha1 = 0.4;     // interim share of value variance
  int nBidders = 5;
};

// Timber sale market: two bidder kinds (loggers and mills) separated by a
// known log-mean shift, homogeneous inspection cost, a single interim share
// alpha, and no cost dispersion.
struct TimberParams {
  double muLogger = 3.582;
  double muDiff = 0.378;   // mills' log-mean premium
  double sigmaV2 = 0.332;
  double alpha = 0.689;    // interim share of value variance
  double K = 2.05;         // inspection cost, all bidders
  int nLoggers = 4;
  int nMills = 4;
};

// One bidder's five log components for a single joint draw.
struct StartupComponents {
  double v0 = 0.0, v1 = 0.0, v2 = 0.0, c0 = 0.0, c1 = 0.0;
  double value() const;  // exp(v0 + v1 + v2)
  double cost() const;   // exp(c0 + c1)
};

// Exact continuous sampler of the five components (moment tests and any use
// that does not need the interim-type quantization below).
// Throws ParameterError when the implied stage covariances are invalid.
StartupComponents draw_startup_components(const StartupParams& p, RngStream& rng);

// ---------------------------------------------------------------------------
// A solvable scenario: each bidder kind ("family") carries its interim type
// law quantized to nKnots equally likely knots.  Knot j of a family fixes the
// inspection cost, the post-inspection value law exp(N(logMean0 + shift_j,
// sPost^2)), and the resulting strike.  The second knot coordinate of the
// two-dimensional start-up interim type is folded in by a golden-ratio
// rotation so a scalar knot index covers the (V1, C1) plane evenly.
// ---------------------------------------------------------------------------
struct ScenarioFamily {
  int count = 1;
  double logMean0 = 0.0;                // common log-value level (stage 0)
  double sPost = 0.0;                   // log-sd revealed by inspection
  std::vector<double> interimLogShift;  // per knot
  std::vector<double> cost;             // per knot
  std::vector<double> strike;           // per knot

  Distribution value_law(int knot) const;
  BidderType bidder(int knot) const;
};

struct Scenario {
  std::string id;
  std::vector<ScenarioFamily> families;
  std::vector<int> familyOf;  // bidder -> family, grouped family by family
  bool mandatoryPreBidInspection = false;
  int nKnots = 0;

  int n_bidders() const { return static_cast<int>(familyOf.size()); }
  // stage-0 draw behind each bidder's family (exposed for moment checks)
  std::vector<double> stage0LogValue, stage0LogCost;
};

// One ex-ante draw of the start-up market: samples each bidder's (V0, C0),
// then quantizes her interim law.  Bidders become one single-member family
// each.  Throws ParameterError on invalid parameters.
Scenario draw_startup_scenario(const StartupParams& p, RngStream& rng, int nKnots = 1000);

// Deterministic two-kind scenario; sealed-bid column runs with mandatory
// pre-bid inspection.  Throws ParameterError on invalid parameters.
Scenario build_timber_scenario(const TimberParams& p, int nKnots = 1000);

// ---------------------------------------------------------------------------
// Mechanism comparison on common random draws.
// ---------------------------------------------------------------------------
struct MechanismSelection {
  bool dutch = true;
  bool spa = true;
  bool posted = false;
};

struct MechanismColumn {
  bool computed = false;
  McEstimate welfare;              // amortized: winner's covered call (descending,
                                   // posted, first best) or value - costs (sealed)
  McEstimate revenue;
  double lossPct = 0.0;            // 100 (firstBest - welfare) / firstBest
  double lossPctSe = 0.0;          // from the paired per-draw differences
  double fracInspect = 0.0;        // mean fraction of bidders inspecting
  double winnerPreInspectedRate = 0.0;  // winner had inspected before bidding
  double matchesFirstBestRate = 0.0;    // winner = highest covered call
  bool solverConverged = true;
  double solverResidual = 0.0;
  int solverIterations = 0;
};

struct ComparisonRow {
  std::string scenario;
  std::size_t nDraws = 0;
  McEstimate firstBest;            // E[max covered call^+]
  double firstBestFracInspect = 0.0;
  MechanismColumn dutch, spa, posted;
  bool solverOk = true;            // false: some column missing, see note
  std::string note;
};

// Fits each family's covered-call law (lognormal least squares on fitSamples
// draws), solves the descending-auction bid profile and the sealed-bid
// threshold equilibrium, then evaluates every selected mechanism and the
// first best on identical value/cost realizations.  Solver failures flag the
// row and leave the remaining columns intact.
ComparisonRow run_comparison(const Scenario& sc, const MechanismSelection& sel,
                             std::size_t nDraws, RngStream& rng,
                             std::size_t fitSamples = 100000);

// Averages run_comparison over nOuter independent ex-ante draws (the
// market-level uncertainty), pooling the columns with equal weights.
struct StartupRun {
  std::vector<ComparisonRow> perDraw;
  ComparisonRow pooled;
};
StartupRun run_startup(const StartupParams& p, int nOuter, std::size_t nDraws,
                       RngStream& rng, const MechanismSelection& sel = {},
                       int nKnots = 1000, std::size_t fitSamples = 100000);

// ---------------------------------------------------------------------------
// Worst-case constructions with analytic oracles.
// ---------------------------------------------------------------------------

// Best achievable fraction of first-best welfare for simultaneous-entry
// bidding when values are a rare jackpot: each value is M with probability
// 1/M (else 0), every inspection costs c in (0,1), and both M and the bidder
// count grow large.  Equals (1 - c - c ln(1/c)) / (1 - c); strictly
// decreasing, ->0 as c->1.  Throws InputError outside (0,1).
double blackswan_bound(double c);

// Monte Carlo companion: the best symmetric-entry strategy (entry mass chosen
// by grid search on the closed-form mean) simulated at finite M and n, as a
// fraction of E[max covered call^+] for the same population.
struct BlackswanMcResult {
  double ratio = 0.0;       // simulated welfare / first best
  double se = 0.0;
  double bound = 0.0;       // blackswan_bound(c)
  double entryMass = 0.0;   // optimized expected number of inspections
  double firstBest = 0.0;   // closed form for this (M, n)
};
BlackswanMcResult blackswan_mc(double c, double M, std::size_t n, std::size_t nDraws,
                               RngStream& rng);

// Asymptotic welfare-fraction bound for the ascending (open ascending-price)
// auction on the three-point construction parameterized by p in (0, 0.5):
// M = 1/p^2, strike 1/2, bound 1 - (M / strike) ln(1/(1 - strike / M)).
// The omitted o(1) term makes small negative values possible; report such
// values as "vanishes" (<= 0).  Throws InputError outside (0, 0.5).
double english_bound(double p);

// Sequential incumbent/knockout bargaining on a population of rare risky
// types (value vR with probability pR, inspection cost vR pR / 2) mixed with
// safe types (value vS with probability 1 - pS, else worthless; inspection
// cost vS - eps).  The scripted equilibrium path has each arrival inspect and
// enter on a success, which deters all later entry; the first success is
// almost always a safe type, so realized welfare is close to eps while the
// first best earns on the order of vR / 2 by trying risky types first.
struct BkrsParams {
  double pi = 0.01;      // share of risky types
  double pS = 0.001;     // safe type's chance of a worthless draw
  double pR = 0.01;      // risky type's chance of the jackpot
  double vS = 60.0;
  double vR = 100.0;
  double eps = 1.0;      // safe surplus vS - cS
  double reserve = 0.5;  // must stay below eps for safe entry to profit
  int n = 10000;
};
struct BkrsComparisonResult {
  McEstimate bkrsWelfare;
  McEstimate firstBest;   // sequential-search welfare on the same draws
  double ratio = 0.0;
};
BkrsComparisonResult bkrs_counterexample(const BkrsParams& p, std::size_t nDraws,
                                         RngStream& rng);

}  // namespace pandora::calib
