#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pandora/distributions.hpp"
#include "pandora/rng.hpp"

namespace pandora::fpa {

// Monotone bid schedule on increasing value knots; linear interpolation
// between knots, clamped to the end bids outside the knot range.
struct BidFunction {
  std::vector<double> values;
  std::vector<double> bids;
  bool degenerate = false;  // single-knot law

  double operator()(double v) const;
  double top_bid() const { return bids.back(); }
};

struct FpaConfig {
  int gridSize = 2000;              // value knots per bidder kind
  int bidGridSize = 2000;           // shared bid grid for best responses
  double truncationQuantile = 0.9999;
  int maxIter = 500;
  double tol = 2e-6;                // sup-norm bid change per iteration
  double damping = 0.5;             // initial step size; halved on oscillation
};

struct EquilibriumProfile {
  std::vector<BidFunction> bidders;
  std::vector<int> kindOf;          // kind index per bidder
  std::vector<int> unsellableKinds; // excluded: support entirely below rivals'
  int iterations = 0;
  double residual = 0.0;            // last sup-norm change
  double truncationQuantile = 0.0;
  double epsCertificate = -1.0;     // set by verify_eps_br callers; <0 = unset
};

// Symmetric equilibrium oracle: b(v) = v - int_lo^v F^{n-1} dx / F(v)^{n-1},
// i.e. the expected highest rival value conditional on winning.  Where
// F(v) = 0 the limit convention b(v) = v applies.
BidFunction symmetric_fpa(const Distribution& d, int n, int gridSize = 2000);

// Same with a reserve: bids defined for v >= reserve, b(reserve) = reserve.
BidFunction symmetric_fpa_with_reserve(const Distribution& d, int n, double reserve,
                                       int gridSize = 2000);

// Discretized best-response iteration on a shared bid grid with monotone
// projection and adaptive damping.  The normative contract is the
// epsilon-best-response certificate, not the method.  Bidders of the same
// kind share one bid function.
EquilibriumProfile asymmetric_fpa_kinds(const std::vector<Distribution>& kindDists,
                                        const std::vector<int>& counts,
                                        const FpaConfig& cfg = {});

// Groups bidders into kinds by shared law object, then solves per kind.
EquilibriumProfile asymmetric_fpa(const std::vector<Distribution>& dists,
                                  const FpaConfig& cfg = {});

// Monte Carlo certificate: max over bidders of E-utility regret of the
// prescribed bid against the best bid on a uniform grid (ties lose).
// dists are the full (untruncated) per-bidder value laws.
double verify_eps_br(const EquilibriumProfile& profile,
                     const std::vector<Distribution>& dists, RngStream& rng,
                     std::size_t nMc = 100000, int bidGrid = 2000);

// Long-format CSV: bidder,value,bid with %.6g formatting.
void export_profile_csv(const EquilibriumProfile& profile, const std::string& path);

}  // namespace pandora::fpa
