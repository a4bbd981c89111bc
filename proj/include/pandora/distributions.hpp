#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pandora/common.hpp"
#include "pandora/rng.hpp"

namespace pandora {

namespace detail {
class DistImpl;
}

// Immutable value-semantic probability law on the real line.  Copies share the
// implementation, so Distribution values are cheap to pass around and safe to
// use concurrently.
class Distribution {
 public:
  static Distribution log_normal(double logMean, double logVar);
  static Distribution uniform(double lo, double hi);
  static Distribution two_point(double high, double pHigh, double low);
  // atom list (value, probability); values need not be sorted, probabilities
  // must sum to 1 within 1e-12
  static Distribution finite_discrete(std::vector<std::pair<double, double>> atoms);
  static Distribution point_mass(double v);
  // law of min(X, cap): CDF(x) = base.cdf(x) below cap, 1 at and above it
  static Distribution truncated_above(Distribution base, double cap);
  // step CDF with mass 1/n at every sample; sourcePath is recorded for
  // serialization (empirical laws serialize as a file reference)
  static Distribution empirical(std::vector<double> samples, std::string sourcePath = {});

  double cdf(double x) const;
  double quantile(double q) const;  // q in (0,1)
  double mean() const;
  // E[(X - t)^+]; finite t required
  double partial_expectation(double t) const;
  double pdf(double x) const;  // throws InputError where no density exists
  bool has_density() const;
  double support_lo() const;  // essential infimum
  double support_hi() const;  // essential supremum; +inf when unbounded

  double sample_one(RngStream& rng) const;
  void sample(RngStream& rng, std::span<double> out) const;

  // Exact inverse of t -> E[(X-t)^+] where the law makes it piecewise linear
  // (finite atom lists); nullopt otherwise.  For c == 0 returns the support
  // supremum (the least solution).
  std::optional<double> partial_expectation_inverse(double c) const;

  // Atom view (value, probability) when the law is purely atomic.
  std::optional<std::vector<std::pair<double, double>>> atoms() const;
  // Point mass at exactly x (0 for continuous laws; works for mixed laws too).
  double atom_at(double x) const;

  nlohmann::json to_json() const;
  // baseDir resolves relative empirical sample paths
  static Distribution from_json(const nlohmann::json& j, const std::string& baseDir = {});

  std::string kind() const;

  // Shared-structure identity: true when both wrap the same underlying law
  // object (used to group interchangeable bidders; not value equality).
  bool same_object(const Distribution& o) const { return p_ == o.p_; }

 private:
  explicit Distribution(std::shared_ptr<const detail::DistImpl> p) : p_(std::move(p)) {}
  std::shared_ptr<const detail::DistImpl> p_;
};

// Least-squares lognormal fit to the empirical CDF of a positive sample.
struct LogNormalFit {
  double logMean = 0.0;
  double logVar = 0.0;
  double rss = 0.0;                  // sum of squared CDF errors over the grid
  std::size_t droppedNonPositive = 0;
  bool degenerate = false;           // sample (nearly) collapses to a point
  Distribution fitted() const { return Distribution::log_normal(logMean, logVar); }
};

// Fits by minimizing the sum of squared CDF differences on an equispaced grid
// between the 0.1% and 99.9% empirical quantiles; multistart Nelder–Mead.
LogNormalFit fit_lognormal_cdf(const std::vector<double>& samples, int gridSize = 512);

}  // namespace pandora
