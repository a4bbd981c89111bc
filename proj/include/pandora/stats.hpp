#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "pandora/common.hpp"

namespace pandora {

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Welford accumulator; mergeable so data-parallel blocks reduce deterministically.
class OnlineMeanVar {
 public:
  void add(double x) noexcept {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const OnlineMeanVar& o) noexcept {
    if (o.n_ == 0) return;
    if (n_ == 0) { *this = o; return; }
    const double d = o.mean_ - mean_;
    const std::size_t n = n_ + o.n_;
    m2_ += o.m2_ + d * d * (static_cast<double>(n_) * static_cast<double>(o.n_)) / n;
    mean_ += d * static_cast<double>(o.n_) / n;
    n_ = n;
  }
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double se() const noexcept {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }
  McEstimate estimate() const noexcept { return {mean(), se(), n_}; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// q-th quantile (0<q<1) of a sample by the left-continuous inverse of the
// empirical CDF; sorts a copy.
inline double sample_quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw InputError("sample_quantile: empty sample");
  if (!(q > 0.0 && q < 1.0)) throw InputError("sample_quantile: q must lie in (0,1)");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (k == 0) k = 1;
  if (k > n) k = n;
  return xs[k - 1];
}

// Kolmogorov–Smirnov statistic of a sample against a reference CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw InputError("ks_statistic: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

}  // namespace pandora
