#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "pandora/distributions.hpp"
#include "pandora/normal.hpp"

namespace pandora {

namespace {

// Small Nelder–Mead in 2D; good enough for a smooth two-parameter objective.
std::array<double, 2> nelder_mead_2d(const std::function<double(double, double)>& f,
                                     std::array<double, 2> start, double step, int maxIter) {
  struct Vertex {
    std::array<double, 2> x;
    double fx;
  };
  auto eval = [&](std::array<double, 2> x) { return Vertex{x, f(x[0], x[1])}; };
  std::array<Vertex, 3> s = {eval(start),
                             eval({start[0] + step, start[1]}),
                             eval({start[0], start[1] + step})};
  for (int it = 0; it < maxIter; ++it) {
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    const double spread = std::max(std::fabs(s[2].x[0] - s[0].x[0]),
                                   std::fabs(s[2].x[1] - s[0].x[1]));
    if (spread < 1e-12 && s[2].fx - s[0].fx < 1e-16) break;
    const std::array<double, 2> c = {0.5 * (s[0].x[0] + s[1].x[0]),
                                     0.5 * (s[0].x[1] + s[1].x[1])};
    auto along = [&](double t) {
      return eval({c[0] + t * (c[0] - s[2].x[0]), c[1] + t * (c[1] - s[2].x[1])});
    };
    Vertex r = along(1.0);  // reflection
    if (r.fx < s[0].fx) {
      Vertex e = along(2.0);  // expansion
      s[2] = e.fx < r.fx ? e : r;
    } else if (r.fx < s[1].fx) {
      s[2] = r;
    } else {
      Vertex k = along(r.fx < s[2].fx ? 0.5 : -0.5);  // outside/inside contraction
      if (k.fx < std::min(r.fx, s[2].fx)) {
        s[2] = k;
      } else {  // shrink toward the best vertex
        for (int i : {1, 2})
          s[i] = eval({s[0].x[0] + 0.5 * (s[i].x[0] - s[0].x[0]),
                       s[0].x[1] + 0.5 * (s[i].x[1] - s[0].x[1])});
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
  return s[0].x;
}

}  // namespace

LogNormalFit fit_lognormal_cdf(const std::vector<double>& samples, int gridSize) {
  if (gridSize < 2) throw InputError("fit_lognormal_cdf: gridSize must be >= 2");
  std::vector<double> xs;
  xs.reserve(samples.size());
  std::size_t dropped = 0;
  for (double x : samples) {
    if (x > 0.0 && std::isfinite(x)) xs.push_back(x);
    else ++dropped;
  }
  if (xs.size() < 1000)
    throw InputError("fit_lognormal_cdf: needs at least 1000 positive samples");
  std::sort(xs.begin(), xs.end());

  LogNormalFit fit;
  fit.droppedNonPositive = dropped;

  const std::size_t n = xs.size();
  auto q = [&](double p) {
    std::size_t k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    return xs[std::clamp<std::size_t>(k, 1, n) - 1];
  };
  const double xlo = q(0.001), xhi = q(0.999);
  if (!(xhi > xlo * (1.0 + 1e-12))) {
    // sample collapses to a point: report the point mass rather than NaN
    fit.logMean = std::log(xs[n / 2]);
    fit.logVar = 0.0;
    fit.degenerate = true;
    return fit;
  }

  // fit window: equispaced grid between the 0.1% and 99.9% empirical quantiles
  std::vector<double> grid(static_cast<std::size_t>(gridSize)), emp(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = xlo + (xhi - xlo) * static_cast<double>(i) / static_cast<double>(gridSize - 1);
    emp[i] = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), grid[i]) - xs.begin()) /
             static_cast<double>(n);
  }
  std::vector<double> lg(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) lg[i] = std::log(grid[i]);

  // objective over (mu, log s)
  auto sse = [&](double mu, double logS) {
    const double inv = std::exp(-logS);
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = normal_cdf((lg[i] - mu) * inv) - emp[i];
      acc += d * d;
    }
    return acc;
  };

  // moment start, quantile-matching start, and a perturbed start
  double lm = 0.0, lv = 0.0;
  for (double x : xs) lm += std::log(x);
  lm /= static_cast<double>(n);
  for (double x : xs) {
    const double d = std::log(x) - lm;
    lv += d * d;
  }
  lv /= static_cast<double>(n);
  const double sMoment = std::sqrt(std::max(lv, 1e-12));
  const double sQuant =
      std::max((std::log(q(0.75)) - std::log(q(0.25))) / (2.0 * 0.6744897501960817), 1e-6);
  const std::array<std::array<double, 2>, 3> starts = {{
      {lm, std::log(sMoment)},
      {std::log(q(0.5)), std::log(sQuant)},
      {lm + 0.25 * sMoment, std::log(1.5 * sMoment)},
  }};

  double bestF = std::numeric_limits<double>::infinity();
  std::array<double, 2> best = starts[0];
  for (const auto& s0 : starts) {
    const auto x = nelder_mead_2d(sse, s0, 0.1, 400);
    const double fx = sse(x[0], x[1]);
    if (fx < bestF) {
      bestF = fx;
      best = x;
    }
  }

  fit.logMean = best[0];
  const double s = std::exp(best[1]);
  fit.logVar = s * s;
  fit.rss = bestF;
  fit.degenerate = s < 1e-8;
  return fit;
}

}  // namespace pandora
