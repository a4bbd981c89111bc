#include "pandora/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "pandora/normal.hpp"

namespace pandora {

namespace detail {

class DistImpl {
 public:
  virtual ~DistImpl() = default;
  virtual double cdf(double x) const = 0;
  virtual double quantile(double q) const = 0;
  virtual double mean() const = 0;
  virtual double partial_expectation(double t) const = 0;
  virtual double support_lo() const = 0;
  virtual double support_hi() const = 0;
  virtual double sample_one(RngStream& rng) const = 0;
  virtual double pdf(double) const { throw InputError("pdf: no density for kind " + kind()); }
  virtual bool has_density() const { return false; }
  virtual std::optional<std::vector<std::pair<double, double>>> atoms() const {
    return std::nullopt;
  }
  virtual double atom_at(double) const { return 0.0; }
  virtual std::string kind() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw InputError(std::string(what) + ": non-finite value");
}

class LogNormalImpl final : public DistImpl {
 public:
  LogNormalImpl(double mu, double s2) : mu_(mu), s2_(s2), s_(std::sqrt(s2)) {
    require_finite(mu, "log_normal logMean");
    require_finite(s2, "log_normal logVar");
    if (s2 < 0.0) throw InputError("log_normal: logVar must be >= 0");
  }

  double cdf(double x) const override {
    if (x <= 0.0) return 0.0;
    if (s_ == 0.0) return x < std::exp(mu_) ? 0.0 : 1.0;
    return normal_cdf((std::log(x) - mu_) / s_);
  }

  double quantile(double q) const override {
    if (!(q > 0.0 && q < 1.0)) throw InputError("quantile: q must lie in (0,1)");
    if (s_ == 0.0) return std::exp(mu_);
    return std::exp(mu_ + s_ * normal_quantile(q));
  }

  double mean() const override { return std::exp(mu_ + 0.5 * s2_); }

  double partial_expectation(double t) const override {
    require_finite(t, "partial_expectation threshold");
    if (t <= 0.0) return mean() - t;
    if (s_ == 0.0) return std::max(std::exp(mu_) - t, 0.0);
    const double lt = std::log(t);
    return mean() * normal_cdf((mu_ + s2_ - lt) / s_) - t * normal_cdf((mu_ - lt) / s_);
  }

  double support_lo() const override { return s_ == 0.0 ? std::exp(mu_) : 0.0; }
  double support_hi() const override {
    return s_ == 0.0 ? std::exp(mu_) : std::numeric_limits<double>::infinity();
  }

  double sample_one(RngStream& rng) const override {
    if (s_ == 0.0) return std::exp(mu_);
    return std::exp(mu_ + s_ * rng.next_gaussian());
  }

  double pdf(double x) const override {
    if (s_ == 0.0) throw InputError("pdf: degenerate lognormal has no density");
    if (x <= 0.0) return 0.0;
    const double z = (std::log(x) - mu_) / s_;
    return normal_pdf(z) / (x * s_);
  }
  bool has_density() const override { return s_ > 0.0; }
  double atom_at(double x) const override {
    return (s_ == 0.0 && x == std::exp(mu_)) ? 1.0 : 0.0;
  }

  std::string kind() const override { return "lognormal"; }
  nlohmann::json to_json() const override {
    return {{"kind", "lognormal"}, {"logMean", mu_}, {"logVar", s2_}};
  }

 private:
  double mu_, s2_, s_;
};

class UniformImpl final : public DistImpl {
 public:
  UniformImpl(double lo, double hi) : lo_(lo), hi_(hi) {
    require_finite(lo, "uniform lo");
    require_finite(hi, "uniform hi");
    if (!(lo < hi)) throw InputError("uniform: requires lo < hi");
  }

  double cdf(double x) const override {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    return (x - lo_) / (hi_ - lo_);
  }
  double quantile(double q) const override {
    if (!(q > 0.0 && q < 1.0)) throw InputError("quantile: q must lie in (0,1)");
    return lo_ + q * (hi_ - lo_);
  }
  double mean() const override { return 0.5 * (lo_ + hi_); }
  double partial_expectation(double t) const override {
    require_finite(t, "partial_expectation threshold");
    if (t <= lo_) return mean() - t;
    if (t >= hi_) return 0.0;
    const double d = hi_ - t;
    return 0.5 * d * d / (hi_ - lo_);
  }
  double support_lo() const override { return lo_; }
  double support_hi() const override { return hi_; }
  double sample_one(RngStream& rng) const override {
    return lo_ + (hi_ - lo_) * rng.next_double();
  }
  double pdf(double x) const override {
    return (x >= lo_ && x <= hi_) ? 1.0 / (hi_ - lo_) : 0.0;
  }
  bool has_density() const override { return true; }
  std::string kind() const override { return "uniform"; }
  nlohmann::json to_json() const override {
    return {{"kind", "uniform"}, {"lo", lo_}, {"hi", hi_}};
  }

 private:
  double lo_, hi_;
};

// Shared machinery for purely atomic laws (finite_discrete, two_point,
// point_mass, empirical).  Atoms are kept sorted by value with cumulative
// probabilities and suffix partial sums so partial expectations are O(log n).
class AtomicImpl : public DistImpl {
 public:
  AtomicImpl(std::vector<std::pair<double, double>> atomList, bool normalize) {
    if (atomList.empty()) throw InputError("discrete law: needs at least one atom");
    std::sort(atomList.begin(), atomList.end());
    double total = 0.0;
    for (const auto& [v, p] : atomList) {
      require_finite(v, "atom value");
      require_finite(p, "atom probability");
      if (p < 0.0) throw InputError("discrete law: negative probability");
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12 && !normalize)
      throw InputError("discrete law: probabilities sum to " + std::to_string(total));
    // merge duplicate values, drop zero-probability atoms
    for (const auto& [v, p] : atomList) {
      if (p == 0.0) continue;
      if (!vals_.empty() && vals_.back() == v) {
        probs_.back() += p / total;
      } else {
        vals_.push_back(v);
        probs_.push_back(p / total);
      }
    }
    if (vals_.empty()) throw InputError("discrete law: all probabilities zero");
    cum_.resize(vals_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cum_.begin());
    cum_.back() = 1.0;
    // suffix sums of p and p*v for the closed-form partial expectation
    suffP_.assign(vals_.size() + 1, 0.0);
    suffPV_.assign(vals_.size() + 1, 0.0);
    for (std::size_t i = vals_.size(); i-- > 0;) {
      suffP_[i] = suffP_[i + 1] + probs_[i];
      suffPV_[i] = suffPV_[i + 1] + probs_[i] * vals_[i];
    }
  }

  double cdf(double x) const override {
    const auto it = std::upper_bound(vals_.begin(), vals_.end(), x);
    if (it == vals_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - vals_.begin()) - 1];
  }

  double quantile(double q) const override {
    if (!(q > 0.0 && q < 1.0)) throw InputError("quantile: q must lie in (0,1)");
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), q);
    return vals_[std::min(static_cast<std::size_t>(it - cum_.begin()), vals_.size() - 1)];
  }

  double mean() const override { return suffPV_[0]; }

  double partial_expectation(double t) const override {
    require_finite(t, "partial_expectation threshold");
    // sum over atoms strictly above t of p*(v - t)
    const auto it = std::upper_bound(vals_.begin(), vals_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - vals_.begin());
    return suffPV_[k] - t * suffP_[k];
  }

  double support_lo() const override { return vals_.front(); }
  double support_hi() const override { return vals_.back(); }

  double sample_one(RngStream& rng) const override {
    const double u = rng.next_double();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return vals_[std::min(static_cast<std::size_t>(it - cum_.begin()), vals_.size() - 1)];
  }

  std::optional<std::vector<std::pair<double, double>>> atoms() const override {
    std::vector<std::pair<double, double>> out(vals_.size());
    for (std::size_t i = 0; i < vals_.size(); ++i) out[i] = {vals_[i], probs_[i]};
    return out;
  }

  double atom_at(double x) const override {
    const auto it = std::lower_bound(vals_.begin(), vals_.end(), x);
    if (it == vals_.end() || *it != x) return 0.0;
    return probs_[static_cast<std::size_t>(it - vals_.begin())];
  }

 protected:
  std::vector<double> vals_, probs_, cum_, suffP_, suffPV_;
};

class DiscreteImpl final : public AtomicImpl {
 public:
  enum class Tag { General, TwoPoint, PointMass };
  DiscreteImpl(std::vector<std::pair<double, double>> atomList, Tag tag)
      : AtomicImpl(std::move(atomList), /*normalize=*/false), tag_(tag) {}

  std::string kind() const override {
    switch (tag_) {
      case Tag::TwoPoint: return "twopoint";
      case Tag::PointMass: return "pointmass";
      default: return "discrete";
    }
  }

  nlohmann::json to_json() const override {
    if (tag_ == Tag::PointMass) return {{"kind", "pointmass"}, {"value", vals_[0]}};
    if (tag_ == Tag::TwoPoint && vals_.size() == 2)
      return {{"kind", "twopoint"}, {"high", vals_[1]}, {"pHigh", probs_[1]}, {"low", vals_[0]}};
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < vals_.size(); ++i)
      arr.push_back(nlohmann::json::array({vals_[i], probs_[i]}));
    return {{"kind", "discrete"}, {"atoms", arr}};
  }

 private:
  Tag tag_;
};

class EmpiricalImpl final : public AtomicImpl {
 public:
  EmpiricalImpl(std::vector<double> samples, std::string path)
      : AtomicImpl(weighted(std::move(samples)), /*normalize=*/true), path_(std::move(path)) {}

  std::string kind() const override { return "empirical"; }
  nlohmann::json to_json() const override {
    if (path_.empty())
      throw InputError("empirical law: no source path recorded; cannot serialize");
    return {{"kind", "empirical"}, {"path", path_}};
  }

 private:
  static std::vector<std::pair<double, double>> weighted(std::vector<double> xs) {
    if (xs.empty()) throw InputError("empirical law: empty sample");
    const double w = 1.0 / static_cast<double>(xs.size());
    std::vector<std::pair<double, double>> out;
    out.reserve(xs.size());
    for (double x : xs) out.emplace_back(x, w);
    return out;
  }
  std::string path_;
};

class TruncatedImpl final : public DistImpl {
 public:
  TruncatedImpl(Distribution base, double cap) : base_(std::move(base)), cap_(cap) {
    require_finite(cap, "truncated cap");
  }

  double cdf(double x) const override { return x < cap_ ? base_.cdf(x) : 1.0; }
  double quantile(double q) const override { return std::min(base_.quantile(q), cap_); }
  double mean() const override { return base_.mean() - base_.partial_expectation(cap_); }
  double partial_expectation(double t) const override {
    require_finite(t, "partial_expectation threshold");
    if (t >= cap_) return 0.0;
    // E[(min(X,cap)-t)^+] = E[(X-t)^+] - E[(X-cap)^+]
    return base_.partial_expectation(t) - base_.partial_expectation(cap_);
  }
  double support_lo() const override { return std::min(base_.support_lo(), cap_); }
  double support_hi() const override { return std::min(base_.support_hi(), cap_); }
  double sample_one(RngStream& rng) const override {
    return std::min(base_.sample_one(rng), cap_);
  }
  std::optional<std::vector<std::pair<double, double>>> atoms() const override {
    auto baseAtoms = base_.atoms();
    if (!baseAtoms) return std::nullopt;
    std::vector<std::pair<double, double>> out;
    double massAbove = 0.0;
    for (const auto& [v, p] : *baseAtoms) {
      if (v < cap_) out.emplace_back(v, p);
      else massAbove += p;
    }
    if (massAbove > 0.0) out.emplace_back(cap_, massAbove);
    return out;
  }
  double atom_at(double x) const override {
    if (x < cap_) return base_.atom_at(x);
    if (x > cap_) return 0.0;
    // collapsed mass: everything at or above the cap, i.e. 1 - P(X < cap)
    return 1.0 - base_.cdf(cap_) + base_.atom_at(cap_);
  }
  std::string kind() const override { return "truncated"; }
  nlohmann::json to_json() const override {
    return {{"kind", "truncated"}, {"cap", cap_}, {"base", base_.to_json()}};
  }

 private:
  Distribution base_;
  double cap_;
};

}  // namespace
}  // namespace detail

using detail::DiscreteImpl;

Distribution Distribution::log_normal(double logMean, double logVar) {
  return Distribution(std::make_shared<detail::LogNormalImpl>(logMean, logVar));
}

Distribution Distribution::uniform(double lo, double hi) {
  return Distribution(std::make_shared<detail::UniformImpl>(lo, hi));
}

Distribution Distribution::two_point(double high, double pHigh, double low) {
  if (!(pHigh >= 0.0 && pHigh <= 1.0)) throw InputError("two_point: pHigh must lie in [0,1]");
  if (!(high >= low)) throw InputError("two_point: requires high >= low");
  return Distribution(std::make_shared<DiscreteImpl>(
      std::vector<std::pair<double, double>>{{low, 1.0 - pHigh}, {high, pHigh}},
      DiscreteImpl::Tag::TwoPoint));
}

Distribution Distribution::finite_discrete(std::vector<std::pair<double, double>> atoms) {
  return Distribution(
      std::make_shared<DiscreteImpl>(std::move(atoms), DiscreteImpl::Tag::General));
}

Distribution Distribution::point_mass(double v) {
  return Distribution(std::make_shared<DiscreteImpl>(
      std::vector<std::pair<double, double>>{{v, 1.0}}, DiscreteImpl::Tag::PointMass));
}

Distribution Distribution::truncated_above(Distribution base, double cap) {
  return Distribution(std::make_shared<detail::TruncatedImpl>(std::move(base), cap));
}

Distribution Distribution::empirical(std::vector<double> samples, std::string sourcePath) {
  return Distribution(
      std::make_shared<detail::EmpiricalImpl>(std::move(samples), std::move(sourcePath)));
}

double Distribution::cdf(double x) const { return p_->cdf(x); }
double Distribution::quantile(double q) const { return p_->quantile(q); }
double Distribution::mean() const { return p_->mean(); }
double Distribution::partial_expectation(double t) const { return p_->partial_expectation(t); }
double Distribution::pdf(double x) const { return p_->pdf(x); }
bool Distribution::has_density() const { return p_->has_density(); }
double Distribution::support_lo() const { return p_->support_lo(); }
double Distribution::support_hi() const { return p_->support_hi(); }
double Distribution::sample_one(RngStream& rng) const { return p_->sample_one(rng); }

void Distribution::sample(RngStream& rng, std::span<double> out) const {
  for (double& x : out) x = p_->sample_one(rng);
}

std::optional<std::vector<std::pair<double, double>>> Distribution::atoms() const {
  return p_->atoms();
}

double Distribution::atom_at(double x) const { return p_->atom_at(x); }

std::string Distribution::kind() const { return p_->kind(); }

std::optional<double> Distribution::partial_expectation_inverse(double c) const {
  const auto a = p_->atoms();
  if (!a) return std::nullopt;
  if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("partial_expectation_inverse: c must be >= 0");
  if (c == 0.0) return a->back().first;  // least solution: the support supremum
  // p(t) = sum_{v > t} p*(v - t) is piecewise linear with kinks at the atoms;
  // walk segments from the top until the level c is bracketed.
  double suffP = 0.0, suffPV = 0.0;
  for (std::size_t i = a->size(); i-- > 0;) {
    const auto [v, p] = (*a)[i];
    suffP += p;
    suffPV += p * v;
    const double atKink = suffPV - suffP * (i > 0 ? (*a)[i - 1].first : v);
    // value of p(t) at the lower end of this segment (t = next kink down)
    if (i == 0 || atKink >= c) {
      const double t = (suffPV - c) / suffP;
      if (i > 0) return t;  // interior segment
      // below the lowest atom the slope is -1 (suffP = 1): t = mean - c
      return t;
    }
  }
  return std::nullopt;  // unreachable
}

namespace {

std::vector<double> read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("empirical law: cannot open sample file " + path);
  std::vector<double> xs;
  double x;
  while (in >> x) xs.push_back(x);
  if (xs.empty()) throw InputError("empirical law: no samples in " + path);
  return xs;
}

}  // namespace

nlohmann::json Distribution::to_json() const { return p_->to_json(); }

Distribution Distribution::from_json(const nlohmann::json& j, const std::string& baseDir) {
  if (!j.is_object() || !j.contains("kind"))
    throw InputError("distribution JSON: missing \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lognormal")
    return log_normal(j.at("logMean").get<double>(), j.at("logVar").get<double>());
  if (kind == "uniform") return uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  if (kind == "twopoint")
    return two_point(j.at("high").get<double>(), j.at("pHigh").get<double>(),
                     j.at("low").get<double>());
  if (kind == "pointmass") return point_mass(j.at("value").get<double>());
  if (kind == "discrete") {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : j.at("atoms"))
      atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    return finite_discrete(std::move(atoms));
  }
  if (kind == "truncated")
    return truncated_above(from_json(j.at("base"), baseDir), j.at("cap").get<double>());
  if (kind == "empirical") {
    std::string path = j.at("path").get<std::string>();
    if (!baseDir.empty() && !path.empty() && path[0] != '/') path = baseDir + "/" + path;
    return empirical(read_sample_file(path), path);
  }
  throw InputError("distribution JSON: unknown kind \"" + kind + "\"");
}

}  // namespace pandora
