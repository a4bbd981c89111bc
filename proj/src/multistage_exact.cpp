#include "pandora/multistage_exact.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <utility>

#include "pandora/common.hpp"

namespace pandora::multistage {

namespace {

// Piecewise-linear function over rationals: interpolates (x[i], y[i]) with
// affine tails.  x strictly increasing, never empty.
struct PL {
  std::vector<mpq_class> x, y;
  mpq_class leftSlope = 0, rightSlope = 0;
};

mpq_class pl_eval(const PL& f, const mpq_class& z) {
  if (z <= f.x.front()) return f.y.front() + f.leftSlope * (z - f.x.front());
  if (z >= f.x.back()) return f.y.back() + f.rightSlope * (z - f.x.back());
  const auto it = std::upper_bound(f.x.begin(), f.x.end(), z);
  const std::size_t i = static_cast<std::size_t>(it - f.x.begin());
  const mpq_class& x0 = f.x[i - 1];
  const mpq_class& x1 = f.x[i];
  return f.y[i - 1] + (f.y[i] - f.y[i - 1]) * (z - x0) / (x1 - x0);
}

// constant + sum of coef*f over terms
PL pl_combine(const std::vector<std::pair<mpq_class, const PL*>>& terms,
              const mpq_class& constant) {
  if (terms.empty()) throw InputError("piecewise combine: no terms");
  std::vector<mpq_class> xs;
  for (const auto& t : terms)
    xs.insert(xs.end(), t.second->x.begin(), t.second->x.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  PL out;
  out.x = std::move(xs);
  out.y.reserve(out.x.size());
  for (const auto& xi : out.x) {
    mpq_class v = constant;
    for (const auto& t : terms) v += t.first * pl_eval(*t.second, xi);
    out.y.push_back(v);
  }
  for (const auto& t : terms) {
    out.leftSlope += t.first * t.second->leftSlope;
    out.rightSlope += t.first * t.second->rightSlope;
  }
  return out;
}

// Least z with f(z) = z.  Valid for f of slope <= 1 everywhere (so f - id is
// nonincreasing); our continuation values satisfy that by construction.
enum class RootKind { Found, AlwaysAbove, AlwaysBelow };
struct LeastRoot {
  RootKind kind;
  mpq_class z;
};

LeastRoot pl_least_root(const PL& f) {
  mpq_class h0 = f.y.front() - f.x.front();
  if (h0 <= 0) {
    if (f.leftSlope >= 1)
      return {h0 < 0 ? RootKind::AlwaysBelow : RootKind::Found, f.x.front()};
    if (h0 == 0) return {RootKind::Found, f.x.front()};
    // f - id grows leftward at rate 1 - leftSlope > 0: crossing in the tail.
    return {RootKind::Found,
            (f.y.front() - f.leftSlope * f.x.front()) / (1 - f.leftSlope)};
  }
  mpq_class hPrev = h0;
  for (std::size_t i = 1; i < f.x.size(); ++i) {
    const mpq_class hi = f.y[i] - f.x[i];
    if (hi <= 0) {
      const mpq_class z =
          f.x[i - 1] + (f.x[i] - f.x[i - 1]) * hPrev / (hPrev - hi);
      return {RootKind::Found, z};
    }
    hPrev = hi;
  }
  if (f.rightSlope >= 1) return {RootKind::AlwaysAbove, f.x.back()};
  return {RootKind::Found, f.x.back() + hPrev / (1 - f.rightSlope)};
}

// max(z, f(z)) for f with nonincreasing f - id: f to the left of the least
// crossing, the identity to its right.
PL pl_max_identity(const PL& f) {
  const LeastRoot r = pl_least_root(f);
  if (r.kind == RootKind::AlwaysAbove) return f;
  if (r.kind == RootKind::AlwaysBelow) {
    PL id;
    id.x = {f.x.front()};
    id.y = {f.x.front()};
    id.leftSlope = 1;
    id.rightSlope = 1;
    return id;
  }
  PL out;
  for (std::size_t i = 0; i < f.x.size() && f.x[i] < r.z; ++i) {
    out.x.push_back(f.x[i]);
    out.y.push_back(f.y[i]);
  }
  out.x.push_back(r.z);
  out.y.push_back(r.z);
  out.leftSlope = f.leftSlope;
  out.rightSlope = 1;
  return out;
}

struct ExactIndex {
  std::unordered_map<const ExactNode*, mpq_class> sigma;
  std::unordered_map<const ExactNode*, std::size_t> internalIdx, leafIdx;
};

PL build_w(const ExactNode& n, ExactIndex* idx);

PL build_g(const ExactNode& n, ExactIndex* idx) {
  std::vector<PL> ws;
  std::vector<std::pair<mpq_class, const PL*>> terms;
  mpq_class constant = 0;
  ws.reserve(n.children.size());
  for (std::size_t j = 0; j < n.children.size(); ++j) {
    ws.push_back(build_w(n.children[j], idx));
    if (n.branchProbs[j] > 0) constant -= n.branchProbs[j] * n.children[j].arrivalCost;
  }
  for (std::size_t j = 0; j < n.children.size(); ++j)
    if (n.branchProbs[j] > 0) terms.emplace_back(n.branchProbs[j], &ws[j]);
  return pl_combine(terms, constant);
}

PL build_w(const ExactNode& n, ExactIndex* idx) {
  if (n.is_leaf()) {
    PL w;
    w.x = {n.value};
    w.y = {n.value};
    w.leftSlope = 0;
    w.rightSlope = 1;
    return w;
  }
  PL g = build_g(n, idx);
  if (idx) {
    const LeastRoot r = pl_least_root(g);
    if (r.kind != RootKind::Found)
      throw SolverError("exact strike: continuation value has no fixed point");
    idx->sigma.emplace(&n, r.z);
  }
  return pl_max_identity(g);
}

void assign_indices(const ExactNode& n, ExactIndex& idx) {
  if (n.is_leaf()) {
    const std::size_t k = idx.leafIdx.size();
    idx.leafIdx.emplace(&n, k);
    return;
  }
  const std::size_t k = idx.internalIdx.size();
  idx.internalIdx.emplace(&n, k);
  for (const auto& c : n.children) assign_indices(c, idx);
}

void validate_node(const ExactNode& n, bool isRoot) {
  if (n.arrivalCost < 0) throw InputError("inspection tree: negative arrival cost");
  if (isRoot && n.arrivalCost != 0)
    throw InputError("inspection tree: root arrival cost must be 0");
  if (n.is_leaf()) {
    if (!n.branchProbs.empty())
      throw InputError("inspection tree: leaf with branch probabilities");
    return;
  }
  if (n.branchProbs.size() != n.children.size())
    throw InputError("inspection tree: branch/child count mismatch");
  mpq_class sum = 0;
  for (const auto& p : n.branchProbs) {
    if (p < 0) throw InputError("inspection tree: negative branch probability");
    sum += p;
  }
  if (sum != 1)
    throw InputError("inspection tree: branch probabilities must sum to 1 exactly");
  for (const auto& c : n.children) validate_node(c, false);
}

}  // namespace

void validate(const ExactNode& root) { validate_node(root, true); }

std::size_t internal_count(const ExactNode& root) {
  if (root.is_leaf()) return 0;
  std::size_t n = 1;
  for (const auto& c : root.children) n += internal_count(c);
  return n;
}

std::size_t leaf_count(const ExactNode& root) {
  if (root.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : root.children) n += leaf_count(c);
  return n;
}

mpq_class exact_generalized_strike(const ExactNode& node) {
  if (node.is_leaf()) throw InputError("exact strike: node is a leaf");
  PL g = build_g(node, nullptr);
  const LeastRoot r = pl_least_root(g);
  if (r.kind != RootKind::Found)
    throw SolverError("exact strike: continuation value has no fixed point");
  return r.z;
}

namespace {

struct Walker {
  const StagePolicy* policy;
  const ExactIndex* idx;
  mpq_class lhs = 0, rhs = 0;
  bool exposed = false;

  void walk(const ExactNode& n, const mpq_class& prob, const mpq_class& cost,
            const mpq_class& cap, bool hasCap) {
    if (n.is_leaf()) {
      if (policy->acquireAt[idx->leafIdx.at(&n)]) {
        lhs += prob * (n.value - cost);
        rhs += prob * (hasCap && cap < n.value ? cap : n.value);
      } else {
        lhs -= prob * cost;
        if (hasCap && n.value > cap) exposed = true;
      }
      return;
    }
    const mpq_class& sig = idx->sigma.at(&n);
    if (!policy->continueAt[idx->internalIdx.at(&n)]) {
      lhs -= prob * cost;
      if (hasCap && sig > cap) exposed = true;
      return;
    }
    const mpq_class newCap = hasCap && cap < sig ? cap : sig;
    for (std::size_t j = 0; j < n.children.size(); ++j) {
      if (n.branchProbs[j] == 0) continue;
      walk(n.children[j], prob * n.branchProbs[j],
           cost + n.children[j].arrivalCost, newCap, true);
    }
  }
};

}  // namespace

ExactAmortization amortization_check(const ExactNode& root, const StagePolicy& policy) {
  validate(root);
  ExactIndex idx;
  assign_indices(root, idx);
  if (policy.continueAt.size() != idx.internalIdx.size() ||
      policy.acquireAt.size() != idx.leafIdx.size())
    throw InputError("amortization_check: policy bit counts do not match the tree");
  if (!root.is_leaf()) build_w(root, &idx);
  Walker w;
  w.policy = &policy;
  w.idx = &idx;
  w.walk(root, 1, 0, 0, false);
  return {w.lhs, w.rhs, !w.exposed};
}

std::vector<StagePolicy> all_policies(const ExactNode& root) {
  const std::size_t nInt = internal_count(root);
  const std::size_t nLeaf = leaf_count(root);
  if (nInt + nLeaf > 16)
    throw CapacityError("all_policies: too many decision bits");
  std::vector<StagePolicy> out;
  out.reserve(std::size_t{1} << (nInt + nLeaf));
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (nInt + nLeaf)); ++mask) {
    StagePolicy pol;
    pol.continueAt.resize(nInt);
    pol.acquireAt.resize(nLeaf);
    for (std::size_t b = 0; b < nInt; ++b) pol.continueAt[b] = (mask >> b) & 1;
    for (std::size_t b = 0; b < nLeaf; ++b) pol.acquireAt[b] = (mask >> (nInt + b)) & 1;
    out.push_back(std::move(pol));
  }
  return out;
}

ExactNode exact_from_tree(const Node& root) {
  ExactNode out;
  out.arrivalCost = mpq_class(root.arrivalCost);
  out.value = mpq_class(root.value);
  out.branchProbs.reserve(root.branchProbs.size());
  for (double p : root.branchProbs) out.branchProbs.emplace_back(p);
  out.children.reserve(root.children.size());
  for (const auto& c : root.children) out.children.push_back(exact_from_tree(c));
  return out;
}

Node tree_from_exact(const ExactNode& root) {
  Node out;
  out.arrivalCost = root.arrivalCost.get_d();
  out.value = root.value.get_d();
  out.branchProbs.reserve(root.branchProbs.size());
  for (const auto& p : root.branchProbs) out.branchProbs.push_back(p.get_d());
  out.children.reserve(root.children.size());
  for (const auto& c : root.children) out.children.push_back(tree_from_exact(c));
  return out;
}

}  // namespace pandora::multistage
