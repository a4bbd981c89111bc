#include "pandora/multistage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

namespace pandora::multistage {

namespace {

void validate_node(const Node& n, bool isRoot) {
  if (!std::isfinite(n.arrivalCost) || n.arrivalCost < 0.0)
    throw InputError("inspection tree: arrival costs must be finite and >= 0");
  if (isRoot && n.arrivalCost != 0.0)
    throw InputError("inspection tree: root arrival cost must be 0");
  if (n.is_leaf()) {
    if (!std::isfinite(n.value)) throw InputError("inspection tree: non-finite leaf value");
    if (!n.branchProbs.empty())
      throw InputError("inspection tree: leaf with branch probabilities");
    return;
  }
  if (n.branchProbs.size() != n.children.size())
    throw InputError("inspection tree: branch/child count mismatch");
  double total = 0.0;
  for (double p : n.branchProbs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw InputError("inspection tree: branch probabilities must be >= 0");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw InputError("inspection tree: branch probabilities sum to " + std::to_string(total));
  for (const Node& c : n.children) validate_node(c, false);
}

double tree_min_leaf(const Node& n) {
  if (n.is_leaf()) return n.value;
  double m = std::numeric_limits<double>::infinity();
  for (const Node& c : n.children) m = std::min(m, tree_min_leaf(c));
  return m;
}

double tree_max_leaf(const Node& n) {
  if (n.is_leaf()) return n.value;
  double m = -std::numeric_limits<double>::infinity();
  for (const Node& c : n.children) m = std::max(m, tree_max_leaf(c));
  return m;
}

double tree_total_cost(const Node& n) {
  double t = n.arrivalCost;
  for (const Node& c : n.children) t += tree_total_cost(c);
  return t;
}

// Optimal continue/stop value with outside option z; leaves are max(v, z).
double stop_option_value(const Node& n, double z) {
  if (n.is_leaf()) return std::max(n.value, z);
  double cont = 0.0;
  for (std::size_t j = 0; j < n.children.size(); ++j)
    cont += n.branchProbs[j] * (-n.children[j].arrivalCost + stop_option_value(n.children[j], z));
  return std::max(z, cont);
}

// g(z): value of committing to one further stage from this node, then acting
// optimally with outside option z.
double one_stage_value(const Node& n, double z) {
  double g = 0.0;
  for (std::size_t j = 0; j < n.children.size(); ++j)
    g += n.branchProbs[j] * (-n.children[j].arrivalCost + stop_option_value(n.children[j], z));
  return g;
}

}  // namespace

void validate(const Node& root) { validate_node(root, true); }

double generalized_strike(const Node& root) {
  if (root.is_leaf()) return root.value;
  // h(z) = g(z) - z is nonincreasing (slope of g lies in [0,1]); bisection
  // converges to the least fixed point even across a zero plateau.
  double lo = -tree_total_cost(root) - std::fabs(tree_min_leaf(root)) - 1.0;
  double hi = tree_max_leaf(root) + 1.0;
  auto h = [&](double z) { return one_stage_value(root, z) - z; };
  if (h(lo) <= 0.0 || h(hi) > 0.0)
    throw SolverError("generalized_strike: fixed point escapes its bracket");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) > 0.0) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-10 * std::max({1.0, std::fabs(lo), std::fabs(hi)})) break;
  }
  return 0.5 * (lo + hi);
}

namespace {

void walk_indices(const Node& n, double runningMin, TreeIndices& out) {
  if (n.is_leaf()) {
    out.leafKappa.push_back(std::min(runningMin, n.value));
    return;
  }
  const double sigma = generalized_strike(n);
  out.sigma.push_back(sigma);
  const double m = std::min(runningMin, sigma);
  for (const Node& c : n.children) walk_indices(c, m, out);
}

}  // namespace

TreeIndices compute_indices(const Node& root) {
  validate(root);
  TreeIndices out;
  walk_indices(root, std::numeric_limits<double>::infinity(), out);
  out.rootSigma = root.is_leaf() ? root.value : out.sigma.front();
  return out;
}

std::vector<int> sample_path(const Node& root, RngStream& rng) {
  std::vector<int> path;
  const Node* cur = &root;
  while (!cur->is_leaf()) {
    const double u = rng.next_double();
    double acc = 0.0;
    std::size_t pick = cur->children.size() - 1;
    for (std::size_t j = 0; j < cur->branchProbs.size(); ++j) {
      acc += cur->branchProbs[j];
      if (u < acc) {
        pick = j;
        break;
      }
    }
    path.push_back(static_cast<int>(pick));
    cur = &cur->children[pick];
  }
  return path;
}

namespace {

void collect_sigmas(const Node& n, SigmaCache& out) {
  if (n.is_leaf()) return;
  out.emplace(&n, generalized_strike(n));
  for (const auto& c : n.children) collect_sigmas(c, out);
}

}  // namespace

SigmaCache cache_sigmas(const Node& root) {
  SigmaCache out;
  collect_sigmas(root, out);
  return out;
}

SearchOutcome descending_priority(const std::vector<Node>& trees,
                                  const std::vector<std::vector<int>>& paths) {
  std::vector<SigmaCache> sigmas;
  sigmas.reserve(trees.size());
  for (const auto& t : trees) sigmas.push_back(cache_sigmas(t));
  return descending_priority(trees, paths, sigmas);
}

SearchOutcome descending_priority(const std::vector<Node>& trees,
                                  const std::vector<std::vector<int>>& paths,
                                  const std::vector<SigmaCache>& sigmas) {
  const std::size_t n = trees.size();
  if (paths.size() != n) throw InputError("descending_priority: trees/paths sizes differ");
  if (sigmas.size() != n) throw InputError("descending_priority: trees/sigmas sizes differ");

  struct State {
    const Node* node;
    std::size_t step = 0;  // stages advanced so far
  };
  std::vector<State> st(n);
  for (std::size_t i = 0; i < n; ++i) st[i].node = &trees[i];

  auto priority = [&](std::size_t i) {
    return st[i].node->is_leaf() ? st[i].node->value : sigmas[i].at(st[i].node);
  };
  std::vector<double> prio(n);
  for (std::size_t i = 0; i < n; ++i) prio[i] = priority(i);

  SearchOutcome out;
  for (;;) {
    std::size_t top = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (prio[i] > prio[top] ||
          (prio[i] == prio[top] &&
           (i < top || (i == top && st[i].step < st[top].step))))
        top = i;
    }
    if (prio[top] < 0.0) break;  // nothing left worth pursuing
    if (st[top].node->is_leaf()) {
      out.winner = static_cast<int>(top);
      out.grossValue = st[top].node->value;
      break;
    }
    const auto& path = paths[top];
    if (st[top].step >= path.size())
      throw InputError("descending_priority: realized path shorter than the tree");
    const int branch = path[st[top].step];
    if (branch < 0 || static_cast<std::size_t>(branch) >= st[top].node->children.size())
      throw InputError("descending_priority: branch index out of range");
    if (st[top].step == 0) out.inspected.push_back(static_cast<int>(top));
    st[top].node = &st[top].node->children[branch];
    ++st[top].step;
    out.totalCost += st[top].node->arrivalCost;
    prio[top] = priority(top);
  }
  out.welfare = out.grossValue - out.totalCost;
  return out;
}

namespace {

struct LeafPath {
  std::vector<int> path;
  double prob;
};

void collect_paths(const Node& n, std::vector<int>& cur, double p, std::vector<LeafPath>& out) {
  if (n.is_leaf()) {
    out.push_back({cur, p});
    return;
  }
  for (std::size_t j = 0; j < n.children.size(); ++j) {
    cur.push_back(static_cast<int>(j));
    collect_paths(n.children[j], cur, p * n.branchProbs[j], out);
    cur.pop_back();
  }
}

std::vector<LeafPath> leaf_paths(const Node& root) {
  std::vector<LeafPath> out;
  std::vector<int> cur;
  collect_paths(root, cur, 1.0, out);
  return out;
}

void check_joint_capacity(const std::vector<std::vector<LeafPath>>& all) {
  double combos = 1.0;
  for (const auto& a : all) combos *= static_cast<double>(a.size());
  if (combos > 2e6)
    throw CapacityError("joint path enumeration: too many leaf combinations");
}

}  // namespace

double descending_priority_expected_welfare(const std::vector<Node>& trees) {
  std::vector<std::vector<LeafPath>> all;
  for (const auto& t : trees) all.push_back(leaf_paths(t));
  check_joint_capacity(all);
  std::vector<SigmaCache> sigmas;
  for (const auto& t : trees) sigmas.push_back(cache_sigmas(t));
  const std::size_t n = trees.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<std::vector<int>> paths(n);
  double total = 0.0;
  for (;;) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      paths[i] = all[i][idx[i]].path;
      p *= all[i][idx[i]].prob;
    }
    if (p > 0.0) total += p * descending_priority(trees, paths, sigmas).welfare;
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++idx[i] < all[i].size()) break;
      idx[i] = 0;
    }
    if (i == n) break;
  }
  return total;
}

double max_leaf_kappa_expectation(const std::vector<Node>& trees) {
  std::vector<std::vector<LeafPath>> all;
  std::vector<std::vector<double>> kappas;
  for (const auto& t : trees) {
    all.push_back(leaf_paths(t));
    kappas.push_back(compute_indices(t).leafKappa);
  }
  check_joint_capacity(all);
  const std::size_t n = trees.size();
  std::vector<std::size_t> idx(n, 0);
  double total = 0.0;
  for (;;) {
    double p = 1.0, best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p *= all[i][idx[i]].prob;
      best = std::max(best, kappas[i][idx[i]]);
    }
    total += p * best;
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++idx[i] < all[i].size()) break;
      idx[i] = 0;
    }
    if (i == n) break;
  }
  return total;
}

std::size_t internal_count(const Node& root) {
  if (root.is_leaf()) return 0;
  std::size_t n = 1;
  for (const auto& c : root.children) n += internal_count(c);
  return n;
}

std::size_t leaf_count(const Node& root) {
  if (root.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : root.children) n += leaf_count(c);
  return n;
}

namespace {

// Value of one policy with outside option z claimable at any stop.  Indices
// advance in preorder as the walk visits nodes.
double policy_value_walk(const Node& n, const StagePolicy& pol, double z,
                         std::size_t& iIdx, std::size_t& lIdx) {
  if (n.is_leaf()) {
    const bool acquire = pol.acquireAt[lIdx++];
    return acquire ? n.value : z;
  }
  const bool cont = pol.continueAt[iIdx++];
  double continuation = 0.0;
  for (std::size_t j = 0; j < n.children.size(); ++j) {
    const Node& c = n.children[j];
    continuation += n.branchProbs[j] * (-c.arrivalCost + policy_value_walk(c, pol, z, iIdx, lIdx));
  }
  // Decision bits below a stop still get consumed so preorder indexing stays
  // aligned across policies; the continuation value is simply discarded.
  return cont ? continuation : z;
}

}  // namespace

double policy_value(const Node& tree, const StagePolicy& policy, double outsideOption) {
  validate(tree);
  if (policy.continueAt.size() != internal_count(tree) ||
      policy.acquireAt.size() != leaf_count(tree))
    throw InputError("policy_value: policy bit counts do not match the tree");
  std::size_t i = 0, l = 0;
  return policy_value_walk(tree, policy, outsideOption, i, l);
}

PolicySearch enumerate_policies(const Node& tree, double outsideOption) {
  validate(tree);
  const std::size_t nInt = internal_count(tree);
  const std::size_t nLeaf = leaf_count(tree);
  if (nInt > 12 || nInt + nLeaf > 21)
    throw CapacityError("enumerate_policies: too many decision bits");
  const std::size_t bits = nInt + nLeaf;
  PolicySearch best;
  best.bestValue = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
    StagePolicy pol;
    pol.continueAt.resize(nInt);
    pol.acquireAt.resize(nLeaf);
    for (std::size_t b = 0; b < nInt; ++b) pol.continueAt[b] = (mask >> b) & 1;
    for (std::size_t b = 0; b < nLeaf; ++b) pol.acquireAt[b] = (mask >> (nInt + b)) & 1;
    std::size_t i = 0, l = 0;
    const double val = policy_value_walk(tree, pol, outsideOption, i, l);
    if (val > best.bestValue) {
      best.bestValue = val;
      best.bestPolicy = pol;
    }
  }
  return best;
}

}  // namespace pandora::multistage
