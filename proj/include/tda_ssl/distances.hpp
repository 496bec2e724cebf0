#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "complex.hpp"

namespace tda_ssl {

using DiagramPoint = std::pair<double, double>;  // (birth, death)

/// L-infinity distance between two diagram points.
inline double pair_cost(const DiagramPoint& p, const DiagramPoint& q) {
  return std::max(std::abs(q.first - p.first), std::abs(q.second - p.second));
}

/// Cost of leaving a point unmatched: half its persistence.
inline double point_cost(const DiagramPoint& p) { return std::abs(p.second - p.first) / 2.0; }

struct DiagramMatching {
  std::vector<std::pair<std::size_t, std::size_t>> matched;
  std::vector<std::size_t> unmatched_p;
  std::vector<std::size_t> unmatched_q;
};

inline void validate_matching(std::size_t np, std::size_t nq, const DiagramMatching& m) {
  std::vector<int> seen_p(np, 0), seen_q(nq, 0);
  auto mark = [](std::vector<int>& seen, std::size_t i) {
    if (i >= seen.size()) throw std::invalid_argument("matching index out of range");
    if (seen[i]++) throw std::invalid_argument("matching uses an index more than once");
  };
  for (const auto& [i, j] : m.matched) {
    mark(seen_p, i);
    mark(seen_q, j);
  }
  for (auto i : m.unmatched_p) mark(seen_p, i);
  for (auto j : m.unmatched_q) mark(seen_q, j);
  if (std::count(seen_p.begin(), seen_p.end(), 0) || std::count(seen_q.begin(), seen_q.end(), 0))
    throw std::invalid_argument("matching does not cover every diagram point");
}

/// max of matched pair costs and unmatched point costs; 0 for empty diagrams.
inline double matching_cost(std::span<const DiagramPoint> p, std::span<const DiagramPoint> q, const DiagramMatching& m) {
  validate_matching(p.size(), q.size(), m);
  double c = 0.0;
  for (const auto& [i, j] : m.matched) c = std::max(c, pair_cost(p[i], q[j]));
  for (auto i : m.unmatched_p) c = std::max(c, point_cost(p[i]));
  for (auto j : m.unmatched_q) c = std::max(c, point_cost(q[j]));
  return c;
}

namespace detail {

// Hopcroft-Karp maximum matching on a bipartite graph with `left` x `right` vertices.
class HopcroftKarp {
 public:
  HopcroftKarp(std::size_t left, std::size_t right) : adj_(left), match_l_(left, kFree), match_r_(right, kFree), layer_(left) {}

  void add_edge(std::size_t u, std::size_t v) { adj_[u].push_back(v); }

  std::size_t max_matching() {
    std::size_t size = 0;
    while (bfs())
      for (std::size_t u = 0; u < adj_.size(); ++u)
        if (match_l_[u] == kFree && dfs(u)) ++size;
    return size;
  }

 private:
  static constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();
  static constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

  bool bfs() {
    std::queue<std::size_t> q;
    bool found = false;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      layer_[u] = match_l_[u] == kFree ? 0 : kUnreached;
      if (match_l_[u] == kFree) q.push(u);
    }
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto v : adj_[u]) {
        const auto w = match_r_[v];
        if (w == kFree) {
          found = true;
        } else if (layer_[w] == kUnreached) {
          layer_[w] = layer_[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(std::size_t u) {
    for (auto v : adj_[u]) {
      const auto w = match_r_[v];
      if (w == kFree || (layer_[w] == layer_[u] + 1 && dfs(w))) {
        match_l_[u] = v;
        match_r_[v] = u;
        return true;
      }
    }
    layer_[u] = kUnreached;
    return false;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_l_, match_r_, layer_;
};

// Is there a matching of cost <= delta? Left side: P then diagonal copies of Q;
// right side: Q then diagonal copies of P.
inline bool bottleneck_feasible(std::span<const DiagramPoint> p, std::span<const DiagramPoint> q, double delta) {
  const std::size_t m = p.size(), k = q.size(), n = m + k;
  HopcroftKarp hk(n, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      if (pair_cost(p[i], q[j]) <= delta) hk.add_edge(i, j);
    if (point_cost(p[i]) <= delta) hk.add_edge(i, k + i);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (point_cost(q[j]) <= delta) hk.add_edge(m + j, j);
    for (std::size_t i = 0; i < m; ++i) hk.add_edge(m + j, k + i);
  }
  return hk.max_matching() == n;
}

// Minimum-cost perfect assignment on a square cost matrix (Hungarian method
// with potentials, O(n^3)). Returns the optimal total cost.
inline double min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return 0.0;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  // Sum the chosen entries directly rather than trusting the potentials.
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[p[j] - 1][j - 1];
  return total;
}

inline void require_finite(std::span<const DiagramPoint> d) {
  for (const auto& [b, e] : d)
    if (!std::isfinite(b) || !std::isfinite(e)) throw std::invalid_argument("diagram points must be finite (cap essential classes first)");
}

}  // namespace detail

/// Exact bottleneck distance: binary search over the realised cost values
/// with a Hopcroft-Karp feasibility test.
inline double bottleneck_distance(std::span<const DiagramPoint> p, std::span<const DiagramPoint> q) {
  detail::require_finite(p);
  detail::require_finite(q);
  if (p.empty() && q.empty()) return 0.0;
  std::vector<double> candidates;
  candidates.reserve(p.size() * q.size() + p.size() + q.size());
  for (const auto& a : p) {
    candidates.push_back(point_cost(a));
    for (const auto& b : q) candidates.push_back(pair_cost(a, b));
  }
  for (const auto& b : q) candidates.push_back(point_cost(b));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // The largest point cost is always feasible, so the search terminates inside the set.
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (detail::bottleneck_feasible(p, q, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

/// r-Wasserstein distance. An unmatched point contributes |death - birth|^r
/// (or (|death - birth| / 2)^r with `halve_diagonal`).
inline double wasserstein_distance(std::span<const DiagramPoint> p, std::span<const DiagramPoint> q, double order = 1.0,
                                   bool halve_diagonal = false) {
  if (!(order >= 1.0)) throw std::invalid_argument("wasserstein order must be >= 1");
  detail::require_finite(p);
  detail::require_finite(q);
  // canonical argument order makes the floating-point sum symmetric
  if (std::lexicographical_compare(q.begin(), q.end(), p.begin(), p.end())) std::swap(p, q);
  const std::size_t m = p.size(), k = q.size(), n = m + k;
  if (n == 0) return 0.0;
  auto diagonal = [&](const DiagramPoint& a) {
    const double pers = std::abs(a.second - a.first);
    return std::pow(halve_diagonal ? pers / 2.0 : pers, order);
  };
  // rows: P then diagonal slots; columns: Q then diagonal slots
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) cost[i][j] = std::pow(pair_cost(p[i], q[j]), order);
    const double c = diagonal(p[i]);
    for (std::size_t j = k; j < n; ++j) cost[i][j] = c;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double c = diagonal(q[j]);
    for (std::size_t i = m; i < n; ++i) cost[i][j] = c;
  }
  return std::pow(std::max(0.0, detail::min_cost_assignment(cost)), 1.0 / order);
}

enum class DiagramMetric { Bottleneck, Wasserstein };

struct DiagramDistanceConfig {
  DiagramMetric metric = DiagramMetric::Bottleneck;
  double order = 1.0;
  bool halve_diagonal = false;
};

/// Distance between diagrams that may hold several homology dimensions:
/// computed per dimension in `dims` and summed.
inline double diagram_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, const DiagramDistanceConfig& cfg,
                               std::span<const int> dims) {
  double total = 0.0;
  for (int d : dims) {
    const auto pa = a.points(d), pb = b.points(d);
    total += cfg.metric == DiagramMetric::Bottleneck ? bottleneck_distance(pa, pb)
                                                     : wasserstein_distance(pa, pb, cfg.order, cfg.halve_diagonal);
  }
  return total;
}

}  // namespace tda_ssl
