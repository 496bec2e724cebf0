#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <vector>

#include "geometry.hpp"

namespace tda_ssl {

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

}  // namespace detail

/// Smallest epsilon at which the Vietoris-Rips 1-skeleton is connected, i.e.
/// the heaviest edge of a minimum spanning tree. Union-find sweep over edges
/// sorted ascending.
inline double connectivity_radius(const MetricCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n <= 1) return 0.0;
  std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(cloud.dist(i, j), i, j);
  std::sort(edges.begin(), edges.end());
  detail::DisjointSets sets(n);
  std::size_t components = n;
  for (const auto& [w, i, j] : edges) {
    if (sets.unite(i, j) && --components == 1) return w;
  }
  return 0.0;  // unreachable for n >= 2
}

/// |r(base) - r(base + {x})|.
inline double radius_variation(const MetricCloud& base, const Point& x) {
  return std::abs(connectivity_radius(base) - connectivity_radius(base.with_point(x)));
}

}  // namespace tda_ssl
