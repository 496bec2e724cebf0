#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "geometry.hpp"

namespace tda_ssl {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Simplex {
  std::vector<int> vertices;  // strictly increasing
  double value = 0.0;

  int dimension() const { return static_cast<int>(vertices.size()) - 1; }
};

// Filtration order: value, then dimension, then lexicographic vertices.
inline bool filtration_less(const Simplex& a, const Simplex& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
  return a.vertices < b.vertices;
}

struct Filtration {
  std::vector<Simplex> simplices;
  int max_dim = 1;
  double cap = 0.0;
};

/// Vietoris-Rips filtration up to simplices of dimension `max_dim` (1 or 2)
/// whose diameter does not exceed `cap`. The cap defaults to the enclosing
/// radius of the cloud.
inline Filtration build_vr_filtration(const MetricCloud& cloud, int max_dim = 1, std::optional<double> cap = std::nullopt) {
  if (max_dim != 1 && max_dim != 2) throw std::invalid_argument("max_dim must be 1 or 2");
  if (cap && !(*cap > 0.0)) throw std::invalid_argument("filtration cap must be positive");
  const double limit = cap ? *cap : enclosing_radius(cloud);
  const int n = static_cast<int>(cloud.size());

  Filtration f;
  f.max_dim = max_dim;
  f.cap = limit;
  for (int i = 0; i < n; ++i) f.simplices.push_back({{i}, 0.0});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (cloud.dist(i, j) <= limit) f.simplices.push_back({{i, j}, cloud.dist(i, j)});
  if (max_dim == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double dij = cloud.dist(i, j);
        if (dij > limit) continue;
        for (int k = j + 1; k < n; ++k) {
          const double diam = std::max({dij, cloud.dist(i, k), cloud.dist(j, k)});
          if (diam <= limit) f.simplices.push_back({{i, j, k}, diam});
        }
      }
  }
  std::sort(f.simplices.begin(), f.simplices.end(), filtration_less);
  return f;
}

struct PersistencePair {
  int dim = 0;
  double birth = 0.0;
  double death = kInfinity;

  bool essential() const { return std::isinf(death); }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> pairs;

  /// (birth, death) points of one homology dimension.
  std::vector<std::pair<double, double>> points(int dim) const {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : pairs)
      if (p.dim == dim) out.emplace_back(p.birth, p.death);
    return out;
  }

  std::size_t count(int dim) const {
    return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [dim](const auto& p) { return p.dim == dim; }));
  }
};

namespace detail {

// Simplices have at most 3 vertices, so vertex lists pack into one key.
inline std::uint64_t simplex_key(const std::vector<int>& v) {
  std::uint64_t key = 0;
  for (int x : v) key = (key << 21) | static_cast<std::uint64_t>(x + 1);
  return key;
}

using Column = std::vector<std::size_t>;

inline void add_column(Column& target, const Column& source) {
  Column out;
  out.reserve(target.size() + source.size());
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(), std::back_inserter(out));
  target.swap(out);
}

}  // namespace detail

/// Persistence pairs over Z/2 by boundary-matrix column reduction with
/// clearing. Zero-persistence pairs are dropped unless `keep_zero_persistence`;
/// unpaired simplices give essential classes (death = +inf).
inline PersistenceDiagram persistence_diagram(const Filtration& filt, int max_homology_dim = 0, bool keep_zero_persistence = false) {
  if (max_homology_dim < 0 || max_homology_dim >= filt.max_dim)
    throw std::invalid_argument("H_" + std::to_string(max_homology_dim) + " needs simplices of dimension " +
                                std::to_string(max_homology_dim + 1) + " in the filtration");
  const auto& s = filt.simplices;
  const std::size_t m = s.size();

  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(m * 2);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& v = s[i].vertices;
    if (v.empty() || v.size() > 3) throw std::invalid_argument("simplex size must be 1..3");
    if (!std::is_sorted(v.begin(), v.end()) || std::adjacent_find(v.begin(), v.end()) != v.end())
      throw std::invalid_argument("simplex vertices must be strictly increasing");
    if (i > 0 && s[i].value < s[i - 1].value) throw std::invalid_argument("filtration values must be non-decreasing");
    index.emplace(detail::simplex_key(v), i);
  }

  std::vector<detail::Column> columns(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& v = s[i].vertices;
    if (v.size() == 1) continue;
    for (std::size_t drop = 0; drop < v.size(); ++drop) {
      std::vector<int> face;
      for (std::size_t k = 0; k < v.size(); ++k)
        if (k != drop) face.push_back(v[k]);
      const auto it = index.find(detail::simplex_key(face));
      if (it == index.end() || it->second >= i) throw std::invalid_argument("filtration is not face-closed");
      columns[i].push_back(it->second);
    }
    std::sort(columns[i].begin(), columns[i].end());
  }

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> pivot_owner(m, kNone);
  std::vector<bool> cleared(m, false);
  std::vector<bool> paired(m, false);

  PersistenceDiagram diagram;
  // Highest dimension first so that pivots clear the columns below them.
  for (int d = max_homology_dim + 1; d >= 1; --d) {
    for (std::size_t j = 0; j < m; ++j) {
      if (s[j].dimension() != d || cleared[j]) continue;
      auto& col = columns[j];
      while (!col.empty() && pivot_owner[col.back()] != kNone) detail::add_column(col, columns[pivot_owner[col.back()]]);
      if (col.empty()) continue;
      const std::size_t low = col.back();
      pivot_owner[low] = j;
      cleared[low] = true;
      paired[low] = paired[j] = true;
      if (keep_zero_persistence || s[low].value != s[j].value) diagram.pairs.push_back({d - 1, s[low].value, s[j].value});
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const int d = s[i].dimension();
    // Top-dimensional simplices have no cofaces here; their zero columns are not classes we report.
    if (!paired[i] && d <= max_homology_dim && columns[i].empty()) diagram.pairs.push_back({d, s[i].value, kInfinity});
  }
  std::sort(diagram.pairs.begin(), diagram.pairs.end(),
            [](const auto& a, const auto& b) { return std::tie(a.dim, a.birth, a.death) < std::tie(b.dim, b.birth, b.death); });
  return diagram;
}

/// Replace every infinite death with `value`.
inline PersistenceDiagram cap_infinite(PersistenceDiagram d, double value) {
  for (auto& p : d.pairs)
    if (p.essential()) p.death = value;
  return d;
}

/// Diagram of a cloud with essential classes capped at its enclosing radius.
inline PersistenceDiagram capped_diagram(const MetricCloud& cloud, int max_homology_dim = 0) {
  const auto filt = build_vr_filtration(cloud, max_homology_dim + 1, std::nullopt);
  return cap_infinite(persistence_diagram(filt, max_homology_dim), filt.cap);
}

inline void write_diagram_csv(std::ostream& os, const PersistenceDiagram& d) {
  os << "dim,birth,death\n";
  for (const auto& p : d.pairs) os << p.dim << ',' << csv::format_exact(p.birth) << ',' << csv::format_exact(p.death) << '\n';
}

inline PersistenceDiagram read_diagram_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || csv::trim(line) != "dim,birth,death")
    throw data_error("diagram csv: expected header 'dim,birth,death'");
  PersistenceDiagram d;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != 3) throw data_error("diagram csv: row " + std::to_string(row) + " must have 3 cells");
    const auto dim = csv::parse_double(cells[0]);
    const auto birth = csv::parse_double(cells[1]);
    const auto death = csv::parse_double(cells[2]);
    if (!dim || !birth || !death || *dim < 0 || *dim != std::floor(*dim) || std::isinf(*birth))
      throw data_error("diagram csv: malformed values in row " + std::to_string(row));
    if (*death < *birth) throw data_error("diagram csv: death before birth in row " + std::to_string(row));
    d.pairs.push_back({static_cast<int>(*dim), *birth, *death});
  }
  return d;
}

inline PersistenceDiagram read_diagram_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  return read_diagram_csv(in);
}

}  // namespace tda_ssl
