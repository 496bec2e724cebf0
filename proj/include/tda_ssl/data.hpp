#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "geometry.hpp"

namespace tda_ssl {

inline constexpr int kUnlabelled = -1;

struct Dataset {
  PointSet points;
  std::vector<int> labels;  // 0, 1 or kUnlabelled
  std::string name;
  std::string provenance;
  std::array<std::string, 2> class_names{"0", "1"};

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }

  std::size_t count(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
  }

  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.name = name;
    out.provenance = provenance;
    out.class_names = class_names;
    for (auto r : rows) {
      out.points.push_back(points[r]);
      out.labels.push_back(labels[r]);
    }
    return out;
  }
};

struct SplitSpec {
  double test_fraction = 0.2;
  int labelled_per_class = 25;
  std::uint64_t seed = 0;
};

namespace detail {

inline void require_even(std::size_t n, const char* what) {
  if (n == 0 || n % 2 != 0) throw std::invalid_argument(std::string(what) + ": n must be a positive even number");
}

inline std::string describe(double v) { return csv::format_exact(v); }

}  // namespace detail

/// Two isotropic Gaussian clusters, n/2 points each.
inline Dataset gen_blobs(std::size_t n, std::uint64_t seed, std::array<Point, 2> centers = {Point{-5.0, 0.0}, Point{5.0, 0.0}},
                         double sigma = 1.0) {
  detail::require_even(n, "blobs");
  if (!(sigma >= 0.0)) throw std::invalid_argument("blobs: sigma must be >= 0");
  if (centers[0].size() != centers[1].size() || centers[0].empty()) throw std::invalid_argument("blobs: centers must share a dimension");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset ds;
  ds.name = "blobs";
  ds.provenance = "blobs n=" + std::to_string(n) + " seed=" + std::to_string(seed) + " sigma=" + detail::describe(sigma);
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < n / 2; ++i) {
      Point p = centers[c];
      for (auto& v : p) v += sigma * noise(rng);
      ds.points.push_back(std::move(p));
      ds.labels.push_back(c);
    }
  return ds;
}

/// Class 0 on the unit circle, class 1 on a concentric circle of radius
/// `factor`; evenly spaced angles plus Gaussian noise.
inline Dataset gen_circles(std::size_t n, std::uint64_t seed, double factor = 0.5, double noise = 0.05) {
  detail::require_even(n, "circles");
  if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("circles: factor must be in (0, 1)");
  if (!(noise >= 0.0)) throw std::invalid_argument("circles: noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  ds.name = "circles";
  ds.provenance = "circles n=" + std::to_string(n) + " seed=" + std::to_string(seed) + " factor=" + detail::describe(factor) +
                  " noise=" + detail::describe(noise);
  const std::size_t half = n / 2;
  for (int c = 0; c < 2; ++c) {
    const double r = c == 0 ? 1.0 : factor;
    for (std::size_t i = 0; i < half; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(half);
      ds.points.push_back({r * std::cos(t), r * std::sin(t)});
      ds.labels.push_back(c);
    }
  }
  if (noise > 0.0)
    for (auto& p : ds.points)
      for (auto& v : p) v += noise * gauss(rng);
  return ds;
}

/// Two interleaving half circles: class 0 is the upper unit semicircle,
/// class 1 the lower one centred at (1, 0.5).
inline Dataset gen_moons(std::size_t n, std::uint64_t seed, double noise = 0.05) {
  detail::require_even(n, "moons");
  if (!(noise >= 0.0)) throw std::invalid_argument("moons: noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  ds.name = "moons";
  ds.provenance = "moons n=" + std::to_string(n) + " seed=" + std::to_string(seed) + " noise=" + detail::describe(noise);
  const std::size_t half = n / 2;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < half; ++i) {
      const double t = half == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(half - 1);
      if (c == 0)
        ds.points.push_back({std::cos(t), std::sin(t)});
      else
        ds.points.push_back({1.0 - std::cos(t), 0.5 - std::sin(t)});
      ds.labels.push_back(c);
    }
  if (noise > 0.0)
    for (auto& p : ds.points)
      for (auto& v : p) v += noise * gauss(rng);
  return ds;
}

struct CsvOptions {
  std::optional<std::string> label_column;  // default: last column
  std::string unlabelled_marker = "?";      // an empty cell is always unlabelled
};

/// Reads a header row, numeric feature columns and one label column. Class
/// tokens map to 0/1 by first appearance, except that the tokens "0" and "1"
/// keep their numeric meaning.
inline Dataset read_dataset_csv(std::istream& in, const CsvOptions& opt = {}, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line).empty()) throw data_error(source + ": missing header row");
  const auto header = csv::split(csv::trim(line));
  if (header.size() < 2) throw data_error(source + ": need at least one feature column and a label column");
  std::size_t label_col = header.size() - 1;
  if (opt.label_column) {
    const auto it = std::find(header.begin(), header.end(), *opt.label_column);
    if (it == header.end()) throw data_error(source + ": no column named '" + *opt.label_column + "'");
    label_col = static_cast<std::size_t>(it - header.begin());
  }

  Dataset ds;
  ds.provenance = source;
  std::vector<std::string> raw_labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(csv::trim(line));
    if (cells.size() != header.size())
      throw data_error(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    Point p;
    p.reserve(header.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) continue;
      const auto v = csv::parse_double(cells[c]);
      if (!v || !std::isfinite(*v))
        throw data_error(source + ": non-numeric value '" + cells[c] + "' at row " + std::to_string(row) + ", column " +
                         std::to_string(c + 1) + " (" + header[c] + ")");
      p.push_back(*v);
    }
    ds.points.push_back(std::move(p));
    raw_labels.emplace_back(csv::trim(cells[label_col]));
  }

  std::vector<std::string> tokens;
  for (const auto& t : raw_labels)
    if (!t.empty() && t != opt.unlabelled_marker && std::find(tokens.begin(), tokens.end(), t) == tokens.end()) tokens.push_back(t);
  if (tokens.size() > 2) throw data_error(source + ": more than two class tokens in label column (" + tokens[0] + ", " + tokens[1] + ", " + tokens[2] + ", ...)");
  const bool numeric = std::all_of(tokens.begin(), tokens.end(), [](const auto& t) { return t == "0" || t == "1"; });
  if (numeric) {
    ds.class_names = {"0", "1"};
  } else {
    if (tokens.size() > 0) ds.class_names[0] = tokens[0];
    if (tokens.size() > 1) ds.class_names[1] = tokens[1];
  }
  for (const auto& t : raw_labels) {
    if (t.empty() || t == opt.unlabelled_marker)
      ds.labels.push_back(kUnlabelled);
    else
      ds.labels.push_back(t == ds.class_names[0] ? 0 : 1);
  }
  return ds;
}

inline Dataset load_csv(const std::string& path, const CsvOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  auto ds = read_dataset_csv(in, opt, path);
  ds.name = path;
  return ds;
}

/// Header f0..f{k-1},label; numbers with 17 significant digits.
inline void write_dataset_csv(std::ostream& os, const Dataset& ds, const std::string& unlabelled_marker = "?") {
  const std::size_t f = ds.dim();
  for (std::size_t k = 0; k < f; ++k) os << 'f' << k << ',';
  os << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.points[i]) os << csv::format_exact(v) << ',';
    os << (ds.labels[i] == kUnlabelled ? unlabelled_marker : ds.class_names[ds.labels[i]]) << '\n';
  }
}

inline void save_csv(const Dataset& ds, const std::string& path, const std::string& unlabelled_marker = "?") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_dataset_csv(out, ds, unlabelled_marker);
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Stratified split; each class contributes round(test_fraction * size) rows
/// to the test side. Row order is preserved on both sides.
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) throw std::invalid_argument("test_fraction must be in (0, 1)");
  if (ds.count(kUnlabelled) > 0) throw data_error("split needs a fully labelled dataset");
  std::mt19937_64 rng(spec.seed);
  std::vector<bool> is_test(ds.size(), false);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == c) rows.push_back(i);
    const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(rows.size())));
    if (rows.size() < 2 || n_test == 0 || n_test == rows.size())
      throw data_error("class " + std::to_string(c) + " (" + std::to_string(rows.size()) + " rows) cannot be split with test fraction " +
                       csv::format_fixed(spec.test_fraction, 3));
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t k = 0; k < n_test; ++k) is_test[rows[k]] = true;
  }
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < ds.size(); ++i) (is_test[i] ? test_rows : train_rows).push_back(i);
  return {ds.subset(train_rows), ds.subset(test_rows)};
}

struct MaskedDataset {
  Dataset data;            // labels kept for `labelled_per_class` rows per class
  std::vector<int> truth;  // original labels, same row order
};

inline MaskedDataset mask_labels(const Dataset& train, int labelled_per_class, std::uint64_t seed) {
  if (labelled_per_class < 1) throw std::invalid_argument("labelled_per_class must be >= 1");
  std::mt19937_64 rng(seed);
  MaskedDataset out{train, train.labels};
  std::fill(out.data.labels.begin(), out.data.labels.end(), kUnlabelled);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < train.size(); ++i)
      if (train.labels[i] == c) rows.push_back(i);
    if (rows.size() < static_cast<std::size_t>(labelled_per_class))
      throw data_error("class " + std::to_string(c) + " has " + std::to_string(rows.size()) + " rows, fewer than " +
                       std::to_string(labelled_per_class) + " to keep labelled");
    std::shuffle(rows.begin(), rows.end(), rng);
    for (int k = 0; k < labelled_per_class; ++k) out.data.labels[rows[k]] = c;
  }
  return out;
}

}  // namespace tda_ssl
