#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tda_ssl {

using Point = std::vector<double>;
using PointSet = std::vector<Point>;

namespace detail {

inline std::size_t common_dimension(std::span<const Point> points) {
  if (points.empty()) throw std::invalid_argument("empty point set");
  const std::size_t f = points.front().size();
  if (f == 0) throw std::invalid_argument("points must have dimension >= 1");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].size() != f) {
      throw std::invalid_argument("dimension mismatch at point " + std::to_string(i) + ": expected " +
                                  std::to_string(f) + ", got " + std::to_string(points[i].size()));
    }
  }
  return f;
}

inline double euclidean(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace detail

// Dense symmetric n x n matrix of pairwise distances, row-major.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    values_[i * n_ + j] = v;
    values_[j * n_ + i] = v;
  }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

inline DistanceMatrix distance_matrix(std::span<const Point> points) {
  detail::common_dimension(points);
  const std::size_t n = points.size();
  DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, detail::euclidean(points[i], points[j]));
  return d;
}

/// A finite point set together with its Euclidean distance matrix.
class MetricCloud {
 public:
  explicit MetricCloud(PointSet points) : points_(std::move(points)) {
    dim_ = detail::common_dimension(points_);
    dist_ = distance_matrix(points_);
  }

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return dim_; }
  const PointSet& points() const { return points_; }
  const DistanceMatrix& distances() const { return dist_; }
  double dist(std::size_t i, std::size_t j) const { return dist_(i, j); }

  /// Cloud with `x` appended; reuses the existing distances and only computes
  /// the new row.
  MetricCloud with_point(const Point& x) const {
    if (x.size() != dim_) {
      throw std::invalid_argument("dimension mismatch: cloud has dimension " + std::to_string(dim_) +
                                  ", point has " + std::to_string(x.size()));
    }
    MetricCloud out;
    out.dim_ = dim_;
    out.points_ = points_;
    out.points_.push_back(x);
    const std::size_t n = size();
    out.dist_ = DistanceMatrix(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) out.dist_.set(i, j, dist_(i, j));
      out.dist_.set(i, n, detail::euclidean(points_[i], x));
    }
    return out;
  }

 private:
  MetricCloud() = default;

  PointSet points_;
  std::size_t dim_ = 0;
  DistanceMatrix dist_;
};

/// min over p of max over q of dist(p, q).
inline double enclosing_radius(const MetricCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n <= 1) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = cloud.distances().row(i);
    best = std::min(best, *std::max_element(row.begin(), row.end()));
  }
  return best;
}

// z-score with the population (1/n) convention. Constant columns map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 0 marks a constant column

  static Standardizer fit(std::span<const Point> points) {
    const std::size_t f = detail::common_dimension(points);
    if (points.size() < 2) throw std::invalid_argument("standardize needs at least 2 points");
    const double n = static_cast<double>(points.size());
    Standardizer s;
    s.mean.assign(f, 0.0);
    s.scale.assign(f, 0.0);
    for (const auto& p : points)
      for (std::size_t k = 0; k < f; ++k) s.mean[k] += p[k];
    for (auto& m : s.mean) m /= n;
    for (const auto& p : points)
      for (std::size_t k = 0; k < f; ++k) s.scale[k] += (p[k] - s.mean[k]) * (p[k] - s.mean[k]);
    for (std::size_t k = 0; k < f; ++k) {
      const double sd = std::sqrt(s.scale[k] / n);
      // relative cutoff: rounding noise on a constant column is not a signal
      s.scale[k] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[k])) ? sd : 0.0;
    }
    return s;
  }

  Point transform(const Point& p) const {
    if (p.size() != mean.size()) throw std::invalid_argument("dimension mismatch in standardizer");
    Point out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = scale[k] == 0.0 ? 0.0 : (p[k] - mean[k]) / scale[k];
    return out;
  }

  PointSet transform(std::span<const Point> points) const {
    PointSet out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(transform(p));
    return out;
  }
};

inline PointSet standardize(std::span<const Point> points) {
  return Standardizer::fit(points).transform(points);
}

enum class Reduction { None, Pca2 };

/// Linear projection onto the leading eigenvectors of the sample covariance.
struct PcaModel {
  std::vector<double> mean;
  std::vector<Point> components;   // orthonormal, by decreasing variance
  std::vector<double> eigenvalues;  // full spectrum, descending

  static PcaModel fit(std::span<const Point> points, std::size_t out_dim = 2) {
    const std::size_t f = detail::common_dimension(points);
    const std::size_t n = points.size();
    if (f < out_dim) throw std::invalid_argument("pca: input dimension smaller than output dimension");
    if (n < 3) throw std::invalid_argument("pca: needs at least 3 points");

    Eigen::MatrixXd x(n, f);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < f; ++k) x(i, k) = points[i][k];
    const Eigen::RowVectorXd mu = x.colwise().mean();
    x.rowwise() -= mu;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    if (cov.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("pca: degenerate covariance (all points identical)");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    PcaModel m;
    m.mean.assign(mu.data(), mu.data() + f);
    // Eigen returns ascending order
    for (std::size_t c = 0; c < f; ++c) m.eigenvalues.push_back(std::max(0.0, eig.eigenvalues()(f - 1 - c)));
    for (std::size_t c = 0; c < out_dim; ++c) {
      Eigen::VectorXd v = eig.eigenvectors().col(f - 1 - c);
      // sign convention: largest-magnitude coordinate positive
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;
      m.components.emplace_back(v.data(), v.data() + f);
    }
    return m;
  }

  Point transform(const Point& p) const {
    if (p.size() != mean.size()) throw std::invalid_argument("dimension mismatch in pca transform");
    Point out(components.size(), 0.0);
    for (std::size_t c = 0; c < components.size(); ++c)
      for (std::size_t k = 0; k < p.size(); ++k) out[c] += (p[k] - mean[k]) * components[c][k];
    return out;
  }

  PointSet transform(std::span<const Point> points) const {
    PointSet out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(transform(p));
    return out;
  }
};

inline PointSet pca_reduce(std::span<const Point> points, std::size_t out_dim = 2) {
  return PcaModel::fit(points, out_dim).transform(points);
}

}  // namespace tda_ssl
