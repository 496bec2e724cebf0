#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "data.hpp"
#include "error.hpp"
#include "geometry.hpp"

namespace tda_ssl {

// --- k-nearest-neighbour classifier ----------------------------------------

namespace detail {

struct Neighbor {
  double distance;
  int label;
  std::size_t index;
  bool operator<(const Neighbor& o) const { return std::tie(distance, label, index) < std::tie(o.distance, o.label, o.index); }
};

// k nearest training points, ordered by (distance, label, index). Ordering on
// the label before the index keeps the result independent of training order.
inline std::vector<Neighbor> nearest(std::span<const Point> train, std::span<const int> labels, const Point& x, std::size_t k) {
  std::vector<Neighbor> all;
  all.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) all.push_back({euclidean(train[i], x), labels[i], i});
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return all;
}

inline std::array<double, 2> vote_fractions(const std::vector<Neighbor>& nn) {
  std::array<double, 2> votes{0.0, 0.0};
  for (const auto& n : nn) votes[n.label] += 1.0;
  for (auto& v : votes) v /= static_cast<double>(nn.size());
  return votes;
}

// Majority vote; an even split goes to the single nearest neighbour.
inline int vote(const std::vector<Neighbor>& nn) {
  const auto f = vote_fractions(nn);
  if (f[0] > f[1]) return 0;
  if (f[1] > f[0]) return 1;
  return nn.front().label;
}

inline void check_training_set(std::span<const Point> train, std::span<const int> labels) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  if (train.size() != labels.size()) throw std::invalid_argument("training points and labels differ in size");
  for (int l : labels)
    if (l != 0 && l != 1) throw std::invalid_argument("training labels must be 0 or 1");
}

}  // namespace detail

struct KnnResult {
  std::vector<int> labels;
  std::optional<double> accuracy;  // fraction correct, when ground truth is given
};

inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and truth sizes differ");
  if (truth.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += predicted[i] == truth[i];
  return static_cast<double>(ok) / static_cast<double>(truth.size());
}

inline KnnResult knn_classify(std::span<const Point> train, std::span<const int> train_labels, std::span<const Point> test, int k,
                              std::span<const int> truth = {}) {
  detail::check_training_set(train, train_labels);
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) throw std::invalid_argument("k must be in [1, |train|]");
  KnnResult r;
  r.labels.reserve(test.size());
  for (const auto& x : test) r.labels.push_back(detail::vote(detail::nearest(train, train_labels, x, static_cast<std::size_t>(k))));
  if (!truth.empty()) r.accuracy = accuracy(r.labels, truth);
  return r;
}

/// Base learner for self-training: scores are neighbour vote fractions.
class KnnClassifier {
 public:
  explicit KnnClassifier(int k = 5) : k_(k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
  }

  void fit(std::span<const Point> points, std::span<const int> labels) {
    detail::check_training_set(points, labels);
    points_.assign(points.begin(), points.end());
    labels_.assign(labels.begin(), labels.end());
  }

  std::array<double, 2> predict_proba(const Point& x) const { return detail::vote_fractions(neighbors(x)); }
  int predict(const Point& x) const { return detail::vote(neighbors(x)); }

 private:
  std::vector<detail::Neighbor> neighbors(const Point& x) const {
    return detail::nearest(points_, labels_, x, static_cast<std::size_t>(k_));
  }

  int k_;
  PointSet points_;
  std::vector<int> labels_;
};

template <typename C>
concept ProbabilisticClassifier = requires(C c, const C cc, std::span<const Point> pts, std::span<const int> ls, const Point& x) {
  c.fit(pts, ls);
  { cc.predict_proba(x) } -> std::convertible_to<std::array<double, 2>>;
  { cc.predict(x) } -> std::convertible_to<int>;
};

/// Iteratively adopts pseudo-labels whose top class score reaches
/// `confidence`. Points never adopted are labelled by the final fit.
template <ProbabilisticClassifier Classifier>
std::vector<int> self_train(std::span<const Point> points, std::span<const int> labels, Classifier base, double confidence = 0.75,
                            int rounds = 10) {
  if (points.size() != labels.size()) throw std::invalid_argument("points and labels differ in size");
  std::vector<int> current(labels.begin(), labels.end());
  auto fit_current = [&] {
    PointSet pts;
    std::vector<int> ls;
    for (std::size_t i = 0; i < current.size(); ++i)
      if (current[i] != kUnlabelled) {
        pts.push_back(points[i]);
        ls.push_back(current[i]);
      }
    if (std::count(ls.begin(), ls.end(), 0) == 0 || std::count(ls.begin(), ls.end(), 1) == 0)
      throw data_error("self-training needs labelled points of both classes");
    base.fit(pts, ls);
  };

  for (int round = 0; round < rounds; ++round) {
    fit_current();
    std::vector<std::pair<std::size_t, int>> adopted;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (current[i] != kUnlabelled) continue;
      const auto proba = base.predict_proba(points[i]);
      if (std::max(proba[0], proba[1]) >= confidence) adopted.emplace_back(i, base.predict(points[i]));
    }
    if (adopted.empty()) break;
    for (const auto& [i, l] : adopted) current[i] = l;
  }
  fit_current();
  for (std::size_t i = 0; i < current.size(); ++i)
    if (current[i] == kUnlabelled) current[i] = base.predict(points[i]);
  return current;
}

// --- graph diffusion baselines ---------------------------------------------

struct GraphKernel {
  enum class Kind { Knn, Rbf };
  Kind kind = Kind::Knn;
  int k = 7;
  double gamma = 20.0;

  static GraphKernel knn(int k) { return {Kind::Knn, k, 0.0}; }
  static GraphKernel rbf(double gamma) { return {Kind::Rbf, 0, gamma}; }
};

/// Symmetric non-negative affinity with zero diagonal. k-NN graphs are
/// symmetrized by max.
inline Eigen::MatrixXd affinity_matrix(const MetricCloud& cloud, const GraphKernel& kernel) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  if (kernel.kind == GraphKernel::Kind::Knn) {
    if (kernel.k < 1) throw std::invalid_argument("knn kernel needs k >= 1");
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(kernel.k), cloud.size() - 1);
    std::vector<std::size_t> order(cloud.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      order.resize(cloud.size());
      std::iota(order.begin(), order.end(), 0);
      std::erase(order, static_cast<std::size_t>(i));
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = cloud.dist(i, a), db = cloud.dist(i, b);
        return da != db ? da < db : a < b;
      });
      for (std::size_t t = 0; t < k; ++t) {
        const auto j = static_cast<Eigen::Index>(order[t]);
        w(i, j) = w(j, i) = 1.0;
      }
    }
  } else {
    if (!(kernel.gamma > 0.0)) throw std::invalid_argument("rbf kernel needs gamma > 0");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double d = cloud.dist(i, j);
        w(i, j) = w(j, i) = std::exp(-kernel.gamma * d * d);
      }
  }
  return w;
}

namespace detail {

inline void check_affinity(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols()) throw std::invalid_argument("affinity matrix must be square");
  if (!w.allFinite()) throw std::invalid_argument("affinity matrix has non-finite entries");
  if ((w.array() < 0.0).any()) throw std::invalid_argument("affinity matrix has negative entries");
}

inline Eigen::MatrixXd one_hot(std::span<const int> labels) {
  bool any = false;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnlabelled) continue;
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0, 1 or unlabelled");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    any = true;
  }
  if (!any) throw data_error("no labelled points");
  return y;
}

}  // namespace detail

/// Row-normalised transition matrix D^-1 W; rows with zero degree stay zero.
inline Eigen::MatrixXd transition_matrix(const Eigen::MatrixXd& w) {
  detail::check_affinity(w);
  Eigen::MatrixXd p = w;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double deg = p.row(i).sum();
    if (deg > 0.0) p.row(i) /= deg;
  }
  return p;
}

/// argmax per row; equal scores go to the lower class index.
inline std::vector<int> argmax_labels(const Eigen::MatrixXd& f) {
  std::vector<int> out(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index i = 0; i < f.rows(); ++i) out[static_cast<std::size_t>(i)] = f(i, 1) > f(i, 0) ? 1 : 0;
  return out;
}

/// Clamped diffusion F <- P F, labelled rows reset to their one-hot label.
inline Eigen::MatrixXd label_propagation_scores(const Eigen::MatrixXd& w, std::span<const int> labels, int max_iter = 1000,
                                                double tol = 1e-6) {
  if (static_cast<std::size_t>(w.rows()) != labels.size()) throw std::invalid_argument("affinity and labels differ in size");
  const Eigen::MatrixXd p = transition_matrix(w);
  const Eigen::MatrixXd y = detail::one_hot(labels);
  Eigen::MatrixXd f = y;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd next = p * f;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] != kUnlabelled) next.row(static_cast<Eigen::Index>(i)) = y.row(static_cast<Eigen::Index>(i));
    const double change = (next - f).cwiseAbs().maxCoeff();
    f.swap(next);
    if (change < tol) break;
  }
  return f;
}

inline std::vector<int> label_propagation(const MetricCloud& cloud, std::span<const int> labels, const GraphKernel& kernel = {},
                                          int max_iter = 1000, double tol = 1e-6) {
  auto out = argmax_labels(label_propagation_scores(affinity_matrix(cloud, kernel), labels, max_iter, tol));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kUnlabelled) out[i] = labels[i];
  return out;
}

/// F <- alpha S F + (1 - alpha) Y with S = D^-1/2 W D^-1/2.
inline Eigen::MatrixXd label_spreading_scores(const Eigen::MatrixXd& w, std::span<const int> labels, double alpha = 0.2,
                                              int max_iter = 1000, double tol = 1e-6) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  if (static_cast<std::size_t>(w.rows()) != labels.size()) throw std::invalid_argument("affinity and labels differ in size");
  detail::check_affinity(w);
  const Eigen::VectorXd deg = w.rowwise().sum();
  const Eigen::VectorXd inv_sqrt = deg.unaryExpr([](double d) { return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0; });
  const Eigen::MatrixXd s = inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal();
  const Eigen::MatrixXd y = detail::one_hot(labels);
  Eigen::MatrixXd f = y;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd next = alpha * (s * f) + (1.0 - alpha) * y;
    const double change = (next - f).cwiseAbs().maxCoeff();
    f.swap(next);
    if (change < tol) break;
  }
  return f;
}

inline std::vector<int> label_spreading(const MetricCloud& cloud, std::span<const int> labels, const GraphKernel& kernel = {},
                                        double alpha = 0.2, int max_iter = 1000, double tol = 1e-6) {
  return argmax_labels(label_spreading_scores(affinity_matrix(cloud, kernel), labels, alpha, max_iter, tol));
}

}  // namespace tda_ssl
