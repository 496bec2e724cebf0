#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "complex.hpp"
#include "connectivity.hpp"
#include "distances.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "parallel.hpp"

namespace tda_ssl {

enum class Method { Homological, Connectivity1, Connectivity2 };

enum class Label { Class1, Class2, None };

struct AnnotationConfig {
  Method method = Method::Homological;
  DiagramMetric distance = DiagramMetric::Bottleneck;
  double wasserstein_order = 1.0;
  bool halve_diagonal = false;
  double threshold = 0.0;  // 0 disables the threshold check
  Reduction reduction = Reduction::None;
  bool standardize = true;
  std::vector<int> homology_dims{0};
  double tie_tolerance = 1e-9;
  unsigned threads = 1;  // 0 = one per core

  void validate() const {
    if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
    if (!(wasserstein_order >= 1.0)) throw std::invalid_argument("wasserstein order must be >= 1");
    if (!(tie_tolerance >= 0.0)) throw std::invalid_argument("tie tolerance must be >= 0");
    if (homology_dims.empty()) throw std::invalid_argument("at least one homology dimension is required");
    for (int d : homology_dims)
      if (d != 0 && d != 1) throw std::invalid_argument("homology dimensions must be 0 or 1");
  }

  int max_homology_dim() const { return *std::max_element(homology_dims.begin(), homology_dims.end()); }
};

/// Outcome for one unlabelled point. `d1`/`d2` are the diagram distances
/// (homological) or radius variations (connectivity) against each class.
struct AnnotationDecision {
  Label label = Label::None;
  double d1 = 0.0;
  double d2 = 0.0;

  friend bool operator==(const AnnotationDecision&, const AnnotationDecision&) = default;
};

inline Label argmin_label(double d1, double d2, double tie_tolerance) {
  if (d1 < d2 - tie_tolerance) return Label::Class1;
  if (d2 < d1 - tie_tolerance) return Label::Class2;
  return Label::None;
}

// Reject when both distances exceed a positive threshold, otherwise argmin.
inline Label decide_homological(double d1, double d2, double threshold, double tie_tolerance = 1e-9) {
  if (threshold > 0.0 && d1 > threshold && d2 > threshold) return Label::None;
  return argmin_label(d1, d2, tie_tolerance);
}

// variant 1: only a class whose radius did not move (while the other did) is chosen.
// variant 2: smallest variation wins; both zero or a tie leaves the point unlabelled.
inline Label decide_connectivity(double d1, double d2, int variant, double tie_tolerance = 1e-9) {
  const bool zero1 = d1 <= tie_tolerance, zero2 = d2 <= tie_tolerance;
  if (zero1 && zero2) return Label::None;
  if (variant == 1) {
    if (zero1) return Label::Class1;
    if (zero2) return Label::Class2;
    return Label::None;
  }
  if (variant != 2) throw std::invalid_argument("connectivity variant must be 1 or 2");
  return argmin_label(d1, d2, tie_tolerance);
}

namespace detail {

inline void require_class_size(const MetricCloud& x, const char* name) {
  if (x.size() < 2) throw data_error(std::string("class ") + name + " needs at least 2 labelled points, got " + std::to_string(x.size()));
}

inline int connectivity_variant(Method m) {
  if (m == Method::Connectivity1) return 1;
  if (m == Method::Connectivity2) return 2;
  throw std::invalid_argument("not a connectivity method");
}

}  // namespace detail

/// Precomputes the per-class diagrams once and compares every candidate
/// point against them.
class HomologicalAnnotator {
 public:
  HomologicalAnnotator(MetricCloud x1, MetricCloud x2, AnnotationConfig cfg)
      : x1_(std::move(x1)), x2_(std::move(x2)), cfg_(std::move(cfg)) {
    cfg_.validate();
    detail::require_class_size(x1_, "1");
    detail::require_class_size(x2_, "2");
    base1_ = capped_diagram(x1_, cfg_.max_homology_dim());
    base2_ = capped_diagram(x2_, cfg_.max_homology_dim());
  }

  AnnotationDecision operator()(const Point& x) const {
    AnnotationDecision d;
    d.d1 = distance_after_insert(x1_, base1_, x);
    d.d2 = distance_after_insert(x2_, base2_, x);
    d.label = decide_homological(d.d1, d.d2, cfg_.threshold, cfg_.tie_tolerance);
    return d;
  }

 private:
  double distance_after_insert(const MetricCloud& base, const PersistenceDiagram& base_diagram, const Point& x) const {
    const auto grown = capped_diagram(base.with_point(x), cfg_.max_homology_dim());
    const DiagramDistanceConfig dc{cfg_.distance, cfg_.wasserstein_order, cfg_.halve_diagonal};
    return diagram_distance(base_diagram, grown, dc, cfg_.homology_dims);
  }

  MetricCloud x1_, x2_;
  AnnotationConfig cfg_;
  PersistenceDiagram base1_, base2_;
};

class ConnectivityAnnotator {
 public:
  ConnectivityAnnotator(MetricCloud x1, MetricCloud x2, int variant, double tie_tolerance = 1e-9)
      : x1_(std::move(x1)), x2_(std::move(x2)), variant_(variant), tie_tolerance_(tie_tolerance) {
    if (variant != 1 && variant != 2) throw std::invalid_argument("connectivity variant must be 1 or 2");
    detail::require_class_size(x1_, "1");
    detail::require_class_size(x2_, "2");
    r1_ = connectivity_radius(x1_);
    r2_ = connectivity_radius(x2_);
  }

  AnnotationDecision operator()(const Point& x) const {
    AnnotationDecision d;
    d.d1 = std::abs(r1_ - connectivity_radius(x1_.with_point(x)));
    d.d2 = std::abs(r2_ - connectivity_radius(x2_.with_point(x)));
    d.label = decide_connectivity(d.d1, d.d2, variant_, tie_tolerance_);
    return d;
  }

 private:
  MetricCloud x1_, x2_;
  int variant_;
  double tie_tolerance_;
  double r1_ = 0.0, r2_ = 0.0;
};

namespace detail {

template <typename Annotator>
std::vector<AnnotationDecision> annotate_all(const Annotator& annotator, std::span<const Point> unlabelled, unsigned threads) {
  std::vector<AnnotationDecision> out(unlabelled.size());
  parallel_for(unlabelled.size(), threads, [&](std::size_t i) { out[i] = annotator(unlabelled[i]); });
  return out;
}

}  // namespace detail

inline AnnotationDecision homological_annotate_point(const MetricCloud& x1, const MetricCloud& x2, const Point& x,
                                                     const AnnotationConfig& cfg) {
  return HomologicalAnnotator(x1, x2, cfg)(x);
}

/// Every point is judged against the original class sets; decisions never
/// feed back into X1/X2.
inline std::vector<AnnotationDecision> homological_annotate_batch(const MetricCloud& x1, const MetricCloud& x2,
                                                                  std::span<const Point> unlabelled, const AnnotationConfig& cfg) {
  return detail::annotate_all(HomologicalAnnotator(x1, x2, cfg), unlabelled, cfg.threads);
}

inline AnnotationDecision connectivity_annotate_point(const MetricCloud& x1, const MetricCloud& x2, const Point& x, int variant,
                                                      const AnnotationConfig& cfg) {
  return ConnectivityAnnotator(x1, x2, variant, cfg.tie_tolerance)(x);
}

inline std::vector<AnnotationDecision> connectivity_annotate_batch(const MetricCloud& x1, const MetricCloud& x2,
                                                                   std::span<const Point> unlabelled, int variant,
                                                                   const AnnotationConfig& cfg) {
  return detail::annotate_all(ConnectivityAnnotator(x1, x2, variant, cfg.tie_tolerance), unlabelled, cfg.threads);
}

/// Library entry point: labelled `data` with 0/1 `target`, plus the points
/// to annotate. Standardization and the optional 2-D reduction are fitted on
/// labelled and unlabelled points together before anything else.
inline std::vector<AnnotationDecision> annotate(std::span<const Point> data, std::span<const int> target,
                                                std::span<const Point> unlabelled, const AnnotationConfig& cfg) {
  cfg.validate();
  if (data.size() != target.size()) throw std::invalid_argument("data and target sizes differ");
  if (unlabelled.empty()) return {};

  PointSet all(data.begin(), data.end());
  all.insert(all.end(), unlabelled.begin(), unlabelled.end());
  detail::common_dimension(all);
  if (cfg.standardize) all = standardize(all);
  if (cfg.reduction == Reduction::Pca2) all = pca_reduce(all, 2);

  PointSet c1, c2;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (target[i] == 0)
      c1.push_back(all[i]);
    else if (target[i] == 1)
      c2.push_back(all[i]);
    else
      throw data_error("target labels must be 0 or 1, got " + std::to_string(target[i]));
  }
  if (c1.size() < 2 || c2.size() < 2)
    throw data_error("each class needs at least 2 labelled points (class 0: " + std::to_string(c1.size()) +
                     ", class 1: " + std::to_string(c2.size()) + ")");
  const std::span<const Point> queries(all.data() + data.size(), unlabelled.size());
  const MetricCloud x1(std::move(c1)), x2(std::move(c2));
  if (cfg.method == Method::Homological) return homological_annotate_batch(x1, x2, queries, cfg);
  return connectivity_annotate_batch(x1, x2, queries, detail::connectivity_variant(cfg.method), cfg);
}

inline std::vector<AnnotationDecision> homological_annotation(std::span<const Point> data, std::span<const int> target,
                                                              std::span<const Point> unlabelled, AnnotationConfig cfg) {
  cfg.method = Method::Homological;
  return annotate(data, target, unlabelled, cfg);
}

/// `type` selects the labelling rule: 1 or 2.
inline std::vector<AnnotationDecision> connectivity_annotation(std::span<const Point> data, std::span<const int> target,
                                                               std::span<const Point> unlabelled, int type, AnnotationConfig cfg) {
  if (type != 1 && type != 2) throw std::invalid_argument("connectivity type must be 1 or 2");
  cfg.method = type == 1 ? Method::Connectivity1 : Method::Connectivity2;
  return annotate(data, target, unlabelled, cfg);
}

inline const char* to_string(Label l) {
  switch (l) {
    case Label::Class1: return "class1";
    case Label::Class2: return "class2";
    case Label::None: return "none";
  }
  return "none";
}

}  // namespace tda_ssl
