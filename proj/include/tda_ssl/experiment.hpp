#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "annotate.hpp"
#include "baselines.hpp"
#include "csv.hpp"
#include "data.hpp"
#include "error.hpp"

namespace tda_ssl {

// --- method names ------------------------------------------------------------
//
// <family>[_pca][_t<threshold>], family one of bottleneck, wasserstein,
// connectivity1, connectivity2, label_propagation, label_spreading,
// self_training. The suffixes only apply to the topological families.

enum class Family { Bottleneck, Wasserstein, Connectivity1, Connectivity2, LabelPropagation, LabelSpreading, SelfTraining };

struct MethodSpec {
  Family family = Family::Bottleneck;
  bool pca = false;
  double threshold = 0.0;

  bool topological() const { return family <= Family::Connectivity2; }
  bool homological() const { return family == Family::Bottleneck || family == Family::Wasserstein; }
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Bottleneck: return "bottleneck";
    case Family::Wasserstein: return "wasserstein";
    case Family::Connectivity1: return "connectivity1";
    case Family::Connectivity2: return "connectivity2";
    case Family::LabelPropagation: return "label_propagation";
    case Family::LabelSpreading: return "label_spreading";
    case Family::SelfTraining: return "self_training";
  }
  return "";
}

inline std::string to_string(const MethodSpec& m) {
  std::string s = family_name(m.family);
  if (m.pca) s += "_pca";
  if (m.threshold > 0.0) s += "_t" + csv::format_short(m.threshold);
  return s;
}

inline MethodSpec parse_method(const std::string& name) {
  static const Family families[] = {Family::LabelPropagation, Family::LabelSpreading, Family::SelfTraining, Family::Connectivity1,
                                    Family::Connectivity2,    Family::Bottleneck,     Family::Wasserstein};
  for (Family f : families) {
    const std::string base = family_name(f);
    if (name.rfind(base, 0) != 0) continue;
    MethodSpec m;
    m.family = f;
    std::string rest = name.substr(base.size());
    if (rest.rfind("_pca", 0) == 0) {
      m.pca = true;
      rest = rest.substr(4);
    }
    if (rest.rfind("_t", 0) == 0) {
      const auto t = csv::parse_double(rest.substr(2));
      if (!t || *t < 0.0) throw std::invalid_argument("bad threshold in method name '" + name + "'");
      m.threshold = *t;
      rest.clear();
    }
    if (!rest.empty()) throw std::invalid_argument("unknown method '" + name + "'");
    if (!m.topological() && (m.pca || m.threshold > 0.0))
      throw std::invalid_argument("method '" + name + "' does not take _pca/_t suffixes");
    if (!m.homological() && m.threshold > 0.0) throw std::invalid_argument("connectivity methods take no threshold: '" + name + "'");
    return m;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

/// "all": the synthetic-table line-up (thresholds 0 and 0.8); "all_thresholds":
/// the structured-table line-up (0.8, 0.6, 0.4, 0.2 and none).
inline std::vector<MethodSpec> expand_methods(const std::vector<std::string>& names) {
  std::vector<MethodSpec> out;
  auto add_lineup = [&](std::vector<double> thresholds) {
    for (Family f : {Family::LabelPropagation, Family::LabelSpreading, Family::SelfTraining}) out.push_back({f, false, 0.0});
    for (Family f : {Family::Bottleneck, Family::Wasserstein})
      for (bool pca : {false, true})
        for (double t : thresholds) out.push_back({f, pca, t});
    for (Family f : {Family::Connectivity1, Family::Connectivity2})
      for (bool pca : {false, true}) out.push_back({f, pca, 0.0});
  };
  for (const auto& n : names) {
    if (n == "all")
      add_lineup({0.0, 0.8});
    else if (n == "all_thresholds")
      add_lineup({0.0, 0.8, 0.6, 0.4, 0.2});
    else
      out.push_back(parse_method(n));
  }
  return out;
}

// --- reports -------------------------------------------------------------------

struct ReportRow {
  std::string method;
  std::optional<double> pct_labelled;
  std::optional<double> pct_correct_labelled;  // empty when nothing was labelled
  double accuracy_knn = 0.0;                   // percent

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<ReportRow> rows;
};

inline constexpr const char* kReportHeader = "method,pct_labelled,pct_correct_labelled,accuracy_knn";

inline std::string format_pct(double v) { return csv::format_fixed(v, 1); }

inline void write_report(std::ostream& os, const ExperimentReport& r) {
  for (const auto& [k, v] : r.metadata) os << "# " << k << ": " << v << '\n';
  os << kReportHeader << '\n';
  auto cell = [](const std::optional<double>& v) { return v ? format_pct(*v) : std::string(); };
  for (const auto& row : r.rows)
    os << row.method << ',' << cell(row.pct_labelled) << ',' << cell(row.pct_correct_labelled) << ',' << format_pct(row.accuracy_knn)
       << '\n';
}

inline void write_report(const ExperimentReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_report(out, r);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline ExperimentReport read_report(std::istream& in) {
  ExperimentReport r;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) throw data_error("report: malformed metadata line '" + line + "'");
      r.metadata.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    if (!header) {
      if (line != kReportHeader) throw data_error("report: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    const auto cells = csv::split(line);
    if (cells.size() != 4) throw data_error("report: row must have 4 cells: '" + line + "'");
    ReportRow row;
    row.method = cells[0];
    row.pct_labelled = csv::parse_double(cells[1]);
    row.pct_correct_labelled = csv::parse_double(cells[2]);
    const auto acc = csv::parse_double(cells[3]);
    if (!acc) throw data_error("report: missing accuracy in '" + line + "'");
    row.accuracy_knn = *acc;
    r.rows.push_back(row);
  }
  if (!header) throw data_error("report: missing header");
  return r;
}

// --- evaluation protocol ---------------------------------------------------------

struct EvaluationSettings {
  SplitSpec split;
  bool standardize = true;
  std::vector<int> homology_dims{0};
  double wasserstein_order = 1.0;
  bool halve_diagonal = false;
  int knn_k = 5;
  GraphKernel kernel = GraphKernel::knn(7);
  double spreading_alpha = 0.2;
  double self_training_confidence = 0.75;
  int self_training_rounds = 10;
  unsigned threads = 1;
};

struct AnnotationScore {
  std::optional<double> pct_labelled;
  std::optional<double> pct_correct_labelled;
};

/// Scores `annotated` against `truth` over the rows unlabelled in `masked`.
inline AnnotationScore score_annotation(std::span<const int> masked, std::span<const int> annotated, std::span<const int> truth) {
  if (masked.size() != annotated.size() || masked.size() != truth.size()) throw std::invalid_argument("label vectors differ in size");
  std::size_t candidates = 0, labelled = 0, correct = 0;
  for (std::size_t i = 0; i < masked.size(); ++i) {
    if (masked[i] != kUnlabelled) {
      if (annotated[i] != masked[i]) throw data_error("annotation changed an initially labelled row " + std::to_string(i));
      continue;
    }
    ++candidates;
    if (annotated[i] == kUnlabelled) continue;
    ++labelled;
    correct += annotated[i] == truth[i];
  }
  AnnotationScore s;
  if (candidates > 0) s.pct_labelled = 100.0 * static_cast<double>(labelled) / static_cast<double>(candidates);
  if (labelled > 0) s.pct_correct_labelled = 100.0 * static_cast<double>(correct) / static_cast<double>(labelled);
  return s;
}

/// Test accuracy (percent) of k-NN trained on the labelled rows of `train`.
inline double downstream_accuracy(const Dataset& train, const Dataset& test, int k) {
  PointSet pts;
  std::vector<int> ls;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train.labels[i] != kUnlabelled) {
      pts.push_back(train.points[i]);
      ls.push_back(train.labels[i]);
    }
  const int kk = std::min<int>(k, static_cast<int>(pts.size()));
  return 100.0 * *knn_classify(pts, ls, test.points, kk, test.labels).accuracy;
}

struct EvaluationArtifacts {
  Dataset train_truth;
  Dataset train_masked;
  Dataset test;
  std::vector<std::pair<std::string, Dataset>> annotated;  // per method
};

/// Labels for every training row after running `m`; kUnlabelled where the
/// method declined.
inline std::vector<int> run_method(const MethodSpec& m, const Dataset& masked, const EvaluationSettings& s) {
  const auto& labels = masked.labels;
  if (m.topological()) {
    AnnotationConfig cfg;
    cfg.method = m.family == Family::Connectivity1   ? Method::Connectivity1
                 : m.family == Family::Connectivity2 ? Method::Connectivity2
                                                     : Method::Homological;
    cfg.distance = m.family == Family::Wasserstein ? DiagramMetric::Wasserstein : DiagramMetric::Bottleneck;
    cfg.wasserstein_order = s.wasserstein_order;
    cfg.halve_diagonal = s.halve_diagonal;
    cfg.threshold = m.threshold;
    cfg.reduction = m.pca ? Reduction::Pca2 : Reduction::None;
    cfg.standardize = false;  // the protocol standardizes once, up front
    cfg.homology_dims = s.homology_dims;
    cfg.threads = s.threads;

    PointSet data, unlabelled;
    std::vector<int> target;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < masked.size(); ++i) {
      if (labels[i] == kUnlabelled) {
        unlabelled.push_back(masked.points[i]);
        rows.push_back(i);
      } else {
        data.push_back(masked.points[i]);
        target.push_back(labels[i]);
      }
    }
    const auto decisions = annotate(data, target, unlabelled, cfg);
    std::vector<int> out = labels;
    for (std::size_t k = 0; k < rows.size(); ++k)
      out[rows[k]] = decisions[k].label == Label::Class1 ? 0 : decisions[k].label == Label::Class2 ? 1 : kUnlabelled;
    return out;
  }
  const MetricCloud cloud(masked.points);
  switch (m.family) {
    case Family::LabelPropagation: return label_propagation(cloud, labels, s.kernel);
    case Family::LabelSpreading: return label_spreading(cloud, labels, s.kernel, s.spreading_alpha);
    default: return self_train(masked.points, labels, KnnClassifier(s.knn_k), s.self_training_confidence, s.self_training_rounds);
  }
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Split, mask, annotate with every method and score. The `base` row trains
/// the downstream classifier on the initially labelled rows only.
inline ExperimentReport run_evaluation(const Dataset& ds, const std::vector<MethodSpec>& methods, const EvaluationSettings& s,
                                       EvaluationArtifacts* artifacts = nullptr) {
  auto [train, test] = split_train_test(ds, s.split);
  if (s.standardize) {
    const auto z = Standardizer::fit(train.points);
    train.points = z.transform(train.points);
    test.points = z.transform(test.points);
  }
  const auto masked = mask_labels(train, s.split.labelled_per_class, s.split.seed + 1);

  ExperimentReport report;
  std::ostringstream cfg;
  cfg << "test_fraction=" << csv::format_short(s.split.test_fraction) << ";labelled_per_class=" << s.split.labelled_per_class
      << ";seed=" << s.split.seed << ";standardize=" << s.standardize << ";dims=";
  for (int d : s.homology_dims) cfg << d;
  cfg << ";order=" << csv::format_short(s.wasserstein_order) << ";halve_diagonal=" << s.halve_diagonal << ";knn_k=" << s.knn_k
      << ";kernel_k=" << s.kernel.k << ";alpha=" << csv::format_short(s.spreading_alpha)
      << ";confidence=" << csv::format_short(s.self_training_confidence);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.str())));

  report.metadata = {
      {"dataset", ds.name},
      {"provenance", ds.provenance},
      {"seed", std::to_string(s.split.seed)},
      {"config", cfg.str()},
      {"config_hash", hash},
      {"train_size", std::to_string(train.size())},
      {"test_size", std::to_string(test.size())},
      {"unlabelled", std::to_string(masked.data.count(kUnlabelled))},
      {"substitution", "downstream classifier is k-NN (k=" + std::to_string(s.knn_k) + ") instead of SVM / random forest"},
      {"substitution", "_pca methods reduce to 2-D with PCA instead of UMAP"},
  };

  report.rows.push_back({"base", std::nullopt, std::nullopt, downstream_accuracy(masked.data, test, s.knn_k)});
  if (artifacts) {
    artifacts->train_truth = train;
    artifacts->train_masked = masked.data;
    artifacts->test = test;
    artifacts->annotated.clear();
  }
  for (const auto& m : methods) {
    Dataset annotated = masked.data;
    annotated.labels = run_method(m, masked.data, s);
    const auto score = score_annotation(masked.data.labels, annotated.labels, masked.truth);
    report.rows.push_back({to_string(m), score.pct_labelled, score.pct_correct_labelled, downstream_accuracy(annotated, test, s.knn_k)});
    if (artifacts) artifacts->annotated.emplace_back(to_string(m), std::move(annotated));
  }
  return report;
}

/// Recomputes one report row from emitted CSVs.
inline ReportRow recompute_row(const std::string& method, const Dataset& masked, const Dataset& annotated, const Dataset& truth,
                               const Dataset& test, int knn_k) {
  if (masked.size() != annotated.size() || masked.size() != truth.size()) throw data_error("verify: training files differ in row count");
  const auto score = score_annotation(masked.labels, annotated.labels, truth.labels);
  return {method, score.pct_labelled, score.pct_correct_labelled, downstream_accuracy(annotated, test, knn_k)};
}

}  // namespace tda_ssl
