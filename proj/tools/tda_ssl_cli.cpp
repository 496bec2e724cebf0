// tda-ssl: command-line front end for the topological annotation toolkit.
//
// Exit codes: 0 success, 2 usage error, 3 data contract violation, 1 I/O or
// other runtime failure.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tda_ssl/tda_ssl.hpp"

namespace {

using namespace tda_ssl;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

unsigned threads_from_env() {
  const char* v = std::getenv("TDA_SSL_THREADS");
  if (!v || !*v) return 0;
  const auto n = csv::parse_double(v);
  if (!n || *n < 0 || *n != static_cast<unsigned>(*n)) throw std::invalid_argument("TDA_SSL_THREADS must be a non-negative integer");
  return static_cast<unsigned>(*n);
}

std::string sibling_evidence_path(const std::string& out) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + ".evidence.csv")).string();
}

std::vector<int> parse_dims(const std::string& s) {
  if (s == "0") return {0};
  if (s == "1") return {1};
  if (s == "01") return {0, 1};
  throw std::invalid_argument("--dims must be 0, 1 or 01");
}

Dataset builtin_or_file(const std::string& name, std::size_t n, std::uint64_t seed) {
  if (name == "blobs") return gen_blobs(n, seed);
  if (name == "circles") return gen_circles(n, seed);
  if (name == "moons") return gen_moons(n, seed);
  return load_csv(name);
}

Dataset numeric_labels(Dataset ds) {
  ds.class_names = {"0", "1"};
  return ds;
}

struct GenerateArgs {
  std::string dataset;
  std::size_t n = 300;
  std::uint64_t seed = 0;
  std::string out;
  double sigma = 1.0;
  double factor = 0.5;
  double noise = 0.05;
};

int run_generate(const GenerateArgs& a) {
  Dataset ds;
  if (a.dataset == "blobs")
    ds = gen_blobs(a.n, a.seed, {Point{-5.0, 0.0}, Point{5.0, 0.0}}, a.sigma);
  else if (a.dataset == "circles")
    ds = gen_circles(a.n, a.seed, a.factor, a.noise);
  else
    ds = gen_moons(a.n, a.seed, a.noise);
  save_csv(ds, a.out);
  return 0;
}

struct AnnotateArgs {
  std::string input;
  std::string out;
  std::string method = "homological";
  std::string distance = "bottleneck";
  double order = 1.0;
  double threshold = 0.0;
  std::string reduction = "none";
  std::string dims = "0";
  bool no_standardize = false;
  bool halve_diagonal = false;
  std::string marker = "?";
};

int run_annotate(const AnnotateArgs& a) {
  AnnotationConfig cfg;
  cfg.method = a.method == "homological" ? Method::Homological : a.method == "connectivity1" ? Method::Connectivity1 : Method::Connectivity2;
  cfg.distance = a.distance == "bottleneck" ? DiagramMetric::Bottleneck : DiagramMetric::Wasserstein;
  cfg.wasserstein_order = a.order;
  cfg.halve_diagonal = a.halve_diagonal;
  cfg.threshold = a.threshold;
  cfg.reduction = a.reduction == "pca2" ? Reduction::Pca2 : Reduction::None;
  cfg.standardize = !a.no_standardize;
  cfg.homology_dims = parse_dims(a.dims);
  cfg.threads = threads_from_env();

  CsvOptions opt;
  opt.unlabelled_marker = a.marker;
  Dataset ds = load_csv(a.input, opt);
  PointSet data, unlabelled;
  std::vector<int> target;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] == kUnlabelled) {
      unlabelled.push_back(ds.points[i]);
      rows.push_back(i);
    } else {
      data.push_back(ds.points[i]);
      target.push_back(ds.labels[i]);
    }
  }
  if (std::count(target.begin(), target.end(), 0) < 2 || std::count(target.begin(), target.end(), 1) < 2)
    throw data_error("each class needs at least 2 labelled rows");
  const auto decisions = annotate(data, target, unlabelled, cfg);

  const std::string evidence_path = sibling_evidence_path(a.out);
  std::ofstream ev(evidence_path, std::ios::binary);
  if (!ev) throw std::runtime_error("cannot write " + evidence_path);
  ev << "row,d1,d2,decision\n";
  std::size_t filled = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& d = decisions[k];
    ev << rows[k] << ',' << csv::format_exact(d.d1) << ',' << csv::format_exact(d.d2) << ',' << to_string(d.label) << '\n';
    if (d.label != Label::None) {
      ds.labels[rows[k]] = d.label == Label::Class1 ? 0 : 1;
      ++filled;
    }
  }
  save_csv(ds, a.out, a.marker);
  std::cerr << "annotated " << filled << " of " << rows.size() << " unlabelled rows\n";
  return 0;
}

struct EvaluateArgs {
  std::string dataset;
  std::size_t n = 300;
  std::uint64_t seed = 0;
  int labelled_per_class = 25;
  double test_fraction = 0.2;
  std::vector<std::string> methods{"all"};
  std::string out;
  std::string dims = "0";
  double order = 1.0;
  bool no_standardize = false;
  bool halve_diagonal = false;
  int knn_k = 5;
  std::string emit_dir;
};

int run_evaluate(const EvaluateArgs& a) {
  EvaluationSettings s;
  s.split.seed = a.seed;
  s.split.test_fraction = a.test_fraction;
  s.split.labelled_per_class = a.labelled_per_class;
  s.standardize = !a.no_standardize;
  s.homology_dims = parse_dims(a.dims);
  s.wasserstein_order = a.order;
  s.halve_diagonal = a.halve_diagonal;
  s.knn_k = a.knn_k;
  s.threads = threads_from_env();

  std::vector<std::string> names;
  for (const auto& m : a.methods)
    if (!m.empty() && m != "none") names.push_back(m);
  const auto methods = expand_methods(names);
  const Dataset ds = builtin_or_file(a.dataset, a.n, a.seed);

  EvaluationArtifacts artifacts;
  const auto report = run_evaluation(ds, methods, s, a.emit_dir.empty() ? nullptr : &artifacts);
  write_report(report, a.out);
  if (!a.emit_dir.empty()) {
    std::filesystem::create_directories(a.emit_dir);
    const std::filesystem::path dir(a.emit_dir);
    save_csv(numeric_labels(artifacts.train_truth), (dir / "train_truth.csv").string());
    save_csv(numeric_labels(artifacts.train_masked), (dir / "train_masked.csv").string());
    save_csv(numeric_labels(artifacts.test), (dir / "test.csv").string());
    for (const auto& [name, d] : artifacts.annotated) save_csv(numeric_labels(d), (dir / (name + ".annotated.csv")).string());
  }
  return 0;
}

struct DistanceArgs {
  std::string a, b;
  std::string metric = "bottleneck";
  double order = 1.0;
  std::optional<double> cap;
  bool halve_diagonal = false;
};

int run_distance(const DistanceArgs& args) {
  auto pa = read_diagram_csv(args.a);
  auto pb = read_diagram_csv(args.b);
  for (auto* d : {&pa, &pb}) {
    const bool has_inf = std::any_of(d->pairs.begin(), d->pairs.end(), [](const auto& p) { return p.essential(); });
    if (has_inf && !args.cap) throw data_error("diagram has essential classes (death = inf); pass --cap to replace them");
    if (args.cap) *d = cap_infinite(*d, *args.cap);
  }
  std::vector<int> dims;
  for (const auto* d : {&pa, &pb})
    for (const auto& p : d->pairs)
      if (std::find(dims.begin(), dims.end(), p.dim) == dims.end()) dims.push_back(p.dim);
  std::sort(dims.begin(), dims.end());
  DiagramDistanceConfig cfg;
  cfg.metric = args.metric == "bottleneck" ? DiagramMetric::Bottleneck : DiagramMetric::Wasserstein;
  cfg.order = args.order;
  cfg.halve_diagonal = args.halve_diagonal;
  std::printf("%.9f\n", diagram_distance(pa, pb, cfg, dims));
  return 0;
}

int run_radius(const std::string& input) {
  const auto ds = load_csv(input);
  if (ds.size() == 0) throw data_error(input + ": no points");
  std::printf("%.9f\n", connectivity_radius(MetricCloud(ds.points)));
  return 0;
}

struct DiagramArgs {
  std::string input;
  std::string out;
  std::string dims = "0";
};

int run_diagram(const DiagramArgs& a) {
  const auto ds = load_csv(a.input);
  if (ds.size() == 0) throw data_error(a.input + ": no points");
  const auto dims = parse_dims(a.dims);
  const int top = *std::max_element(dims.begin(), dims.end());
  const MetricCloud cloud(ds.points);
  auto diagram = persistence_diagram(build_vr_filtration(cloud, top + 1), top);
  std::erase_if(diagram.pairs, [&](const auto& p) { return std::find(dims.begin(), dims.end(), p.dim) == dims.end(); });
  if (a.out.empty() || a.out == "-") {
    write_diagram_csv(std::cout, diagram);
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    write_diagram_csv(out, diagram);
  }
  return 0;
}

struct VerifyArgs {
  std::string method;
  std::string masked, annotated, truth, test;
  int knn_k = 5;
};

int run_verify(const VerifyArgs& a) {
  const auto row = recompute_row(a.method, load_csv(a.masked), load_csv(a.annotated), load_csv(a.truth), load_csv(a.test), a.knn_k);
  ExperimentReport r;
  r.rows.push_back(row);
  write_report(std::cout, r);
  return 0;
}

// Appends the entries of a subcommand's `--config key=value` file as flags,
// skipping keys already given on the command line.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  const CLI::App* sub = nullptr;
  std::size_t config_at = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!sub) {
      for (const auto* s : app.get_subcommands([](const CLI::App*) { return true; }))
        if (s->get_name() == args[i]) sub = s;
      continue;
    }
    if (args[i] == "--config" && i + 1 < args.size()) config_at = i;
  }
  if (!sub || config_at == args.size()) return args;
  const std::string path = args[config_at + 1];
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = std::string(csv::trim(line));
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key(csv::trim(std::string_view(t).substr(0, eq))), value(csv::trim(std::string_view(t).substr(eq + 1)));
    const std::string flag = "--" + key;
    const auto* opt = sub->get_option_no_throw(flag);
    if (!opt || key == "config") throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (given(flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1") extra.push_back(flag);
      else if (value != "false" && value != "0") throw std::invalid_argument(path + ": " + key + " takes true or false");
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.erase(args.begin() + static_cast<std::ptrdiff_t>(config_at), args.begin() + static_cast<std::ptrdiff_t>(config_at) + 2);
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological semi-supervised annotation toolkit", "tda-ssl"};
  app.require_subcommand(1);

  std::string config_path;  // consumed by expand_config before parsing

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic two-class dataset as CSV");
  g->add_option("--config", config_path, "key=value file; flags on the command line win");
  g->add_option("--dataset", gen.dataset, "blobs, circles or moons")->required()->check(CLI::IsMember({"blobs", "circles", "moons"}));
  g->add_option("--n", gen.n, "number of points (even)")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out)->required();
  g->add_option("--sigma", gen.sigma, "blobs standard deviation")->capture_default_str();
  g->add_option("--factor", gen.factor, "circles inner/outer radius ratio")->capture_default_str();
  g->add_option("--noise", gen.noise, "circles/moons Gaussian noise")->capture_default_str();

  AnnotateArgs ann;
  auto* an = app.add_subcommand("annotate", "Fill unlabelled rows of a dataset CSV");
  an->add_option("--config", config_path, "key=value file; flags on the command line win");
  an->add_option("--input", ann.input)->required()->check(CLI::ExistingFile);
  an->add_option("--out", ann.out)->required();
  an->add_option("--method", ann.method)->check(CLI::IsMember({"homological", "connectivity1", "connectivity2"}))->capture_default_str();
  an->add_option("--distance", ann.distance)->check(CLI::IsMember({"bottleneck", "wasserstein"}))->capture_default_str();
  an->add_option("--order", ann.order, "Wasserstein order r >= 1")->capture_default_str();
  an->add_option("--threshold", ann.threshold, "confidence threshold, 0 disables")->capture_default_str();
  an->add_option("--reduction", ann.reduction)->check(CLI::IsMember({"none", "pca2"}))->capture_default_str();
  an->add_option("--dims", ann.dims, "homology dimensions: 0, 1 or 01")->capture_default_str();
  an->add_flag("--no-standardize", ann.no_standardize);
  an->add_flag("--halve-diagonal", ann.halve_diagonal, "halve the unmatched Wasserstein term");
  an->add_option("--unlabelled-marker", ann.marker)->capture_default_str();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Run the split/mask/annotate/score protocol");
  e->add_option("--config", config_path, "key=value file; flags on the command line win");
  e->add_option("--dataset", ev.dataset, "blobs, circles, moons or a CSV path")->required();
  e->add_option("--n", ev.n, "size of builtin datasets")->capture_default_str();
  e->add_option("--seed", ev.seed)->capture_default_str();
  e->add_option("--labelled-per-class", ev.labelled_per_class)->capture_default_str();
  e->add_option("--test-fraction", ev.test_fraction)->capture_default_str();
  e->add_option("--methods", ev.methods, "method names, 'all' or 'all_thresholds'")->delimiter(',')->capture_default_str();
  e->add_option("--out", ev.out)->required();
  e->add_option("--dims", ev.dims)->capture_default_str();
  e->add_option("--order", ev.order)->capture_default_str();
  e->add_flag("--no-standardize", ev.no_standardize);
  e->add_flag("--halve-diagonal", ev.halve_diagonal);
  e->add_option("--knn-k", ev.knn_k)->capture_default_str();
  e->add_option("--emit-dir", ev.emit_dir, "also write the split and every annotated training set here");

  DistanceArgs dist;
  auto* d = app.add_subcommand("distance", "Distance between two persistence diagram CSVs");
  d->add_option("--a", dist.a)->required()->check(CLI::ExistingFile);
  d->add_option("--b", dist.b)->required()->check(CLI::ExistingFile);
  d->add_option("--metric", dist.metric)->check(CLI::IsMember({"bottleneck", "wasserstein"}))->capture_default_str();
  d->add_option("--order", dist.order)->capture_default_str();
  d->add_option("--cap", dist.cap, "value replacing infinite deaths");
  d->add_flag("--halve-diagonal", dist.halve_diagonal);

  std::string radius_input;
  auto* r = app.add_subcommand("radius", "Minimum connectivity radius of a point CSV");
  r->add_option("--input", radius_input)->required()->check(CLI::ExistingFile);

  DiagramArgs dia;
  auto* dg = app.add_subcommand("diagram", "Persistence diagram of a point CSV");
  dg->add_option("--input", dia.input)->required()->check(CLI::ExistingFile);
  dg->add_option("--out", dia.out, "output path, '-' for stdout");
  dg->add_option("--dims", dia.dims)->capture_default_str();

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Recompute a report row from emitted CSVs");
  v->group("");
  v->add_option("--method", ver.method)->required();
  v->add_option("--masked", ver.masked)->required();
  v->add_option("--annotated", ver.annotated)->required();
  v->add_option("--truth", ver.truth)->required();
  v->add_option("--test", ver.test)->required();
  v->add_option("--knn-k", ver.knn_k);

  std::vector<std::string> args;
  try {
    args = expand_config(app, std::vector<std::string>(argv + 1, argv + argc));
  } catch (const std::exception& ex) {
    std::cerr << "tda-ssl: " << ex.what() << '\n';
    return kExitUsage;
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kExitUsage;
  }

  try {
    if (*g) return run_generate(gen);
    if (*an) return run_annotate(ann);
    if (*e) return run_evaluate(ev);
    if (*d) return run_distance(dist);
    if (*r) return run_radius(radius_input);
    if (*dg) return run_diagram(dia);
    if (*v) return run_verify(ver);
  } catch (const data_error& ex) {
    std::cerr << "tda-ssl: " << ex.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "tda-ssl: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    std::cerr << "tda-ssl: " << ex.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
