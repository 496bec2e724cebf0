#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tda_ssl/data.hpp"
#include "tda_ssl/experiment.hpp"

namespace fs = std::filesystem;
using namespace tda_ssl;

namespace {

struct Run {
  int code;
  std::string out;
};

// Runs the CLI with `args`; stdout captured, stderr discarded.
Run cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + TDA_SSL_CLI + std::string(" ") + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("tda_ssl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Blobs with 25 labelled rows per class and the rest marked "?".
  std::string blobs_fixture() {
    auto ds = gen_blobs(300, 1);
    int kept[2] = {0, 0};
    for (auto& l : ds.labels) {
      if (kept[l] < 25) {
        ++kept[l];
      } else {
        l = kUnlabelled;
      }
    }
    const auto p = path("fixture.csv");
    save_csv(ds, p);
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateWritesHeaderPlusRows) {
  EXPECT_EQ(cli("generate --dataset moons --n 300 --seed 1 --out " + path("m.csv")).code, 0);
  const auto text = slurp(path("m.csv"));
  EXPECT_EQ(line_count(text), 301u);
  EXPECT_EQ(text.substr(0, text.find('\n')), "f0,f1,label");
}

TEST_F(Cli, GenerateIsDeterministic) {
  ASSERT_EQ(cli("generate --dataset circles --n 100 --seed 4 --out " + path("a.csv")).code, 0);
  ASSERT_EQ(cli("generate --dataset circles --n 100 --seed 4 --out " + path("b.csv")).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("generate --dataset spirals --n 10 --out " + path("x.csv")).code, 2);
  EXPECT_EQ(cli("generate --dataset moons --n 11 --out " + path("x.csv")).code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("evaluate --dataset blobs --methods svm --out " + path("r.csv")).code, 2);
  EXPECT_EQ(cli("evaluate --dataset blobs --dims 2 --out " + path("r.csv")).code, 2);
}

TEST_F(Cli, DataErrorsExitThree) {
  {
    std::ofstream f(path("few.csv"));
    f << "a,b,label\n0,0,0\n1,1,1\n2,2,1\n3,3,?\n";
  }
  EXPECT_EQ(cli("annotate --input " + path("few.csv") + " --out " + path("o.csv")).code, 3);
  {
    std::ofstream f(path("bad.csv"));
    f << "a,label\n0,0\nx,1\n";
  }
  EXPECT_EQ(cli("radius --input " + path("bad.csv")).code, 3);
  EXPECT_EQ(cli("evaluate --dataset " + path("missing.csv") + " --out " + path("r.csv")).code, 3);
}

TEST_F(Cli, AnnotateFillsEveryRowWithoutThreshold) {
  const auto in = blobs_fixture();
  ASSERT_EQ(cli("annotate --input " + in + " --method homological --distance bottleneck --out " + path("o.csv")).code, 0);
  const auto out = load_csv(path("o.csv"));
  EXPECT_EQ(out.count(kUnlabelled), 0u);
  EXPECT_EQ(out.points, load_csv(in).points);
  const auto evidence = slurp(path("o.evidence.csv"));
  EXPECT_EQ(evidence.substr(0, evidence.find('\n')), "row,d1,d2,decision");
  EXPECT_EQ(line_count(evidence), 251u);
  // blobs truth: rows < 150 are class 0
  const auto truth = gen_blobs(300, 1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < out.size(); ++i) correct += out.labels[i] == truth.labels[i];
  EXPECT_GE(correct, 297u);
}

TEST_F(Cli, AnnotateThresholdsAreNested) {
  const auto in = blobs_fixture();
  std::vector<Dataset> outs;
  for (const std::string t : {"0.4", "0.8"}) {
    const auto o = path("t" + t + ".csv");
    ASSERT_EQ(cli("annotate --input " + in + " --distance wasserstein --threshold " + t + " --out " + o).code, 0);
    outs.push_back(load_csv(o));
  }
  for (std::size_t i = 0; i < outs[0].size(); ++i)
    if (outs[0].labels[i] != kUnlabelled) {
      EXPECT_EQ(outs[1].labels[i], outs[0].labels[i]);
    }
  EXPECT_GE(outs[0].count(kUnlabelled), outs[1].count(kUnlabelled));
}

TEST_F(Cli, ConnectivityOneLeavesRowsWhenBothRadiiMove) {
  // two sparse labelled pairs; every query sits far from both
  {
    std::ofstream f(path("far.csv"));
    f << "a,b,label\n0,0,0\n0,1,0\n10,0,1\n10,1,1\n5,20,?\n5,-20,?\n";
  }
  ASSERT_EQ(cli("annotate --input " + path("far.csv") + " --method connectivity1 --no-standardize --out " + path("o.csv")).code, 0);
  EXPECT_EQ(load_csv(path("o.csv")).count(kUnlabelled), 2u);
}

TEST_F(Cli, EvaluateEmptyMethodsGivesBaseRowOnly) {
  ASSERT_EQ(cli("evaluate --dataset moons --methods none --out " + path("r.csv")).code, 0);
  std::ifstream in(path("r.csv"));
  const auto r = read_report(in);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].method, "base");
}

TEST_F(Cli, EvaluateIsByteIdenticalAcrossRunsAndThreads) {
  const std::string args = "evaluate --dataset circles --seed 3 --methods bottleneck,connectivity1,label_propagation --out ";
  ASSERT_EQ(cli(args + path("a.csv"), "TDA_SSL_THREADS=1").code, 0);
  ASSERT_EQ(cli(args + path("b.csv"), "TDA_SSL_THREADS=1").code, 0);
  ASSERT_EQ(cli(args + path("c.csv"), "TDA_SSL_THREADS=0").code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("c.csv")));
  EXPECT_EQ(cli(args + path("d.csv"), "TDA_SSL_THREADS=abc").code, 2);
}

TEST_F(Cli, VerifyRecomputesEveryRow) {
  const auto emit = path("emit");
  ASSERT_EQ(cli("evaluate --dataset moons --seed 2 --methods all --out " + path("r.csv") + " --emit-dir " + emit).code, 0);
  std::ifstream in(path("r.csv"));
  const auto report = read_report(in);
  ASSERT_GT(report.rows.size(), 10u);
  std::ostringstream expected_rows;
  for (const auto& row : report.rows) {
    if (row.method == "base") continue;
    const auto r = cli("verify --method " + row.method + " --masked " + emit + "/train_masked.csv --annotated " + emit + "/" + row.method +
                       ".annotated.csv --truth " + emit + "/train_truth.csv --test " + emit + "/test.csv");
    ASSERT_EQ(r.code, 0) << row.method;
    std::istringstream vin(r.out);
    const auto v = read_report(vin);
    ASSERT_EQ(v.rows.size(), 1u);
    EXPECT_EQ(v.rows[0], row) << row.method;
  }
}

TEST_F(Cli, ConfigFileIsOverriddenByFlags) {
  {
    std::ofstream f(path("gen.ini"));
    f << "dataset=blobs\nn=40\nseed=9\n";
  }
  ASSERT_EQ(cli("generate --config " + path("gen.ini") + " --n 20 --out " + path("g.csv")).code, 0);
  const auto ds = load_csv(path("g.csv"));
  EXPECT_EQ(ds.size(), 20u);
  EXPECT_EQ(ds.points, gen_blobs(20, 9).points);
}

TEST_F(Cli, DistanceAndRadius) {
  {
    std::ofstream a(path("a.csv")), b(path("b.csv")), inf(path("inf.csv"));
    a << "dim,birth,death\n0,0,2\n";
    b << "dim,birth,death\n0,0,2.5\n";
    inf << "dim,birth,death\n0,0,inf\n";
  }
  EXPECT_EQ(cli("distance --a " + path("a.csv") + " --b " + path("b.csv")).out, "0.500000000\n");
  EXPECT_EQ(cli("distance --metric wasserstein --a " + path("a.csv") + " --b " + path("b.csv")).out, "0.500000000\n");
  EXPECT_EQ(cli("distance --a " + path("a.csv") + " --b " + path("inf.csv")).code, 3);
  EXPECT_EQ(cli("distance --cap 3 --a " + path("a.csv") + " --b " + path("inf.csv")).out, "1.000000000\n");
  {
    std::ofstream p(path("pts.csv"));
    p << "x,y,label\n0,0,0\n3,0,0\n2,2,1\n";
  }
  EXPECT_EQ(cli("radius --input " + path("pts.csv")).out, "2.828427125\n");
  const auto dg = cli("diagram --input " + path("pts.csv") + " --out -");
  EXPECT_EQ(dg.code, 0);
  EXPECT_NE(dg.out.find("0,0,inf"), std::string::npos) << dg.out;
}
