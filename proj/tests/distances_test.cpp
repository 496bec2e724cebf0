#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tda_ssl/distances.hpp"

using namespace tda_ssl;

namespace {

using Diagram = std::vector<DiagramPoint>;

std::vector<double> candidate_set(const Diagram& p, const Diagram& q) {
  std::vector<double> c;
  for (const auto& a : p) {
    c.push_back(point_cost(a));
    for (const auto& b : q) c.push_back(pair_cost(a, b));
  }
  for (const auto& b : q) c.push_back(point_cost(b));
  return c;
}

Diagram scaled(Diagram d, double c) {
  for (auto& [b, e] : d) {
    b *= c;
    e *= c;
  }
  return d;
}

}  // namespace

TEST(Costs, PairCost) {
  EXPECT_EQ(pair_cost({0, 2}, {0, 2}), 0.0);
  EXPECT_EQ(pair_cost({0, 2}, {1, 2.5}), 1.0);
  EXPECT_EQ(pair_cost({0, 0}, {3, 4}), 4.0);
}

TEST(Costs, PointCost) {
  EXPECT_EQ(point_cost({1, 1}), 0.0);
  EXPECT_EQ(point_cost({0, 2}), 1.0);
  EXPECT_NEAR(point_cost({0.5, 0.9}), 0.2, 1e-15);
}

TEST(Costs, MatchingCost) {
  const Diagram p{{0, 2}}, q{{0, 3}}, none;
  EXPECT_EQ(matching_cost(p, p, {{{0, 0}}, {}, {}}), 0.0);
  EXPECT_EQ(matching_cost(p, none, {{}, {0}, {}}), 1.0);
  EXPECT_EQ(matching_cost(p, q, {{}, {0}, {0}}), 1.5);
  EXPECT_EQ(matching_cost(none, none, {}), 0.0);
}

TEST(Costs, InvalidMatchings) {
  const Diagram p{{0, 2}}, q{{0, 3}};
  EXPECT_THROW(matching_cost(p, q, {{{0, 1}}, {}, {}}), std::invalid_argument);
  EXPECT_THROW(matching_cost(p, q, {{{0, 0}}, {0}, {}}), std::invalid_argument);
  EXPECT_THROW(matching_cost(p, q, {{}, {0}, {}}), std::invalid_argument);
}

TEST(Bottleneck, Examples) {
  const Diagram p{{0, 2}}, q{{0, 2.5}}, none;
  EXPECT_EQ(bottleneck_distance(p, p), 0.0);
  EXPECT_EQ(bottleneck_distance(p, none), 1.0);
  EXPECT_EQ(bottleneck_distance(p, q), 0.5);
  EXPECT_EQ(bottleneck_distance(none, none), 0.0);
}

TEST(Bottleneck, RejectsInfinity) {
  const Diagram p{{0, kInfinity}};
  EXPECT_THROW(bottleneck_distance(p, p), std::invalid_argument);
}

TEST(Wasserstein, Examples) {
  const Diagram p{{0, 2}}, q{{0, 2.5}}, none;
  EXPECT_EQ(wasserstein_distance(p, p), 0.0);
  EXPECT_EQ(wasserstein_distance(p, none, 1), 2.0);
  EXPECT_EQ(wasserstein_distance(p, q, 1), 0.5);
  // conventional variant halves the diagonal term
  EXPECT_EQ(wasserstein_distance(p, none, 1, true), 1.0);
}

TEST(Wasserstein, Errors) {
  const Diagram p{{0, 2}};
  EXPECT_THROW(wasserstein_distance(p, p, 0.5), std::invalid_argument);
  EXPECT_THROW(wasserstein_distance(p, Diagram{{0, kInfinity}}), std::invalid_argument);
}

TEST(Oracle, ExhaustiveEnumerationAgrees) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = oracle::random_diagram(rng, 6), q = oracle::random_diagram(rng, 6);
    EXPECT_NEAR(bottleneck_distance(p, q), oracle::brute_bottleneck(p, q), 1e-9) << trial;
    EXPECT_NEAR(wasserstein_distance(p, q, 1), oracle::brute_wasserstein(p, q, 1), 1e-9) << trial;
    EXPECT_NEAR(wasserstein_distance(p, q, 2), oracle::brute_wasserstein(p, q, 2), 1e-9) << trial;
  }
}

TEST(Bottleneck, ResultIsACandidate) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = oracle::random_diagram(rng, 8), q = oracle::random_diagram(rng, 8);
    if (p.empty() && q.empty()) continue;
    const auto c = candidate_set(p, q);
    EXPECT_NE(std::find(c.begin(), c.end(), bottleneck_distance(p, q)), c.end());
  }
}

TEST(Properties, SymmetryAndIdentity) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = oracle::random_diagram(rng, 10), q = oracle::random_diagram(rng, 10);
    EXPECT_EQ(bottleneck_distance(p, q), bottleneck_distance(q, p));
    for (double r : {1.0, 2.0, 3.5}) EXPECT_EQ(wasserstein_distance(p, q, r), wasserstein_distance(q, p, r));
    EXPECT_EQ(bottleneck_distance(p, p), 0.0);
    EXPECT_EQ(wasserstein_distance(p, p, 2), 0.0);
  }
}

TEST(Bottleneck, TriangleInequality) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = oracle::random_diagram(rng, 8), b = oracle::random_diagram(rng, 8), c = oracle::random_diagram(rng, 8);
    EXPECT_LE(bottleneck_distance(a, c), bottleneck_distance(a, b) + bottleneck_distance(b, c) + 1e-9);
  }
}

TEST(Properties, ScalingCovariance) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> factor(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = oracle::random_diagram(rng, 8), q = oracle::random_diagram(rng, 8);
    const double c = factor(rng);
    const auto ps = scaled(p, c), qs = scaled(q, c);
    EXPECT_NEAR(bottleneck_distance(ps, qs), c * bottleneck_distance(p, q), 1e-9);
    for (double r : {1.0, 2.0}) EXPECT_NEAR(wasserstein_distance(ps, qs, r), c * wasserstein_distance(p, q, r), 1e-9);
  }
}

TEST(Properties, LargerDiagramsStayConsistent) {
  // no oracle at this size; bottleneck never exceeds any explicit matching
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = oracle::random_diagram(rng, 60), q = oracle::random_diagram(rng, 60);
    DiagramMatching all_unmatched;
    for (std::size_t i = 0; i < p.size(); ++i) all_unmatched.unmatched_p.push_back(i);
    for (std::size_t j = 0; j < q.size(); ++j) all_unmatched.unmatched_q.push_back(j);
    EXPECT_LE(bottleneck_distance(p, q), matching_cost(p, q, all_unmatched));
    EXPECT_LE(bottleneck_distance(p, q), wasserstein_distance(p, q, 1));
  }
}

TEST(DiagramDistance, SumsOverDimensions) {
  PersistenceDiagram a, b;
  a.pairs = {{0, 0, 2}, {1, 1, 3}};
  b.pairs = {{0, 0, 2.5}};
  const std::vector<int> d0{0}, d01{0, 1};
  const DiagramDistanceConfig bn{};
  EXPECT_EQ(diagram_distance(a, b, bn, d0), 0.5);
  EXPECT_EQ(diagram_distance(a, b, bn, d01), 1.5);
  const DiagramDistanceConfig w{DiagramMetric::Wasserstein, 1.0, false};
  EXPECT_EQ(diagram_distance(a, b, w, d01), 2.5);
}
