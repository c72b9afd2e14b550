#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "attnparse/topdown.hpp"
#include "oracles.hpp"

using namespace attnparse;

namespace {

BinaryTree tree_of(std::vector<double> d) { return d2t(static_cast<int>(d.size()) + 1, d); }

}  // namespace

TEST(Distances, WorkedValues) {
  const AttentionTensor single(1, 1, 1, {1.0f});
  EXPECT_TRUE(compute_distances(single, {1, 1}, Metric::jsd).empty());

  const AttentionTensor same(1, 1, 3, {0.2f, 0.3f, 0.5f, 0.2f, 0.3f, 0.5f, 0.2f, 0.3f, 0.5f});
  EXPECT_EQ(compute_distances(same, {1, 1}, Metric::jsd).values(), (std::vector<double>{0.0, 0.0}));

  const AttentionTensor t(1, 1, 3, {1, 0, 0, 0, 1, 0, 0, 1, 0});
  const DistanceVector d = compute_distances(t, {1, 1}, Metric::jsd);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_NEAR(d[0], std::sqrt(std::numbers::ln2), 1e-12);
  EXPECT_EQ(d[1], 0.0);
}

TEST(Distances, MatchOracleOnRandomHeads) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const AttentionTensor t = oracle::random_tensor(2, 2, 2 + static_cast<int>(rng() % 10), rng);
    for (const HeadId& h : all_heads(t)) {
      const oracle::Rows rows = oracle::head_rows(t, h);
      for (Metric m : {Metric::jsd, Metric::hel}) {
        const DistanceVector d = compute_distances(t, h, m);
        for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(d[i], oracle::divergence(m, rows[i], rows[i + 1]), 1e-7);
      }
    }
  }
}

TEST(Distances, MetricFamiliesAreKeptApart) {
  const AttentionTensor t(1, 1, 2, {0.5f, 0.5f, 0.5f, 0.5f}, false, 2, {1, 0, 0, 1});
  EXPECT_THROW(compute_distances(t, {1, 1}, Metric::cos), Error);
  EXPECT_THROW(compute_hidden_distances(t, 1, Metric::jsd), Error);
  EXPECT_NEAR(compute_hidden_distances(t, 1, Metric::cos)[0], 1.0, 1e-12);
  EXPECT_NEAR(compute_hidden_distances(t, 1, Metric::l1)[0], 2.0, 1e-12);
  const AttentionTensor no_hidden(1, 1, 2, {0.5f, 0.5f, 0.5f, 0.5f});
  EXPECT_THROW(compute_hidden_distances(no_hidden, 1, Metric::l2), Error);
}

TEST(D2T, WorkedValues) {
  EXPECT_EQ(tree_of({0.9, 0.1}).to_string(), "(1 (2 3))");
  EXPECT_EQ(tree_of({0.1, 0.9}).to_string(), "((1 2) 3)");
  EXPECT_EQ(tree_of({0.5, 0.5}).to_string(), "(1 (2 3))");
  EXPECT_EQ(tree_of({}).to_string(), "1");
  EXPECT_EQ(tree_of({5, 4, 3, 2}), BinaryTree::from_string("(1 (2 (3 (4 5))))"));
  EXPECT_EQ(tree_of({1, 2, 3, 4}), BinaryTree::from_string("((((1 2) 3) 4) 5)"));
  EXPECT_THROW(d2t(3, std::vector<double>{1.0}), Error);
}

TEST(D2T, MatchesIndependentRecursion) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> grid(0, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 15);
    std::vector<double> d(static_cast<std::size_t>(n - 1));
    for (double& v : d) v = grid(rng);
    EXPECT_EQ(d2t(n, d), oracle::d2t(d, 1, n));
  }
}

TEST(D2T, SentenceOverloadChecksLength) {
  const Sentence s({"a", "b", "c"});
  EXPECT_EQ(d2t(s, DistanceVector({0.1, 0.9})).to_string(), "((1 2) 3)");
  EXPECT_THROW(d2t(s, DistanceVector({0.1})), Error);
}
