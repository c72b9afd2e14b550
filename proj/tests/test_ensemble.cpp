#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "attnparse/ensemble.hpp"
#include "attnparse/synthetic.hpp"
#include "oracles.hpp"

using namespace attnparse;

namespace {

HeadRanking ranking_of(const std::vector<HeadId>& heads, Method method = Method::td, Metric metric = Metric::jsd) {
  HeadRanking r;
  r.method = method;
  r.metric = metric;
  double f1 = 1.0;
  for (const HeadId& h : heads) {
    r.entries.push_back({h, f1});
    f1 *= 0.9;
  }
  return r;
}

AttentionCorpus corpus_of(std::vector<AttentionTensor> tensors) {
  AttentionCorpus c;
  for (auto& t : tensors) {
    std::vector<std::string> words;
    for (int i = 1; i <= t.length(); ++i) words.push_back("w" + std::to_string(i));
    c.manifest.layers = t.layers();
    c.manifest.heads = t.heads();
    c.sentences.push_back({words, std::move(t)});
  }
  c.manifest.sentence_count = c.sentences.size();
  return c;
}

}  // namespace

TEST(Ensemble, AveragesDistancesBeforeRebuilding) {
  std::mt19937_64 rng(41);
  const AttentionTensor t = oracle::random_tensor(1, 3, 3, rng);
  const HeadRanking r = ranking_of({{1, 2}, {1, 1}});
  const auto d1 = head_distances(t, {1, 1}, Method::td, Metric::jsd).values();
  const auto d2 = head_distances(t, {1, 2}, Method::td, Metric::jsd).values();
  std::vector<double> avg{(d1[0] + d2[0]) / 2, (d1[1] + d2[1]) / 2};
  EXPECT_EQ(ensemble_parse(t, r, 2), oracle::d2t(avg, 1, 3));
}

TEST(Ensemble, WorkedAverage) {
  const std::vector<double> a{0.9, 0.1}, b{0.1, 0.5};
  std::vector<double> avg{(a[0] + b[0]) / 2, (a[1] + b[1]) / 2};
  EXPECT_NEAR(avg[0], 0.5, 1e-12);
  EXPECT_NEAR(avg[1], 0.3, 1e-12);
  EXPECT_EQ(d2t(3, avg).to_string(), "(1 (2 3))");
}

TEST(Ensemble, SingleHeadMatchesThatHead) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const AttentionTensor t = oracle::random_tensor(2, 2, 2 + static_cast<int>(rng() % 9), rng);
    const std::vector<HeadId> heads = all_heads(t);
    const HeadId best = heads[rng() % heads.size()];
    for (Method m : {Method::td, Method::cp, Method::cc}) {
      const HeadRanking r = ranking_of({best}, m, Metric::hel);
      EXPECT_EQ(ensemble_parse(t, r, 1), parse_with_head(t, best, m, Metric::hel));
    }
  }
}

TEST(Ensemble, IdenticalHeadsGiveThatTree) {
  std::mt19937_64 rng(44);
  const AttentionTensor base = oracle::random_tensor(1, 1, 6, rng, false);
  std::vector<float> data;
  for (int h = 0; h < 3; ++h) data.insert(data.end(), base.attention().begin(), base.attention().end());
  const AttentionTensor t = with_average_head(AttentionTensor(1, 3, 6, data));
  const HeadRanking r = ranking_of({{1, 3}, {1, 1}, {1, 2}});
  EXPECT_EQ(ensemble_parse(t, r, 3), parse_with_head(t, {1, 1}, Method::td, Metric::jsd));
}

TEST(Ensemble, RankingOrderDoesNotMatter) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const AttentionTensor t = oracle::random_tensor(2, 3, 3 + static_cast<int>(rng() % 8), rng);
    std::vector<HeadId> heads = all_heads(t);
    std::shuffle(heads.begin(), heads.end(), rng);
    heads.resize(5);
    const HeadRanking r1 = ranking_of(heads, Method::cc);
    std::shuffle(heads.begin(), heads.end(), rng);
    const HeadRanking r2 = ranking_of(heads, Method::cc);
    EXPECT_EQ(ensemble_parse(t, r1, 5), ensemble_parse(t, r2, 5));
  }
}

TEST(Ensemble, NormalizationAndMethodOverride) {
  std::mt19937_64 rng(53);
  const AttentionTensor t = oracle::random_tensor(1, 2, 7, rng);
  const HeadRanking r = ranking_of({{1, 1}, {1, 2}});
  EnsembleOptions o;
  o.normalize = true;
  EXPECT_EQ(ensemble_parse(t, r, 1, o), parse_with_head(t, {1, 1}, Method::td, Metric::jsd));
  o.method = Method::cp;
  EXPECT_EQ(ensemble_parse(t, r, 1, o), parse_with_head(t, {1, 1}, Method::cp, Metric::jsd));
}

TEST(Ensemble, RejectsBadK) {
  std::mt19937_64 rng(59);
  const AttentionTensor t = oracle::random_tensor(1, 2, 4, rng);
  const HeadRanking r = ranking_of({{1, 1}, {1, 2}});
  for (int k : {0, 3}) {
    try {
      ensemble_parse(t, r, k);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.category(), ErrorCategory::usage);
      EXPECT_EQ(e.code(), "k_out_of_range");
    }
  }
  EXPECT_EQ(ensemble_parse(AttentionTensor(1, 1, 1, {1.0f}), r, 1), BinaryTree::leaf(1));
}

TEST(Ranking, PlantedHeadComesFirst) {
  SyntheticOptions o;
  o.sentences = 12;
  const SyntheticCorpus s = make_synthetic_corpus(o);
  for (Method m : {Method::td, Method::cp, Method::cc}) {
    const HeadRanking r = rank_heads(s.attention, s.gold, m, Metric::jsd, 2);
    EXPECT_EQ(r.entries.front().head, (HeadId{1, 1})) << to_string(m);
    EXPECT_EQ(r.entries.front().f1, 1.0);
    EXPECT_EQ(r.entries.size(), 8u);
    EXPECT_NO_THROW(r.validate());
  }
}

TEST(Ranking, TiesFavourLowerHeads) {
  std::mt19937_64 rng(61);
  const AttentionTensor base = oracle::random_tensor(1, 1, 5, rng, false);
  std::vector<float> data;
  for (int h = 0; h < 2; ++h) data.insert(data.end(), base.attention().begin(), base.attention().end());
  AttentionCorpus c = corpus_of({with_average_head(AttentionTensor(1, 2, 5, data))});
  const std::vector<GoldTree> gold{to_gold_tree(
      BinaryTree::from_string("((1 2) (3 (4 5)))"), c.sentences[0].words, [](const Span&) { return "X"; },
      [](int) { return "NN"; })};
  const HeadRanking r = rank_heads(c, gold, Method::td, Metric::jsd);
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_EQ(r.entries[0].f1, r.entries[1].f1);
  EXPECT_EQ(r.entries[0].head, (HeadId{1, 1}));
  EXPECT_EQ(r.entries[1].head, (HeadId{1, 2}));
}

TEST(Ranking, SingleHeadModel) {
  std::mt19937_64 rng(62);
  AttentionCorpus c = corpus_of({oracle::random_tensor(1, 1, 4, rng, false)});
  const std::vector<GoldTree> gold{to_gold_tree(BinaryTree::from_string("(1 (2 (3 4)))"), c.sentences[0].words,
                                                [](const Span&) { return "X"; }, [](int) { return "NN"; })};
  const HeadRanking r = rank_heads(c, gold, Method::td, Metric::jsd);
  ASSERT_EQ(r.entries.size(), 1u);
  const BinaryTree own = parse_with_head(c.sentences[0].tensor, {1, 1}, Method::td, Metric::jsd);
  EXPECT_EQ(r.entries[0].f1, sentence_f1(own, gold[0]));
}

TEST(Ranking, JsonRoundTripAndValidation) {
  HeadRanking r = ranking_of({{2, 1}, {1, 3}, {1, 1}}, Method::cc, Metric::hel);
  r.metadata.language = "de";
  r.k_grid = {{1, 50.0}, {2, 55.5}};
  r.recommended_k = 2;
  r.metric_search = {{"jsd", 0.4}, {"hel", 0.5}};
  EXPECT_EQ(HeadRanking::from_json(r.to_json()), r);

  nlohmann::json bad = r.to_json();
  bad["entries"][0]["f1"] = 0.1;
  EXPECT_THROW(HeadRanking::from_json(bad), Error);
  bad = r.to_json();
  bad["entries"][1] = bad["entries"][0];
  EXPECT_THROW(HeadRanking::from_json(bad), Error);
  bad = r.to_json();
  bad.erase("method");
  EXPECT_THROW(HeadRanking::from_json(bad), Error);
}

TEST(Ranking, MisalignedGoldIsRejected) {
  std::mt19937_64 rng(63);
  AttentionCorpus c = corpus_of({oracle::random_tensor(1, 1, 4, rng, false)});
  const std::vector<GoldTree> gold{to_gold_tree(BinaryTree::from_string("(1 2)"), {"a", "b"},
                                                [](const Span&) { return "X"; }, [](int) { return "NN"; })};
  EXPECT_THROW(rank_heads(c, gold, Method::td, Metric::jsd), Error);
}

TEST(Ranking, KGridPicksSmallestBest) {
  SyntheticOptions o;
  o.sentences = 6;
  const SyntheticCorpus s = make_synthetic_corpus(o);
  HeadRanking r = rank_heads(s.attention, s.gold, Method::td, Metric::jsd);
  const std::vector<int> grid{1, 2, 50};
  select_k(r, s.attention, s.gold, grid);
  EXPECT_EQ(r.k_grid.size(), 2u);
  EXPECT_EQ(r.k_grid.at(1), 100.0);
  EXPECT_EQ(r.recommended_k, 1);
}

TEST(Ranking, ThreadCountDoesNotChangeResults) {
  SyntheticOptions o;
  o.sentences = 10;
  o.planted.reset();
  const SyntheticCorpus s = make_synthetic_corpus(o);
  const HeadRanking a = rank_heads(s.attention, s.gold, Method::cc, Metric::jsd, 1);
  const HeadRanking b = rank_heads(s.attention, s.gold, Method::cc, Metric::jsd, 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(parse_corpus(s.attention, a, 3, {}, 1), parse_corpus(s.attention, a, 3, {}, 3));
}
