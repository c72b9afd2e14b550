#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "attnparse/evaluation.hpp"
#include "attnparse/treebank.hpp"
#include "oracles.hpp"

using namespace attnparse;

TEST(Bracketed, ParsesLabelsAndTags) {
  const GoldTree t = parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VB ran)))");
  EXPECT_EQ(t.size(), 3);
  EXPECT_EQ(t.root.label, "S");
  EXPECT_EQ(t.words(), (std::vector<std::string>{"the", "dog", "ran"}));
  EXPECT_EQ(t.tags(), (std::vector<std::string>{"DT", "NN", "VB"}));
  EXPECT_EQ(parse_bracketed("(S (NN dog))").size(), 1);
  EXPECT_EQ(parse_bracketed("  ( (S\n (NN dog)\t(VB ran) ) )  ").size(), 2);
}

TEST(Bracketed, ErrorsNameTheOffset) {
  try {
    parse_bracketed("(S (NP (DT the)");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::data);
    EXPECT_NE(std::string(e.what()).find("offset 15"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("opened at offset 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_bracketed("(S (NP))"), Error);
  EXPECT_THROW(parse_bracketed("(S (NN a)) (S (NN b))"), Error);
  EXPECT_THROW(parse_bracketed(""), Error);
}

TEST(Punctuation, StripsDefaultTags) {
  const GoldTree t = strip_punctuation(parse_bracketed("(S (NP (NN dog)) (. .))"));
  EXPECT_EQ(t.size(), 1);
  EXPECT_EQ(write_gold_tree(t), "(S (NP (NN dog)))");
  const GoldTree plain = parse_bracketed("(S (NP (DT a) (NN b)) (VB c))");
  EXPECT_EQ(write_gold_tree(strip_punctuation(plain)), write_gold_tree(plain));
  try {
    strip_punctuation(parse_bracketed("(S (, ,) (. .))"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "empty_sentence");
  }
  EXPECT_EQ(strip_punctuation(parse_bracketed("(S (PU x) (NN y))"), {"PU"}).size(), 1);
}

TEST(Punctuation, RemovesEmptiedConstituents) {
  const GoldTree t = strip_punctuation(parse_bracketed("(S (NP (NN a) (NN b)) (PRN (-LRB- -LRB-) (, ,)) (VB c))"));
  EXPECT_EQ(write_gold_tree(t), "(S (NP (NN a) (NN b)) (VB c))");
  EXPECT_EQ(tree_to_spans(t, false), (SpanSet{{1, 2}}));
}

TEST(WriteTree, PlaceholderLabels) {
  EXPECT_EQ(write_tree(BinaryTree::leaf(1), {"a"}), "(X a)");
  EXPECT_EQ(write_tree(BinaryTree::from_string("((1 2) 3)"), {"a", "b", "c"}), "(X (X a b) c)");
  EXPECT_EQ(write_tree(BinaryTree::from_string("(1 2)"), {"(", ")"}), "(X -LRB- -RRB-)");
  EXPECT_THROW(write_tree(BinaryTree::leaf(1), {"a", "b"}), Error);
}

TEST(WriteTree, RoundTripPreservesSpans) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 15);
    const BinaryTree t = baseline_tree(n, BaselineStrategy::random, rng());
    std::vector<std::string> words;
    for (int i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
    const GoldTree back = parse_bracketed(write_tree(t, words));
    EXPECT_EQ(back.size(), n);
    EXPECT_EQ(back.words(), words);
    EXPECT_EQ(tree_to_spans(back, true), tree_to_spans(t, true));
  }
}

TEST(WriteGoldTree, RoundTripPreservesLabels) {
  const std::string text = "(S (NP-SBJ (DT the) (NN dog)) (VP (VB ran) (ADVP (RB fast))) (. .))";
  const GoldTree t = parse_bracketed(text);
  EXPECT_EQ(write_gold_tree(t), text);
  EXPECT_EQ(labeled_spans(parse_bracketed(write_gold_tree(t)), true), labeled_spans(t, true));
}

TEST(TreeLines, SkipsBlankLinesAndNamesBadLine) {
  std::istringstream in("(S (NN a))\n\n(S (NN b) (NN c))\n");
  EXPECT_EQ(parse_tree_lines(in).size(), 2u);
  std::istringstream bad("(S (NN a))\n(S (NN b)\n");
  try {
    parse_tree_lines(bad, "gold.trees");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("gold.trees:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_trees("/nonexistent/gold.trees"), Error);
}
