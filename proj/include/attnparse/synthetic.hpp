#pragma once

// Synthetic corpora with a known answer: random gold trees, noise heads with
// Dirichlet(1) rows, and optionally one planted head whose rows encode the
// gold tree exactly. Tensors carry the layer-average head, as if loaded.
//
// Planted rows: every internal node owns the column of its split point.
// A word gives weight (1 - decay) * decay^d to its ancestor at depth d and
// the leftover mass to its parent, so two words share exactly the mass of
// their common ancestors. Their divergence then falls strictly with the
// depth of their lowest common ancestor.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "attnparse/attention_io.hpp"
#include "attnparse/core.hpp"
#include "attnparse/evaluation.hpp"

namespace attnparse {

enum class GoldShape { random, right_branching };

struct SyntheticOptions {
  std::size_t sentences = 20;
  int min_length = 3;
  int max_length = 10;
  int layers = 2;
  int heads = 3;
  std::optional<HeadId> planted = HeadId{1, 1};
  GoldShape shape = GoldShape::random;
  double decay = 0.01;
  std::uint64_t seed = 7;
  std::string model = "synthetic";
  std::string language = "xx";
};

struct SyntheticCorpus {
  AttentionCorpus attention;
  std::vector<GoldTree> gold;
  std::vector<BinaryTree> trees;
};

/// n x n row-major attention matrix encoding `tree` (see file comment).
inline std::vector<float> planted_rows(const BinaryTree& tree, double decay) {
  const int n = tree.size();
  std::vector<double> rows(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  if (n == 1) {
    rows[0] = 1.0;
    return {1.0f};
  }
  std::vector<int> path;  // split columns of the ancestors, root first
  auto visit = [&](auto&& self, int index) -> void {
    const BinaryTree::Node& node = tree.node(index);
    if (node.is_leaf()) {
      const std::size_t r = static_cast<std::size_t>(node.span.start - 1) * static_cast<std::size_t>(n);
      double weight = 1.0 - decay;
      for (int col : path) {
        rows[r + static_cast<std::size_t>(col - 1)] += weight;
        weight *= decay;
      }
      rows[r + static_cast<std::size_t>(path.back() - 1)] += std::pow(decay, static_cast<double>(path.size()));
      return;
    }
    path.push_back(tree.node(node.left).span.end);
    self(self, node.left);
    self(self, node.right);
    path.pop_back();
  };
  visit(visit, static_cast<int>(tree.nodes().size()) - 1);
  return std::vector<float>(rows.begin(), rows.end());
}

namespace detail {

inline double unit_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline std::vector<float> noise_rows(int n, std::mt19937_64& rng) {
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  std::vector<double> row(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    double sum = 0.0;
    for (double& v : row) {
      v = -std::log(unit_uniform(rng));
      sum += v;
    }
    for (double v : row) out.push_back(static_cast<float>(v / sum));
  }
  return out;
}

}  // namespace detail

inline SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& opts) {
  if (opts.min_length < 1 || opts.max_length < opts.min_length) {
    throw usage_error("bad_lengths", "synthetic sentence lengths must satisfy 1 <= min <= max");
  }
  if (opts.layers < 1 || opts.heads < 1) throw usage_error("bad_shape", "synthetic model needs layers and heads");
  if (opts.planted && (opts.planted->layer < 1 || opts.planted->layer > opts.layers || opts.planted->head < 1 ||
                       opts.planted->head > opts.heads)) {
    throw usage_error("head_out_of_range", "planted head must be a real head of the synthetic model");
  }
  SyntheticCorpus out;
  out.attention.manifest.model = opts.model;
  out.attention.manifest.language = opts.language;
  out.attention.manifest.layers = opts.layers;
  out.attention.manifest.heads = opts.heads;
  out.attention.manifest.sentence_count = opts.sentences;

  std::mt19937_64 rng(opts.seed);
  const auto span_width = static_cast<std::uint64_t>(opts.max_length - opts.min_length + 1);
  for (std::size_t s = 0; s < opts.sentences; ++s) {
    const int n = opts.min_length + static_cast<int>(rng() % span_width);
    BinaryTree tree = opts.shape == GoldShape::right_branching
                          ? baseline_tree(n, BaselineStrategy::right)
                          : baseline_tree(n, BaselineStrategy::random, rng());
    std::vector<std::string> words;
    for (int i = 1; i <= n; ++i) words.push_back("w" + std::to_string(i));

    std::vector<float> attention;
    for (int l = 1; l <= opts.layers; ++l) {
      for (int h = 1; h <= opts.heads; ++h) {
        std::vector<float> rows = (opts.planted && *opts.planted == HeadId{l, h}) ? planted_rows(tree, opts.decay)
                                                                                  : detail::noise_rows(n, rng);
        attention.insert(attention.end(), rows.begin(), rows.end());
      }
    }
    out.gold.push_back(to_gold_tree(
        tree, words, [n](const Span& sp) { return sp.length() == n ? "S" : (sp.length() <= 3 ? "NP" : "VP"); },
        [](int) { return std::string("NN"); }));
    out.attention.sentences.push_back(AttentionSentence{
        std::move(words), with_average_head(AttentionTensor(opts.layers, opts.heads, n, std::move(attention)))});
    out.trees.push_back(std::move(tree));
  }
  return out;
}

}  // namespace attnparse
