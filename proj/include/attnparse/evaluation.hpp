#pragma once

// Unlabeled sentence-level F1, labeled recall, and naive baseline trees.

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attnparse/core.hpp"
#include "attnparse/error.hpp"

namespace attnparse {

struct PrfScore {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
};

/// Precision, recall and F1 of span sets; 0/0 counts as 1 for all three.
inline PrfScore span_prf(const SpanSet& pred, const SpanSet& gold) {
  std::size_t overlap = 0;
  for (const Span& s : pred) overlap += gold.count(s);
  PrfScore out;
  out.precision = pred.empty() ? 1.0 : static_cast<double>(overlap) / static_cast<double>(pred.size());
  out.recall = gold.empty() ? 1.0 : static_cast<double>(overlap) / static_cast<double>(gold.size());
  if (pred.empty() && gold.empty()) {
    out.f1 = 1.0;
  } else if (out.precision + out.recall == 0.0) {
    out.f1 = 0.0;
  } else {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

inline double sentence_f1(const SpanSet& pred, const SpanSet& gold) { return span_prf(pred, gold).f1; }

/// Unlabeled F1 over nontrivial spans.
template <typename PredTree>
double sentence_f1(const PredTree& pred, const GoldTree& gold) {
  if (pred.size() != gold.size()) {
    throw data_error("length_mismatch", "prediction has " + std::to_string(pred.size()) + " words, gold has " +
                                            std::to_string(gold.size()));
  }
  return sentence_f1(tree_to_spans(pred, false), tree_to_spans(gold, false));
}

/// Mean of sentence scores in [0, 1], as a percentage.
inline double corpus_f1(std::span<const double> sentence_scores) {
  if (sentence_scores.empty()) throw data_error("empty_corpus", "cannot score an empty corpus");
  double sum = 0.0;
  for (double v : sentence_scores) sum += v;
  return 100.0 * sum / static_cast<double>(sentence_scores.size());
}

template <typename PredTree>
std::vector<double> sentence_scores(std::span<const PredTree> preds, std::span<const GoldTree> golds) {
  if (preds.size() != golds.size()) {
    throw data_error("misaligned", std::to_string(preds.size()) + " predictions for " + std::to_string(golds.size()) +
                                       " gold trees");
  }
  std::vector<double> out;
  out.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    try {
      out.push_back(sentence_f1(preds[i], golds[i]));
    } catch (const Error& e) {
      throw data_error("misaligned", "sentence " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

template <typename PredTree>
double corpus_f1(std::span<const PredTree> preds, std::span<const GoldTree> golds) {
  const std::vector<double> scores = sentence_scores(preds, golds);
  return corpus_f1(std::span<const double>(scores));
}

/// Category part of a treebank label: "NP-SBJ-1" and "NP=2" become "NP".
/// Labels starting with '-' (e.g. "-NONE-") are returned unchanged.
inline std::string label_category(std::string_view label) {
  if (label.empty() || label.front() == '-') return std::string(label);
  const std::size_t cut = label.find_first_of("-=");
  return std::string(label.substr(0, cut));
}

/// Fraction of nontrivial gold spans with category `label` that appear among
/// the predicted spans, pooled over the corpus.
template <typename PredTree>
double label_recall(std::span<const PredTree> preds, std::span<const GoldTree> golds, std::string_view label) {
  if (preds.size() != golds.size()) throw data_error("misaligned", "prediction and gold corpora differ in size");
  std::size_t total = 0;
  std::size_t found = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != golds[i].size()) {
      throw data_error("misaligned", "sentence " + std::to_string(i + 1) + " differs in length");
    }
    const SpanSet pred = tree_to_spans(preds[i], false);
    SpanSet wanted;
    for (const auto& [span, name] : labeled_spans(golds[i], false)) {
      if (label_category(name) == label) wanted.insert(span);
    }
    total += wanted.size();
    for (const Span& s : wanted) found += pred.count(s);
  }
  if (total == 0) {
    throw data_error("label_not_found", "no nontrivial gold constituent carries label " + std::string(label));
  }
  return static_cast<double>(found) / static_cast<double>(total);
}

enum class BaselineStrategy { left, right, random };

inline BaselineStrategy parse_baseline_strategy(std::string_view name) {
  if (name == "left") return BaselineStrategy::left;
  if (name == "right") return BaselineStrategy::right;
  if (name == "random") return BaselineStrategy::random;
  throw usage_error("unknown_strategy", "unknown baseline strategy '" + std::string(name) + "'");
}

/// Per-sentence seed derived from the corpus seed (splitmix64 mixing).
inline std::uint64_t sentence_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Left-branching, right-branching, or uniformly random split at each level.
inline BinaryTree baseline_tree(int n, BaselineStrategy strategy, std::uint64_t seed = 0) {
  switch (strategy) {
    case BaselineStrategy::left:
      return BinaryTree::from_splits(1, n, [](int, int j) { return j - 1; });
    case BaselineStrategy::right:
      return BinaryTree::from_splits(1, n, [](int i, int) { return i; });
    case BaselineStrategy::random: {
      std::mt19937_64 rng(seed);
      return BinaryTree::from_splits(1, n, [&](int i, int j) {
        return i + static_cast<int>(rng() % static_cast<std::uint64_t>(j - i));
      });
    }
  }
  throw usage_error("unknown_strategy", "unknown baseline strategy");
}

/// Evaluation summary written by `attnparse evaluate`.
struct EvaluationReport {
  double corpus_f1 = 0.0;
  std::vector<double> sentence_f1;
  std::vector<int> lengths;
  std::map<std::string, double> label_recall;
  nlohmann::json ranking_metadata;

  nlohmann::json to_json() const {
    nlohmann::json j;
    char display[32];
    std::snprintf(display, sizeof(display), "%.1f", corpus_f1);
    j["corpus_f1"] = corpus_f1;
    j["corpus_f1_display"] = display;
    j["sentence_count"] = sentence_f1.size();
    // Sentences of length <= 2 have no nontrivial spans and score 1 by
    // convention; the mean without them is reported alongside.
    std::vector<double> long_scores;
    nlohmann::json histogram = nlohmann::json::object();
    std::map<int, int> counts;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      ++counts[lengths[i]];
      if (lengths[i] > 2) long_scores.push_back(sentence_f1[i]);
    }
    for (const auto& [len, count] : counts) histogram[std::to_string(len)] = count;
    j["short_sentence_count"] = sentence_f1.size() - long_scores.size();
    j["corpus_f1_excluding_short"] =
        long_scores.empty() ? nlohmann::json(nullptr) : nlohmann::json(attnparse::corpus_f1(std::span<const double>(long_scores)));
    j["sentence_f1"] = sentence_f1;
    j["label_recall"] = label_recall;
    j["length_histogram"] = histogram;
    if (!ranking_metadata.is_null()) j["ranking"] = ranking_metadata;
    return j;
  }
};

}  // namespace attnparse
