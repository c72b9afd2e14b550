#pragma once

// Top-down tree induction: syntactic distances between adjacent words,
// then recursive splitting at the largest distance.

#include <span>
#include <vector>

#include "attnparse/attention_io.hpp"
#include "attnparse/core.hpp"
#include "attnparse/distances.hpp"

namespace attnparse {

/// d[i] = f(row_i, row_{i+1}) over the attention rows of `head`.
inline DistanceVector compute_distances(const AttentionTensor& t, const HeadId& head, Metric metric) {
  if (!is_distribution_metric(metric)) {
    throw usage_error("metric_mismatch", std::string(to_string(metric)) + " needs hidden states, not attention rows");
  }
  t.check_head(head);
  const SquareMatrix<double> rows = t.head_matrix(head);
  const std::size_t n = rows.size();
  std::vector<double> d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = kernels::evaluate(metric, rows.row(i), rows.row(i + 1));
  return DistanceVector(std::move(d));
}

/// Hidden-state variant: d[i] = f(h_i, h_{i+1}) at `layer` with COS, L1 or L2.
inline DistanceVector compute_hidden_distances(const AttentionTensor& t, int layer, Metric metric) {
  if (is_distribution_metric(metric)) {
    throw usage_error("metric_mismatch", std::string(to_string(metric)) + " needs attention rows, not hidden states");
  }
  if (!t.has_hidden()) throw data_error("missing_hidden", "hidden states were requested but the tensor has none");
  std::vector<double> d;
  std::vector<double> prev = t.hidden_state(layer, 1);
  for (int i = 2; i <= t.length(); ++i) {
    std::vector<double> cur = t.hidden_state(layer, i);
    d.push_back(kernels::evaluate(metric, prev, cur));
    prev = std::move(cur);
  }
  return DistanceVector(std::move(d));
}

/// Splits the span at the largest distance (leftmost on ties) and recurses.
/// Accepts any finite values; positions of `d` are 0-based gaps.
inline BinaryTree d2t(int length, std::span<const double> d) {
  if (length < 1) throw data_error("empty_sentence", "cannot build a tree over zero words");
  if (d.size() != static_cast<std::size_t>(length - 1)) {
    throw data_error("length_mismatch", "distance vector has " + std::to_string(d.size()) + " entries for " +
                                            std::to_string(length) + " words");
  }
  return BinaryTree::from_splits(1, length, [&](int i, int j) {
    int best = i;
    for (int k = i + 1; k < j; ++k) {
      if (d[static_cast<std::size_t>(k - 1)] > d[static_cast<std::size_t>(best - 1)]) best = k;
    }
    return best;
  });
}

inline BinaryTree d2t(const Sentence& words, const DistanceVector& d) {
  return d2t(static_cast<int>(words.size()), d.values());
}

}  // namespace attnparse
