#pragma once

// Chart-based tree induction. Every span (i, j) gets a composition cost and
// CKY finds the binary tree of minimum total cost:
//
//   span_cost(i, i) = 0
//   span_cost(i, j) = comp(i, j) + min_{i <= k < j} span_cost(i, k) + span_cost(k+1, j)
//
// Two composition costs are provided: the mean pairwise distance between
// the attention rows inside the span (PairScorer) and the mean distance of
// each row to the span's average row (CharacteristicScorer).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "attnparse/attention_io.hpp"
#include "attnparse/core.hpp"
#include "attnparse/distances.hpp"
#include "attnparse/matrix.hpp"

namespace attnparse {

/// Anything that maps a span (length >= 2) to its composition cost.
template <typename F>
concept SpanCost = std::invocable<F&, Span> && std::convertible_to<std::invoke_result_t<F&, Span>, double>;

/// Filled CKY chart with 1-based accessors. cost(i, j) is the minimum cost of
/// any subtree over (i, j); split(i, j) is the chosen k (left child ends at k).
class ScoreChart {
 public:
  ScoreChart() = default;
  explicit ScoreChart(int n)
      : n_(n), cost_(static_cast<std::size_t>(n + 1), 0.0), split_(static_cast<std::size_t>(n + 1), 0) {}

  int length() const noexcept { return n_; }

  double cost(int i, int j) const { return cost_(idx(i), idx(j)); }
  int split(int i, int j) const { return split_(idx(i), idx(j)); }
  void set(int i, int j, double cost, int split) {
    cost_(idx(i), idx(j)) = cost;
    split_(idx(i), idx(j)) = split;
  }

 private:
  int n_ = 0;
  SquareMatrix<double> cost_;
  SquareMatrix<int> split_;

  static std::size_t idx(int i) noexcept { return static_cast<std::size_t>(i); }
};

struct CkyResult {
  BinaryTree tree;
  ScoreChart chart;
};

/// Minimum-cost binary tree over n words. `comp` is called exactly once per
/// span of length >= 2; ties in the split choice go to the smallest k.
template <SpanCost F>
CkyResult cky_parse(F&& comp, int n) {
  if (n < 1) throw data_error("empty_sentence", "cannot parse zero words");
  ScoreChart chart(n);
  for (int len = 2; len <= n; ++len) {
    for (int i = 1; i + len - 1 <= n; ++i) {
      const int j = i + len - 1;
      const double own = static_cast<double>(std::invoke(comp, Span{i, j}));
      double best = std::numeric_limits<double>::infinity();
      int best_k = i;
      for (int k = i; k < j; ++k) {
        const double v = chart.cost(i, k) + chart.cost(k + 1, j);
        if (v < best) {
          best = v;
          best_k = k;
        }
      }
      chart.set(i, j, own + best, best_k);
    }
  }
  BinaryTree tree = BinaryTree::from_splits(1, n, [&](int i, int j) { return chart.split(i, j); });
  return CkyResult{std::move(tree), std::move(chart)};
}

/// Converts the chart's best tree over (s, e) into syntactic distances: the
/// gap at each node's split point gets that node's chart cost.
inline DistanceVector c2d(const ScoreChart& chart, int s, int e) {
  if (s < 1 || e > chart.length() || s > e) {
    throw data_error("bad_chart", "span " + to_string(Span{s, e}) + " is outside the chart");
  }
  std::vector<double> out(static_cast<std::size_t>(e - s));
  std::function<void(int, int)> fill = [&](int i, int j) {
    if (i == j) return;
    const int p = chart.split(i, j);
    if (p < i || p >= j) {
      throw data_error("bad_chart", "split " + std::to_string(p) + " of span " + to_string(Span{i, j}) + " is out of range");
    }
    fill(i, p);
    out[static_cast<std::size_t>(p - s)] = chart.cost(i, j);
    fill(p + 1, j);
  };
  fill(s, e);
  return DistanceVector(std::move(out));
}

inline DistanceVector c2d(const ScoreChart& chart) { return c2d(chart, 1, chart.length()); }

/// D(x, y) = f(row_x, row_y) for all word pairs (0-based indices).
inline SquareMatrix<double> pairwise_matrix(const SquareMatrix<double>& rows, Metric metric) {
  const std::size_t n = rows.size();
  SquareMatrix<double> d(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const double v = kernels::evaluate(metric, rows.row(x), rows.row(y));
      d(x, y) = v;
      d(y, x) = v;
    }
  }
  return d;
}

inline SquareMatrix<double> pairwise_matrix(const AttentionTensor& t, const HeadId& head, Metric metric) {
  if (!is_distribution_metric(metric)) {
    throw usage_error("metric_mismatch", "chart scores compare attention rows; use jsd or hel");
  }
  return pairwise_matrix(t.head_matrix(head), metric);
}

/// Mean of D over all unordered word pairs inside the span (direct loop).
inline double pair_score(const SquareMatrix<double>& d, const Span& span) {
  if (span.length() < 2) return 0.0;
  double sum = 0.0;
  for (int x = span.start; x <= span.end; ++x) {
    for (int y = x + 1; y <= span.end; ++y) sum += d(static_cast<std::size_t>(x - 1), static_cast<std::size_t>(y - 1));
  }
  const double len = span.length();
  return sum / (len * (len - 1.0) / 2.0);
}

/// Pair score from 2-D prefix sums of D: O(n^2) setup, O(1) per span.
class PairScorer {
 public:
  explicit PairScorer(const SquareMatrix<double>& d) : n_(d.size()), prefix_(d.size() + 1, 0.0) {
    for (std::size_t x = 0; x < n_; ++x) {
      for (std::size_t y = 0; y < n_; ++y) {
        prefix_(x + 1, y + 1) = d(x, y) + prefix_(x, y + 1) + prefix_(x + 1, y) - prefix_(x, y);
      }
    }
  }

  double operator()(const Span& span) const {
    if (span.length() < 2) return 0.0;
    const std::size_t a = static_cast<std::size_t>(span.start - 1);
    const std::size_t b = static_cast<std::size_t>(span.end);
    const double block = prefix_(b, b) - prefix_(a, b) - prefix_(b, a) + prefix_(a, a);
    const double len = span.length();
    return std::max(0.0, 0.5 * block / (len * (len - 1.0) / 2.0));
  }

 private:
  std::size_t n_;
  SquareMatrix<double> prefix_;
};

/// Mean distance from each row in the span to the span's mean row (direct).
inline double characteristic_score(const SquareMatrix<double>& rows, Metric metric, const Span& span) {
  if (span.length() < 2) return 0.0;
  const std::size_t n = rows.size();
  std::vector<double> c(n, 0.0);
  for (int x = span.start; x <= span.end; ++x) {
    std::span<const double> r = rows.row(static_cast<std::size_t>(x - 1));
    for (std::size_t k = 0; k < n; ++k) c[k] += r[k];
  }
  for (double& v : c) v /= span.length();
  double sum = 0.0;
  for (int x = span.start; x <= span.end; ++x) sum += kernels::evaluate(metric, rows.row(static_cast<std::size_t>(x - 1)), c);
  return sum / span.length();
}

inline double characteristic_score(const AttentionTensor& t, const HeadId& head, Metric metric, const Span& span) {
  if (!is_distribution_metric(metric)) {
    throw usage_error("metric_mismatch", "chart scores compare attention rows; use jsd or hel");
  }
  return characteristic_score(t.head_matrix(head), metric, span);
}

/// Characteristic score for every span, precomputed. The mean row of (i, j)
/// is row_i plus the running mean of (row_x - row_i), so a span of identical
/// rows has a mean that equals them exactly and scores exactly zero.
class CharacteristicScorer {
 public:
  CharacteristicScorer(const SquareMatrix<double>& rows, Metric metric) : n_(rows.size()), table_(rows.size(), 0.0) {
    if (!is_distribution_metric(metric)) {
      throw usage_error("metric_mismatch", "chart scores compare attention rows; use jsd or hel");
    }
    const std::size_t n = n_;
    // Per-entry terms reused by every span.
    std::vector<double> pre(n * n);
    for (std::size_t i = 0; i < n * n; ++i) {
      const double p = rows.data()[i];
      pre[i] = metric == Metric::jsd ? xlogx(p) : std::sqrt(p);
    }
    std::vector<double> acc(n), c(n), cterm(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> base = rows.row(i);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t j = i + 1; j < n; ++j) {
        std::span<const double> rj = rows.row(j);
        for (std::size_t k = 0; k < n; ++k) acc[k] += rj[k] - base[k];
        const double len = static_cast<double>(j - i + 1);
        for (std::size_t k = 0; k < n; ++k) {
          c[k] = std::max(0.0, base[k] + acc[k] / len);
          cterm[k] = metric == Metric::jsd ? xlogx(c[k]) : std::sqrt(c[k]);
        }
        double total = 0.0;
        for (std::size_t x = i; x <= j; ++x) {
          std::span<const double> rx = rows.row(x);
          const double* px = pre.data() + x * n;
          total += metric == Metric::jsd ? jsd_to(rx, px, c, cterm) : hel_to(px, cterm);
        }
        table_(i, j) = total / len;
      }
    }
  }

  double operator()(const Span& span) const {
    return table_(static_cast<std::size_t>(span.start - 1), static_cast<std::size_t>(span.end - 1));
  }

 private:
  std::size_t n_;
  SquareMatrix<double> table_;

  static double xlogx(double v) noexcept { return v > 0.0 ? v * std::log(v) : 0.0; }

  // JS divergence as 1/2 (p log p + c log c) - m log m, summed per entry.
  static double jsd_to(std::span<const double> p, const double* plogp, const std::vector<double>& c,
                       const std::vector<double>& clogc) noexcept {
    double div = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] == c[k]) continue;
      const double m = 0.5 * (p[k] + c[k]);
      div += 0.5 * (plogp[k] + clogc[k]) - xlogx(m);
    }
    return std::sqrt(std::max(div, 0.0));
  }

  static double hel_to(const double* sqrt_p, const std::vector<double>& sqrt_c) noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < sqrt_c.size(); ++k) {
      const double d = sqrt_p[k] - sqrt_c[k];
      acc += d * d;
    }
    return std::sqrt(acc) / std::numbers::sqrt2;
  }
};

}  // namespace attnparse
