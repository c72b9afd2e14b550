#pragma once

// Distance functions between word representations. JSD and HEL compare
// attention distributions; COS, L1 and L2 compare hidden-state vectors.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attnparse/error.hpp"

namespace attnparse {

enum class Metric { jsd, hel, cos, l1, l2 };

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::jsd: return "jsd";
    case Metric::hel: return "hel";
    case Metric::cos: return "cos";
    case Metric::l1: return "l1";
    case Metric::l2: return "l2";
  }
  return "?";
}

inline Metric parse_metric(std::string_view name) {
  if (name == "jsd" || name == "JSD") return Metric::jsd;
  if (name == "hel" || name == "HEL") return Metric::hel;
  if (name == "cos" || name == "COS") return Metric::cos;
  if (name == "l1" || name == "L1") return Metric::l1;
  if (name == "l2" || name == "L2") return Metric::l2;
  throw usage_error("unknown_metric", "unknown metric '" + std::string(name) + "'");
}

/// True for metrics defined on probability distributions (JSD, HEL).
inline bool is_distribution_metric(Metric m) noexcept { return m == Metric::jsd || m == Metric::hel; }

namespace kernels {

/// Jensen-Shannon distance: square root of the JS divergence, natural log.
inline double jensen_shannon(std::span<const double> p, std::span<const double> q) noexcept {
  double div = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p[i];
    const double b = q[i];
    if (a == b) continue;
    const double m = 0.5 * (a + b);
    if (a > 0.0) div += 0.5 * a * std::log(a / m);
    if (b > 0.0) div += 0.5 * b * std::log(b / m);
  }
  return std::sqrt(std::max(div, 0.0));
}

inline double hellinger(std::span<const double> p, std::span<const double> q) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    acc += d * d;
  }
  return std::sqrt(acc) / std::numbers::sqrt2;
}

/// 1 - cosine similarity. A zero vector is at distance 1 from any nonzero
/// vector and 0 from another zero vector.
inline double cosine(std::span<const double> p, std::span<const double> q) noexcept {
  double dot = 0.0, np = 0.0, nq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dot += p[i] * q[i];
    np += p[i] * p[i];
    nq += q[i] * q[i];
  }
  if (np == 0.0 || nq == 0.0) return (np == nq) ? 0.0 : 1.0;
  const double sim = dot / (std::sqrt(np) * std::sqrt(nq));
  return std::clamp(1.0 - sim, 0.0, 2.0);
}

inline double l1(std::span<const double> p, std::span<const double> q) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return acc;
}

inline double l2(std::span<const double> p, std::span<const double> q) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

/// Dispatch without validation; callers guarantee equal lengths.
inline double evaluate(Metric m, std::span<const double> p, std::span<const double> q) noexcept {
  switch (m) {
    case Metric::jsd: return jensen_shannon(p, q);
    case Metric::hel: return hellinger(p, q);
    case Metric::cos: return cosine(p, q);
    case Metric::l1: return l1(p, q);
    case Metric::l2: return l2(p, q);
  }
  return 0.0;
}

}  // namespace kernels

/// A probability distribution: non-negative entries summing to 1 within 1e-5.
class ProbDist {
 public:
  static constexpr double kSumTolerance = 1e-5;

  explicit ProbDist(std::vector<double> values) : values_(std::move(values)) {
    double sum = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0) throw data_error("invalid_distribution", "negative or non-finite probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw data_error("invalid_distribution", "probabilities sum to " + std::to_string(sum));
    }
  }

  /// Rescales to unit mass. Sets `*rescaled` when the input was outside the
  /// sum tolerance.
  static ProbDist normalized(std::vector<double> values, bool* rescaled = nullptr) {
    double sum = 0.0;
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0) throw data_error("invalid_distribution", "negative or non-finite probability");
      sum += v;
    }
    if (sum <= 0.0) throw data_error("invalid_distribution", "distribution has zero mass");
    const bool off = std::abs(sum - 1.0) > kSumTolerance;
    if (off) {
      for (double& v : values) v /= sum;
    }
    if (rescaled != nullptr) *rescaled = off;
    return ProbDist(std::move(values));
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

class HiddenVector {
 public:
  explicit HiddenVector(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
      if (!std::isfinite(v)) throw data_error("invalid_hidden", "hidden vector has a non-finite entry");
    }
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

inline double distance(Metric m, const ProbDist& p, const ProbDist& q) {
  if (!is_distribution_metric(m)) {
    throw usage_error("metric_mismatch", std::string(to_string(m)) + " applies to hidden vectors, not distributions");
  }
  if (p.size() != q.size()) throw data_error("length_mismatch", "distributions differ in length");
  return kernels::evaluate(m, p.values(), q.values());
}

inline double distance(Metric m, const HiddenVector& p, const HiddenVector& q) {
  if (is_distribution_metric(m)) {
    throw usage_error("metric_mismatch", std::string(to_string(m)) + " applies to distributions, not hidden vectors");
  }
  if (p.size() != q.size()) throw data_error("length_mismatch", "hidden vectors differ in length");
  return kernels::evaluate(m, p.values(), q.values());
}

}  // namespace attnparse
