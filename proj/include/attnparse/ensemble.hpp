#pragma once

// Single-head parsing with each method, validation ranking of heads, and the
// top-K ensemble that averages the heads' syntactic distance vectors.

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attnparse/attention_io.hpp"
#include "attnparse/chart.hpp"
#include "attnparse/core.hpp"
#include "attnparse/distances.hpp"
#include "attnparse/evaluation.hpp"
#include "attnparse/parallel.hpp"
#include "attnparse/topdown.hpp"

namespace attnparse {

/// td: top-down split on adjacent distances; cp: CKY with the pair score;
/// cc: CKY with the characteristic score.
enum class Method { td, cp, cc };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::td: return "td";
    case Method::cp: return "cp";
    case Method::cc: return "cc";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  if (name == "td" || name == "TD") return Method::td;
  if (name == "cp" || name == "CP") return Method::cp;
  if (name == "cc" || name == "CC") return Method::cc;
  throw usage_error("unknown_method", "unknown method '" + std::string(name) + "'");
}

namespace detail {

inline CkyResult chart_parse(const AttentionTensor& t, const HeadId& head, Method method, Metric metric) {
  if (!is_distribution_metric(metric)) {
    throw usage_error("metric_mismatch", "chart scores compare attention rows; use jsd or hel");
  }
  const SquareMatrix<double> rows = t.head_matrix(head);
  if (method == Method::cp) {
    const PairScorer scorer(pairwise_matrix(rows, metric));
    return cky_parse(scorer, t.length());
  }
  const CharacteristicScorer scorer(rows, metric);
  return cky_parse(scorer, t.length());
}

}  // namespace detail

/// Syntactic distances implied by one head: adjacent-row distances for td,
/// the distances of the CKY chart for cp and cc.
inline DistanceVector head_distances(const AttentionTensor& t, const HeadId& head, Method method, Metric metric) {
  t.check_head(head);
  if (method == Method::td) return compute_distances(t, head, metric);
  if (t.length() == 1) return DistanceVector{};
  return c2d(detail::chart_parse(t, head, method, metric).chart);
}

/// Tree from a single head.
inline BinaryTree parse_with_head(const AttentionTensor& t, const HeadId& head, Method method, Metric metric) {
  t.check_head(head);
  if (method == Method::td) return d2t(t.length(), compute_distances(t, head, metric).values());
  return detail::chart_parse(t, head, method, metric).tree;
}

struct RankedHead {
  HeadId head;
  double f1 = 0.0;

  friend bool operator==(const RankedHead&, const RankedHead&) = default;
};

struct RankingMetadata {
  std::string validation_corpus;
  std::string model;
  std::string language;
  std::string date;
  int layers = 0;
  int heads = 0;
  std::size_t sentences = 0;

  friend bool operator==(const RankingMetadata&, const RankingMetadata&) = default;
};

/// Heads sorted by validation F1 (a fraction in [0, 1]), best first; equal
/// scores are ordered by (layer, head).
struct HeadRanking {
  Method method = Method::td;
  Metric metric = Metric::jsd;
  std::vector<RankedHead> entries;
  RankingMetadata metadata;
  /// Best validation F1 per metric tried, when several were searched.
  std::map<std::string, double> metric_search;
  /// Validation corpus F1 (percent) per ensemble size, when a K grid was run.
  std::map<int, double> k_grid;
  std::optional<int> recommended_k;

  void validate() const {
    std::set<HeadId> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const RankedHead& e = entries[i];
      if (!(e.f1 >= 0.0 && e.f1 <= 1.0)) throw data_error("bad_ranking", "F1 of " + to_string(e.head) + " is outside [0, 1]");
      if (!seen.insert(e.head).second) throw data_error("bad_ranking", "duplicate head " + to_string(e.head));
      if (i > 0 && entries[i - 1].f1 < e.f1) throw data_error("bad_ranking", "entries are not sorted by F1");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["method"] = std::string(to_string(method));
    j["metric"] = std::string(to_string(metric));
    j["entries"] = nlohmann::json::array();
    for (const RankedHead& e : entries) j["entries"].push_back({{"layer", e.head.layer}, {"head", e.head.head}, {"f1", e.f1}});
    j["metadata"] = {{"validation_corpus", metadata.validation_corpus},
                     {"model", metadata.model},
                     {"language", metadata.language},
                     {"date", metadata.date},
                     {"layers", metadata.layers},
                     {"heads", metadata.heads},
                     {"sentences", metadata.sentences}};
    if (!metric_search.empty()) j["metric_search"] = metric_search;
    if (!k_grid.empty()) {
      nlohmann::json grid = nlohmann::json::object();
      for (const auto& [k, f1] : k_grid) grid[std::to_string(k)] = f1;
      j["k_grid"] = grid;
    }
    if (recommended_k) j["recommended_k"] = *recommended_k;
    return j;
  }

  static HeadRanking from_json(const nlohmann::json& j) {
    HeadRanking r;
    try {
      r.method = parse_method(j.at("method").get<std::string>());
      r.metric = parse_metric(j.at("metric").get<std::string>());
      for (const nlohmann::json& e : j.at("entries")) {
        r.entries.push_back(RankedHead{HeadId{e.at("layer").get<int>(), e.at("head").get<int>()}, e.at("f1").get<double>()});
      }
      if (j.contains("metadata")) {
        const nlohmann::json& m = j.at("metadata");
        r.metadata.validation_corpus = m.value("validation_corpus", std::string{});
        r.metadata.model = m.value("model", std::string{});
        r.metadata.language = m.value("language", std::string{});
        r.metadata.date = m.value("date", std::string{});
        r.metadata.layers = m.value("layers", 0);
        r.metadata.heads = m.value("heads", 0);
        r.metadata.sentences = m.value("sentences", std::size_t{0});
      }
      if (j.contains("metric_search")) r.metric_search = j.at("metric_search").get<std::map<std::string, double>>();
      if (j.contains("k_grid")) {
        for (auto it = j.at("k_grid").begin(); it != j.at("k_grid").end(); ++it) {
          r.k_grid[std::stoi(it.key())] = it.value().get<double>();
        }
      }
      if (j.contains("recommended_k")) r.recommended_k = j.at("recommended_k").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw data_error("bad_ranking", std::string("malformed head ranking: ") + e.what());
    }
    r.validate();
    return r;
  }

  friend bool operator==(const HeadRanking&, const HeadRanking&) = default;
};

namespace detail {

inline void check_aligned(const AttentionCorpus& corpus, std::span<const GoldTree> gold) {
  if (corpus.sentences.size() != gold.size()) {
    throw data_error("misaligned", "attention corpus has " + std::to_string(corpus.sentences.size()) +
                                       " sentences but the gold corpus has " + std::to_string(gold.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (corpus.sentences[i].tensor.length() != gold[i].size()) {
      throw data_error("misaligned", "sentence " + std::to_string(i + 1) + " has " +
                                         std::to_string(corpus.sentences[i].tensor.length()) + " words in the attention file but " +
                                         std::to_string(gold[i].size()) + " in the gold tree");
    }
  }
}

inline void sort_entries(std::vector<RankedHead>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const RankedHead& a, const RankedHead& b) {
    if (a.f1 != b.f1) return a.f1 > b.f1;
    return a.head < b.head;
  });
}

}  // namespace detail

/// Scores every head (including layer averages) on a validation corpus with
/// the given method and metric.
inline HeadRanking rank_heads(const AttentionCorpus& corpus, std::span<const GoldTree> gold, Method method, Metric metric,
                              unsigned threads = 1) {
  if (!is_distribution_metric(metric)) {
    throw usage_error("metric_mismatch", "heads are ranked with attention metrics (jsd or hel)");
  }
  if (corpus.sentences.empty()) throw data_error("empty_corpus", "cannot rank heads on an empty corpus");
  detail::check_aligned(corpus, gold);

  const std::vector<HeadId> heads = all_heads(corpus.sentences.front().tensor);
  const std::size_t S = corpus.sentences.size();
  std::vector<SpanSet> gold_spans(S);
  for (std::size_t s = 0; s < S; ++s) gold_spans[s] = tree_to_spans(gold[s], false);

  std::vector<double> scores(heads.size() * S);
  parallel_for(scores.size(), threads, [&](std::size_t task) {
    const std::size_t h = task / S;
    const std::size_t s = task % S;
    const BinaryTree tree = parse_with_head(corpus.sentences[s].tensor, heads[h], method, metric);
    scores[task] = sentence_f1(tree_to_spans(tree, false), gold_spans[s]);
  });

  HeadRanking ranking;
  ranking.method = method;
  ranking.metric = metric;
  for (std::size_t h = 0; h < heads.size(); ++h) {
    double sum = 0.0;
    for (std::size_t s = 0; s < S; ++s) sum += scores[h * S + s];
    ranking.entries.push_back(RankedHead{heads[h], std::clamp(sum / static_cast<double>(S), 0.0, 1.0)});
  }
  detail::sort_entries(ranking.entries);
  ranking.metadata.model = corpus.manifest.model;
  ranking.metadata.language = corpus.manifest.language;
  ranking.metadata.layers = corpus.manifest.layers;
  ranking.metadata.heads = corpus.manifest.heads;
  ranking.metadata.sentences = S;
  return ranking;
}

/// Ranks with each metric and keeps the ranking whose best head scores
/// highest; earlier metrics win ties.
inline HeadRanking rank_heads_best_metric(const AttentionCorpus& corpus, std::span<const GoldTree> gold, Method method,
                                          std::span<const Metric> metrics, unsigned threads = 1) {
  if (metrics.empty()) throw usage_error("unknown_metric", "no metric to rank with");
  std::optional<HeadRanking> best;
  std::map<std::string, double> search;
  for (Metric m : metrics) {
    HeadRanking r = rank_heads(corpus, gold, method, m, threads);
    const double top = r.entries.empty() ? 0.0 : r.entries.front().f1;
    search[std::string(to_string(m))] = top;
    if (!best || top > best->entries.front().f1) best = std::move(r);
  }
  if (metrics.size() > 1) best->metric_search = std::move(search);
  return std::move(*best);
}

struct EnsembleOptions {
  /// Rescale each head's distance vector to [0, 1] per sentence before
  /// averaging. Off by default.
  bool normalize = false;
  /// Overrides the ranking's method when set.
  std::optional<Method> method;
};

/// Averages the distance vectors of the top-K heads and rebuilds one tree.
/// Heads are summed in (layer, head) order so the result does not depend on
/// their order in the ranking.
inline BinaryTree ensemble_parse(const AttentionTensor& t, const HeadRanking& ranking, int k, const EnsembleOptions& opts = {}) {
  if (k < 1 || static_cast<std::size_t>(k) > ranking.entries.size()) {
    throw usage_error("k_out_of_range", "K=" + std::to_string(k) + " must lie in [1, " +
                                            std::to_string(ranking.entries.size()) + "]");
  }
  if (t.length() == 1) return BinaryTree::leaf(1);
  std::vector<HeadId> top;
  for (int i = 0; i < k; ++i) top.push_back(ranking.entries[static_cast<std::size_t>(i)].head);
  std::sort(top.begin(), top.end());

  const Method method = opts.method.value_or(ranking.method);
  std::vector<double> sum(static_cast<std::size_t>(t.length() - 1), 0.0);
  for (const HeadId& h : top) {
    std::vector<double> d = head_distances(t, h, method, ranking.metric).values();
    if (opts.normalize) {
      const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
      const double low = *lo;
      const double range = *hi - *lo;
      for (double& v : d) v = range > 0.0 ? (v - low) / range : 0.0;
    }
    for (std::size_t i = 0; i < d.size(); ++i) sum[i] += d[i];
  }
  for (double& v : sum) v /= static_cast<double>(k);
  return d2t(t.length(), sum);
}

inline std::vector<BinaryTree> parse_corpus(const AttentionCorpus& corpus, const HeadRanking& ranking, int k,
                                            const EnsembleOptions& opts = {}, unsigned threads = 1) {
  std::vector<BinaryTree> out(corpus.sentences.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    try {
      out[i] = ensemble_parse(corpus.sentences[i].tensor, ranking, k, opts);
    } catch (const Error& e) {
      throw Error(e.category(), e.code(), "sentence " + std::to_string(i + 1) + ": " + e.what());
    }
  });
  return out;
}

/// Validation F1 (percent) of the ensemble for each K in `grid` that the
/// ranking can supply. Records the grid and the best K (smallest on ties)
/// in the ranking.
inline void select_k(HeadRanking& ranking, const AttentionCorpus& corpus, std::span<const GoldTree> gold,
                     std::span<const int> grid, const EnsembleOptions& opts = {}, unsigned threads = 1) {
  detail::check_aligned(corpus, gold);
  ranking.k_grid.clear();
  ranking.recommended_k.reset();
  double best = -1.0;
  for (int k : grid) {
    if (k < 1 || static_cast<std::size_t>(k) > ranking.entries.size()) continue;
    const std::vector<BinaryTree> preds = parse_corpus(corpus, ranking, k, opts, threads);
    const double f1 = corpus_f1(std::span<const BinaryTree>(preds), gold);
    ranking.k_grid[k] = f1;
    if (f1 > best || (f1 == best && k < *ranking.recommended_k)) {
      best = f1;
      ranking.recommended_k = k;
    }
  }
}

}  // namespace attnparse
