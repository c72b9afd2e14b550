#pragma once

// Overlap of top-K head sets across rankings (typically one per language).

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "attnparse/core.hpp"
#include "attnparse/ensemble.hpp"

namespace attnparse {

inline double jaccard(const std::set<HeadId>& a, const std::set<HeadId>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (const HeadId& h : a) common += b.count(h);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

struct OverlapReport {
  int k = 0;
  int layers = 0;
  int heads = 0;
  std::vector<std::string> names;
  std::vector<std::set<HeadId>> top_sets;
  std::vector<std::vector<double>> jaccard;
  /// Names of the rankings that select each head, for heads selected at all.
  std::map<HeadId, std::vector<std::string>> membership;
  /// Heads in every ranking's top K.
  std::vector<HeadId> universal;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["k"] = k;
    j["layers"] = layers;
    j["heads"] = heads;
    j["rankings"] = names;
    j["jaccard"] = jaccard;
    j["universal"] = nlohmann::json::array();
    for (const HeadId& h : universal) j["universal"].push_back({{"layer", h.layer}, {"head", h.head}});
    j["membership"] = nlohmann::json::array();
    for (const auto& [h, who] : membership) {
      j["membership"].push_back({{"layer", h.layer}, {"head", h.head}, {"count", who.size()}, {"rankings", who}});
    }
    return j;
  }

  /// One row per (layer, head) cell of the grid, a 0/1 column per ranking.
  std::string to_csv() const {
    std::string out = "layer,head";
    for (const std::string& n : names) out += "," + n;
    out += ",count\n";
    for (int l = 1; l <= layers; ++l) {
      for (int h = 1; h <= heads + 1; ++h) {
        const HeadId id{l, h};
        out += std::to_string(l) + "," + std::to_string(h);
        int count = 0;
        for (const auto& s : top_sets) {
          const bool in = s.count(id) > 0;
          count += in ? 1 : 0;
          out += in ? ",1" : ",0";
        }
        out += "," + std::to_string(count) + "\n";
      }
    }
    return out;
  }
};

/// Compares the top-K head sets of several rankings. `names` labels each
/// ranking in the report. All rankings must come from the same model shape.
inline OverlapReport head_overlap(std::span<const HeadRanking> rankings, std::span<const std::string> names, int k) {
  if (rankings.empty()) throw usage_error("no_rankings", "head overlap needs at least one ranking");
  if (names.size() != rankings.size()) throw usage_error("no_rankings", "one name per ranking is required");
  OverlapReport r;
  r.k = k;
  r.layers = rankings.front().metadata.layers;
  r.heads = rankings.front().metadata.heads;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const HeadRanking& ranking = rankings[i];
    if (ranking.metadata.layers != r.layers || ranking.metadata.heads != r.heads) {
      throw data_error("incompatible_shapes", names[i] + " comes from a model with a different layer/head shape");
    }
    if (k < 1 || static_cast<std::size_t>(k) > ranking.entries.size()) {
      throw usage_error("k_out_of_range", "K=" + std::to_string(k) + " exceeds the " +
                                              std::to_string(ranking.entries.size()) + " heads ranked in " + names[i]);
    }
    std::set<HeadId> top;
    for (int e = 0; e < k; ++e) top.insert(ranking.entries[static_cast<std::size_t>(e)].head);
    for (const HeadId& h : top) r.membership[h].push_back(names[i]);
    r.top_sets.push_back(std::move(top));
    r.names.push_back(names[i]);
  }
  const std::size_t m = r.top_sets.size();
  r.jaccard.assign(m, std::vector<double>(m, 1.0));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const double v = jaccard(r.top_sets[a], r.top_sets[b]);
      r.jaccard[a][b] = v;
      r.jaccard[b][a] = v;
    }
  }
  for (const auto& [h, who] : r.membership) {
    if (who.size() == m) r.universal.push_back(h);
  }
  return r;
}

}  // namespace attnparse
