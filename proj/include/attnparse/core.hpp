#pragma once

// Domain types shared across the library. Word positions are 1-based
// everywhere: a sentence of n words has positions 1..n and a span (i, j)
// covers words i through j inclusive.

#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attnparse/error.hpp"

namespace attnparse {

class Sentence {
 public:
  Sentence() = default;
  explicit Sentence(std::vector<std::string> words) : words_(std::move(words)) {
    if (words_.empty()) throw data_error("empty_sentence", "sentence must contain at least one word");
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i].empty()) {
        throw data_error("empty_word", "word " + std::to_string(i + 1) + " is empty");
      }
    }
  }

  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  /// 1-based access.
  const std::string& word(int position) const { return words_.at(static_cast<std::size_t>(position - 1)); }

 private:
  std::vector<std::string> words_;
};

struct Span {
  int start = 1;
  int end = 1;

  int length() const noexcept { return end - start + 1; }
  friend auto operator<=>(const Span&, const Span&) = default;
};

using SpanSet = std::set<Span>;

inline std::string to_string(const Span& s) {
  return "(" + std::to_string(s.start) + "," + std::to_string(s.end) + ")";
}

/// Binary tree over contiguous word positions. Nodes live in a post-order
/// arena so the root is always the last node; a leaf has no children and a
/// span of length one.
class BinaryTree {
 public:
  struct Node {
    int left = -1;
    int right = -1;
    Span span;

    bool is_leaf() const noexcept { return left < 0; }
  };

  static BinaryTree leaf(int position) {
    BinaryTree t;
    t.nodes_.push_back(Node{-1, -1, Span{position, position}});
    return t;
  }

  /// Joins two adjacent subtrees under a new root.
  static BinaryTree join(const BinaryTree& left, const BinaryTree& right) {
    if (left.nodes_.empty() || right.nodes_.empty() ||
        left.root().span.end + 1 != right.root().span.start) {
      throw data_error("bad_tree", "joined subtrees must cover adjacent word ranges");
    }
    BinaryTree t;
    t.nodes_ = left.nodes_;
    const int offset = static_cast<int>(left.nodes_.size());
    for (Node n : right.nodes_) {
      if (!n.is_leaf()) {
        n.left += offset;
        n.right += offset;
      }
      t.nodes_.push_back(n);
    }
    t.nodes_.push_back(Node{offset - 1, static_cast<int>(t.nodes_.size()) - 1,
                            Span{left.root().span.start, right.root().span.end}});
    return t;
  }

  /// Builds the tree over [first, last] top-down; `split(i, j)` returns the
  /// last position k of the left child of span (i, j), with i <= k < j.
  template <typename SplitFn>
  static BinaryTree from_splits(int first, int last, SplitFn&& split) {
    if (first > last) throw data_error("bad_tree", "empty word range");
    BinaryTree t;
    t.nodes_.reserve(static_cast<std::size_t>(2 * (last - first) + 1));
    t.build(first, last, split);
    return t;
  }

  const Node& root() const { return nodes_.back(); }
  const Node& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
  std::span<const Node> nodes() const noexcept { return nodes_; }

  /// Number of leaves.
  int size() const noexcept { return nodes_.empty() ? 0 : root().span.length(); }

  /// Shape notation with word positions, e.g. "((1 2) 3)".
  std::string to_string() const {
    std::string out;
    if (!nodes_.empty()) write(static_cast<int>(nodes_.size()) - 1, out);
    return out;
  }

  /// Parses the shape notation produced by to_string().
  static BinaryTree from_string(std::string_view text) {
    std::size_t pos = 0;
    BinaryTree t = parse_shape(text, pos);
    skip_space(text, pos);
    if (pos != text.size()) throw data_error("parse_error", "trailing characters in tree shape");
    return t;
  }

  friend bool operator==(const BinaryTree& a, const BinaryTree& b) {
    if (a.nodes_.size() != b.nodes_.size()) return false;
    if (a.nodes_.empty()) return true;
    return same_shape(a, static_cast<int>(a.nodes_.size()) - 1, b, static_cast<int>(b.nodes_.size()) - 1);
  }

 private:
  std::vector<Node> nodes_;

  template <typename SplitFn>
  int build(int i, int j, SplitFn& split) {
    if (i == j) {
      nodes_.push_back(Node{-1, -1, Span{i, i}});
      return static_cast<int>(nodes_.size()) - 1;
    }
    const int k = split(i, j);
    if (k < i || k >= j) {
      throw data_error("bad_split", "split point " + std::to_string(k) + " outside span " +
                                        attnparse::to_string(Span{i, j}));
    }
    const int l = build(i, k, split);
    const int r = build(k + 1, j, split);
    nodes_.push_back(Node{l, r, Span{i, j}});
    return static_cast<int>(nodes_.size()) - 1;
  }

  void write(int index, std::string& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(index)];
    if (n.is_leaf()) {
      out += std::to_string(n.span.start);
      return;
    }
    out += '(';
    write(n.left, out);
    out += ' ';
    write(n.right, out);
    out += ')';
  }

  static bool same_shape(const BinaryTree& a, int ia, const BinaryTree& b, int ib) {
    const Node& x = a.nodes_[static_cast<std::size_t>(ia)];
    const Node& y = b.nodes_[static_cast<std::size_t>(ib)];
    if (x.span != y.span || x.is_leaf() != y.is_leaf()) return false;
    if (x.is_leaf()) return true;
    return same_shape(a, x.left, b, y.left) && same_shape(a, x.right, b, y.right);
  }

  static void skip_space(std::string_view s, std::size_t& pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n')) ++pos;
  }

  static BinaryTree parse_shape(std::string_view s, std::size_t& pos) {
    skip_space(s, pos);
    if (pos >= s.size()) throw data_error("parse_error", "unexpected end of tree shape");
    if (s[pos] == '(') {
      ++pos;
      BinaryTree l = parse_shape(s, pos);
      BinaryTree r = parse_shape(s, pos);
      skip_space(s, pos);
      if (pos >= s.size() || s[pos] != ')') {
        throw data_error("parse_error", "expected ')' at offset " + std::to_string(pos));
      }
      ++pos;
      return join(l, r);
    }
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (start == pos) throw data_error("parse_error", "expected word position at offset " + std::to_string(start));
    return leaf(std::stoi(std::string(s.substr(start, pos - start))));
  }
};

/// Labeled n-ary reference tree. A leaf carries its part-of-speech tag in
/// `label` and the token in `word`; internal nodes carry constituent labels.
struct GoldNode {
  std::string label;
  std::string word;
  std::vector<GoldNode> children;

  bool is_leaf() const noexcept { return children.empty(); }
  friend bool operator==(const GoldNode&, const GoldNode&) = default;
};

struct GoldTree {
  GoldNode root;

  int size() const { return count_leaves(root); }

  std::vector<std::string> words() const {
    std::vector<std::string> out;
    collect(root, [&](const GoldNode& n) { out.push_back(n.word); });
    return out;
  }

  std::vector<std::string> tags() const {
    std::vector<std::string> out;
    collect(root, [&](const GoldNode& n) { out.push_back(n.label); });
    return out;
  }

  friend bool operator==(const GoldTree&, const GoldTree&) = default;

 private:
  static int count_leaves(const GoldNode& n) {
    if (n.is_leaf()) return 1;
    int total = 0;
    for (const GoldNode& c : n.children) total += count_leaves(c);
    return total;
  }

  template <typename F>
  static void collect(const GoldNode& n, F&& f) {
    if (n.is_leaf()) {
      f(n);
      return;
    }
    for (const GoldNode& c : n.children) collect(c, f);
  }
};

namespace detail {

inline bool keep_span(const Span& s, int n, bool include_trivial) {
  return include_trivial || (s.length() > 1 && !(s.start == 1 && s.end == n));
}

// Returns the span of `node` and records spans of internal nodes.
template <typename Visit>
Span gold_spans(const GoldNode& node, int& next, Visit& visit) {
  if (node.is_leaf()) {
    const int p = next++;
    return Span{p, p};
  }
  Span s{next, next};
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    Span c = gold_spans(node.children[i], next, visit);
    if (i == 0) s.start = c.start;
    s.end = c.end;
  }
  visit(node, s);
  return s;
}

}  // namespace detail

/// Spans of internal nodes. Without `include_trivial`, the whole-sentence
/// span and single-word spans are dropped.
inline SpanSet tree_to_spans(const BinaryTree& tree, bool include_trivial) {
  SpanSet out;
  const int n = tree.size();
  for (const BinaryTree::Node& node : tree.nodes()) {
    if (!node.is_leaf() && detail::keep_span(node.span, n, include_trivial)) out.insert(node.span);
  }
  return out;
}

inline SpanSet tree_to_spans(const GoldTree& tree, bool include_trivial) {
  SpanSet out;
  const int n = tree.size();
  int next = 1;
  auto visit = [&](const GoldNode&, const Span& s) {
    if (detail::keep_span(s, n, include_trivial)) out.insert(s);
  };
  detail::gold_spans(tree.root, next, visit);
  return out;
}

/// (span, label) pairs of internal gold nodes.
inline std::set<std::pair<Span, std::string>> labeled_spans(const GoldTree& tree, bool include_trivial) {
  std::set<std::pair<Span, std::string>> out;
  const int n = tree.size();
  int next = 1;
  auto visit = [&](const GoldNode& node, const Span& s) {
    if (detail::keep_span(s, n, include_trivial)) out.emplace(s, node.label);
  };
  detail::gold_spans(tree.root, next, visit);
  return out;
}

/// Labeled copy of a binary tree; `label_of(span)` names each internal node
/// and `tag_of(position)` each leaf.
inline GoldTree to_gold_tree(const BinaryTree& tree, const std::vector<std::string>& words,
                             const std::function<std::string(const Span&)>& label_of,
                             const std::function<std::string(int)>& tag_of) {
  if (static_cast<std::size_t>(tree.size()) != words.size()) {
    throw data_error("length_mismatch", "tree has " + std::to_string(tree.size()) + " leaves but " +
                                            std::to_string(words.size()) + " words were given");
  }
  const int base = tree.root().span.start;
  std::function<GoldNode(int)> convert = [&](int index) {
    const BinaryTree::Node& n = tree.node(index);
    GoldNode g;
    if (n.is_leaf()) {
      g.label = tag_of(n.span.start);
      g.word = words[static_cast<std::size_t>(n.span.start - base)];
      return g;
    }
    g.label = label_of(n.span);
    g.children.push_back(convert(n.left));
    g.children.push_back(convert(n.right));
    return g;
  };
  return GoldTree{convert(static_cast<int>(tree.nodes().size()) - 1)};
}

/// Syntactic distances between adjacent words; entry i (0-based) separates
/// words i+1 and i+2. Entries are finite and non-negative.
class DistanceVector {
 public:
  DistanceVector() = default;
  explicit DistanceVector(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
        throw data_error("invalid_distance", "distance " + std::to_string(i + 1) + " is negative or not finite");
      }
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const DistanceVector&, const DistanceVector&) = default;

 private:
  std::vector<double> values_;
};

/// Attention head address, both indices 1-based. Head A+1 of a layer with A
/// real heads is the layer-average pseudo-head.
struct HeadId {
  int layer = 1;
  int head = 1;

  friend auto operator<=>(const HeadId&, const HeadId&) = default;
};

inline std::string to_string(const HeadId& h) {
  return "L" + std::to_string(h.layer) + "H" + std::to_string(h.head);
}

}  // namespace attnparse
