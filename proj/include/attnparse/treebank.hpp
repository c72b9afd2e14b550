#pragma once

// Bracketed (PTB-style) tree reading and writing, and punctuation removal.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "attnparse/core.hpp"
#include "attnparse/error.hpp"

namespace attnparse {

/// Tags removed by strip_punctuation unless the caller supplies its own set.
inline const std::set<std::string>& default_punctuation_tags() {
  static const std::set<std::string> tags{",", ".", ":", "``", "''", "-LRB-", "-RRB-", "PU", "PUNC"};
  return tags;
}

namespace detail {

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : text_(text) {}

  GoldTree parse() {
    skip_space();
    if (pos_ >= text_.size()) fail("empty input");
    if (text_[pos_] != '(') fail("expected '('");
    GoldNode root = node();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected text after the closing bracket of the tree");
    return GoldTree{std::move(root)};
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw data_error("parse_error", what + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string token() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  // Called with pos_ at '('.
  GoldNode node() {
    const std::size_t open = pos_;
    ++pos_;
    skip_space();
    GoldNode out;
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') out.label = token();
    std::vector<GoldNode> children;
    std::vector<std::string> bare;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) {
        fail("missing ')' for the bracket opened at offset " + std::to_string(open));
      }
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        children.push_back(node());
      } else {
        GoldNode leaf;
        leaf.word = token();
        children.push_back(std::move(leaf));
        bare.push_back(children.back().word);
      }
    }
    if (children.empty()) {
      pos_ = open;
      fail("empty node");
    }
    // "(TAG word)" is a preterminal leaf.
    if (children.size() == 1 && bare.size() == 1) {
      out.word = children.front().word;
      return out;
    }
    out.children = std::move(children);
    return out;
  }
};

inline std::string escape_word(std::string_view word) {
  if (word == "(") return "-LRB-";
  if (word == ")") return "-RRB-";
  std::string out;
  for (char c : word) {
    if (c == '(') {
      out += "-LRB-";
    } else if (c == ')') {
      out += "-RRB-";
    } else {
      out += c;
    }
  }
  return out;
}

inline bool strip_node(GoldNode& node, const std::set<std::string>& tags) {
  if (node.is_leaf()) return tags.count(node.label) == 0;
  std::vector<GoldNode> kept;
  for (GoldNode& c : node.children) {
    if (strip_node(c, tags)) kept.push_back(std::move(c));
  }
  node.children = std::move(kept);
  return !node.children.empty();
}

inline void write_gold(const GoldNode& n, std::string& out) {
  if (n.is_leaf()) {
    if (n.label.empty()) {
      out += escape_word(n.word);
    } else {
      out += "(" + n.label + " " + escape_word(n.word) + ")";
    }
    return;
  }
  out += "(" + n.label;
  for (const GoldNode& c : n.children) {
    out += ' ';
    write_gold(c, out);
  }
  out += ')';
}

}  // namespace detail

/// Parses "(LABEL child ...)" where leaves are "(POS word)" or bare tokens.
/// Errors carry the character offset of the problem.
inline GoldTree parse_bracketed(std::string_view text) { return detail::BracketParser(text).parse(); }

/// Removes leaves whose tag is in `tags` and any internal node left without
/// children. Unary chains are kept.
inline GoldTree strip_punctuation(const GoldTree& tree, const std::set<std::string>& tags = default_punctuation_tags()) {
  GoldTree out = tree;
  if (!detail::strip_node(out.root, tags)) {
    throw data_error("empty_sentence", "every word of the sentence was removed as punctuation");
  }
  return out;
}

/// Bracketed form of a predicted tree with placeholder label X on every
/// internal node, e.g. "(X (X a b) c)". Parentheses inside words are written
/// as -LRB- / -RRB-.
inline std::string write_tree(const BinaryTree& tree, const std::vector<std::string>& words) {
  if (static_cast<std::size_t>(tree.size()) != words.size()) {
    throw data_error("length_mismatch", "tree has " + std::to_string(tree.size()) + " leaves but " +
                                            std::to_string(words.size()) + " words were given");
  }
  const int base = tree.root().span.start;
  if (tree.size() == 1) return "(X " + detail::escape_word(words.front()) + ")";
  std::string out;
  auto write = [&](auto&& self, int index) -> void {
    const BinaryTree::Node& n = tree.node(index);
    if (n.is_leaf()) {
      out += detail::escape_word(words[static_cast<std::size_t>(n.span.start - base)]);
      return;
    }
    out += "(X ";
    self(self, n.left);
    out += ' ';
    self(self, n.right);
    out += ')';
  };
  write(write, static_cast<int>(tree.nodes().size()) - 1);
  return out;
}

inline std::string write_gold_tree(const GoldTree& tree) {
  std::string out;
  detail::write_gold(tree.root, out);
  return out;
}

/// One tree per line; blank lines are skipped. Errors name the line.
inline std::vector<GoldTree> parse_tree_lines(std::istream& in, const std::string& source = "input") {
  std::vector<GoldTree> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_bracketed(line));
    } catch (const Error& e) {
      throw Error(e.category(), e.code(), source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<GoldTree> read_trees(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  return parse_tree_lines(in, path.string());
}

inline void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  for (const std::string& l : lines) out << l << '\n';
  if (!out) throw io_error("failed writing " + path.string());
}

}  // namespace attnparse
