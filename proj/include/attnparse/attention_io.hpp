#pragma once

// Per-sentence attention tensors and their on-disk formats: the ATND binary
// container (see FORMAT.md) and a JSON debug format for hand-written fixtures.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attnparse/core.hpp"
#include "attnparse/error.hpp"
#include "attnparse/matrix.hpp"

namespace attnparse {

/// Attention of one sentence: [layers][head slots][n][n] float32, row r of a
/// head being the distribution of word r over the sentence. When
/// `has_average_head()` is set, slot A+1 of each layer holds the mean of the
/// A real heads. Optional hidden states are [layers][n][dim].
class AttentionTensor {
 public:
  static constexpr double kRowTolerance = 1e-4;

  AttentionTensor() = default;

  AttentionTensor(int layers, int heads, int length, std::vector<float> attention,
                  bool has_average_head = false, int hidden_dim = 0, std::vector<float> hidden = {})
      : layers_(layers),
        heads_(heads),
        length_(length),
        has_average_(has_average_head),
        hidden_dim_(hidden_dim),
        attention_(std::move(attention)),
        hidden_(std::move(hidden)) {
    if (layers_ < 1 || heads_ < 1 || length_ < 1 || hidden_dim_ < 0) {
      throw data_error("shape_mismatch", "attention tensor dimensions must be positive");
    }
    const std::size_t expected = static_cast<std::size_t>(layers_) * static_cast<std::size_t>(head_slots()) *
                                 static_cast<std::size_t>(length_) * static_cast<std::size_t>(length_);
    if (attention_.size() != expected) {
      throw data_error("shape_mismatch", "attention payload has " + std::to_string(attention_.size()) +
                                             " values, expected " + std::to_string(expected));
    }
    const std::size_t expected_hidden = static_cast<std::size_t>(layers_) * static_cast<std::size_t>(length_) *
                                        static_cast<std::size_t>(hidden_dim_);
    if (hidden_.size() != expected_hidden) {
      throw data_error("shape_mismatch", "hidden payload has " + std::to_string(hidden_.size()) +
                                             " values, expected " + std::to_string(expected_hidden));
    }
  }

  int layers() const noexcept { return layers_; }
  /// Number of real heads per layer.
  int heads() const noexcept { return heads_; }
  int head_slots() const noexcept { return heads_ + (has_average_ ? 1 : 0); }
  int length() const noexcept { return length_; }
  bool has_average_head() const noexcept { return has_average_; }
  bool has_hidden() const noexcept { return hidden_dim_ > 0; }
  int hidden_dim() const noexcept { return hidden_dim_; }

  std::span<const float> attention() const noexcept { return attention_; }
  std::span<const float> hidden() const noexcept { return hidden_; }

  void check_head(const HeadId& h) const {
    if (h.layer < 1 || h.layer > layers_ || h.head < 1 || h.head > head_slots()) {
      throw data_error("head_out_of_range", "head " + to_string(h) + " outside " + std::to_string(layers_) + " layers x " +
                                                std::to_string(head_slots()) + " heads");
    }
  }

  /// Attention row of word `position` (1-based) under head `h`.
  std::span<const float> row(const HeadId& h, int position) const {
    check_head(h);
    const std::size_t n = static_cast<std::size_t>(length_);
    return {attention_.data() + head_offset(h) + static_cast<std::size_t>(position - 1) * n, n};
  }

  /// The n x n attention matrix of head `h`, widened to double.
  SquareMatrix<double> head_matrix(const HeadId& h) const {
    check_head(h);
    const std::size_t n = static_cast<std::size_t>(length_);
    const float* base = attention_.data() + head_offset(h);
    return SquareMatrix<double>(n, std::vector<double>(base, base + n * n));
  }

  /// Hidden state of word `position` (1-based) at `layer`.
  std::vector<double> hidden_state(int layer, int position) const {
    if (!has_hidden()) throw data_error("missing_hidden", "tensor carries no hidden states");
    if (layer < 1 || layer > layers_) throw data_error("head_out_of_range", "layer " + std::to_string(layer) + " out of range");
    const std::size_t d = static_cast<std::size_t>(hidden_dim_);
    const float* base = hidden_.data() + (static_cast<std::size_t>(layer - 1) * static_cast<std::size_t>(length_) +
                                          static_cast<std::size_t>(position - 1)) * d;
    return std::vector<double>(base, base + d);
  }

  /// Largest |row sum - 1| over every row, or infinity if any entry is
  /// negative or not finite.
  double max_row_error() const noexcept {
    double worst = 0.0;
    const std::size_t n = static_cast<std::size_t>(length_);
    for (std::size_t r = 0; r < attention_.size() / n; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        const float v = attention_[r * n + c];
        if (!std::isfinite(v) || v < 0.0f) return std::numeric_limits<double>::infinity();
        sum += v;
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }

  /// Rescales rows whose sum is off by more than `tolerance`. Returns the
  /// number of rows changed; throws on rows that cannot be a distribution.
  std::size_t renormalize_rows(double tolerance = kRowTolerance) {
    std::size_t changed = 0;
    const std::size_t n = static_cast<std::size_t>(length_);
    for (std::size_t r = 0; r < attention_.size() / n; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        const float v = attention_[r * n + c];
        if (!std::isfinite(v) || v < 0.0f) {
          throw data_error("invalid_distribution", "attention row has a negative or non-finite entry");
        }
        sum += v;
      }
      if (sum <= 0.0) throw data_error("invalid_distribution", "attention row has zero mass");
      if (std::abs(sum - 1.0) > tolerance) {
        for (std::size_t c = 0; c < n; ++c) attention_[r * n + c] = static_cast<float>(attention_[r * n + c] / sum);
        ++changed;
      }
    }
    return changed;
  }

  friend bool operator==(const AttentionTensor&, const AttentionTensor&) = default;

 private:
  int layers_ = 0;
  int heads_ = 0;
  int length_ = 0;
  bool has_average_ = false;
  int hidden_dim_ = 0;
  std::vector<float> attention_;
  std::vector<float> hidden_;

  std::size_t head_offset(const HeadId& h) const noexcept {
    const std::size_t n = static_cast<std::size_t>(length_);
    return (static_cast<std::size_t>(h.layer - 1) * static_cast<std::size_t>(head_slots()) +
            static_cast<std::size_t>(h.head - 1)) * n * n;
  }
};

/// Appends the layer-average head (slot A+1) to every layer. Means are
/// accumulated in double, heads summed in index order.
inline AttentionTensor with_average_head(const AttentionTensor& t) {
  if (t.has_average_head()) return t;
  const std::size_t n = static_cast<std::size_t>(t.length());
  const std::size_t nn = n * n;
  const std::size_t heads = static_cast<std::size_t>(t.heads());
  std::span<const float> src = t.attention();
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(t.layers()) * (heads + 1) * nn);
  std::vector<double> acc(nn);
  for (std::size_t l = 0; l < static_cast<std::size_t>(t.layers()); ++l) {
    const float* layer = src.data() + l * heads * nn;
    out.insert(out.end(), layer, layer + heads * nn);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < nn; ++i) acc[i] += layer[h * nn + i];
    }
    for (std::size_t i = 0; i < nn; ++i) out.push_back(static_cast<float>(acc[i] / static_cast<double>(heads)));
  }
  std::vector<float> hidden(t.hidden().begin(), t.hidden().end());
  return AttentionTensor(t.layers(), t.heads(), t.length(), std::move(out), true, t.hidden_dim(), std::move(hidden));
}

/// Every addressable head of `t`, ordered by (layer, head).
inline std::vector<HeadId> all_heads(const AttentionTensor& t) {
  std::vector<HeadId> out;
  for (int l = 1; l <= t.layers(); ++l) {
    for (int h = 1; h <= t.head_slots(); ++h) out.push_back(HeadId{l, h});
  }
  return out;
}

struct AttentionSentence {
  std::vector<std::string> words;
  AttentionTensor tensor;

  friend bool operator==(const AttentionSentence&, const AttentionSentence&) = default;
};

struct AtndManifest {
  std::string model;
  std::string language;
  int layers = 0;
  int heads = 0;
  int hidden_dim = 0;
  std::size_t sentence_count = 0;
  /// Unrecognized manifest keys, preserved on rewrite.
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
    j["model"] = model;
    j["language"] = language;
    j["layers"] = layers;
    j["heads"] = heads;
    j["hidden_dim"] = hidden_dim;
    j["sentence_count"] = sentence_count;
    return j;
  }

  static AtndManifest from_json(const nlohmann::json& j) {
    AtndManifest m;
    m.model = j.value("model", std::string{});
    m.language = j.value("language", std::string{});
    m.layers = j.value("layers", 0);
    m.heads = j.value("heads", 0);
    m.hidden_dim = j.value("hidden_dim", 0);
    m.sentence_count = j.value("sentence_count", std::size_t{0});
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const char* known[] = {"model", "language", "layers", "heads", "hidden_dim", "sentence_count"};
      if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known)) m.extra[it.key()] = it.value();
    }
    return m;
  }

  friend bool operator==(const AtndManifest&, const AtndManifest&) = default;
};

struct AttentionCorpus {
  AtndManifest manifest;
  std::vector<AttentionSentence> sentences;
};

enum class AtndErrorKind { bad_magic, unsupported_version, truncated, shape_mismatch, bad_manifest, invalid_distribution };

inline const char* to_string(AtndErrorKind k) {
  switch (k) {
    case AtndErrorKind::bad_magic: return "bad_magic";
    case AtndErrorKind::unsupported_version: return "unsupported_version";
    case AtndErrorKind::truncated: return "truncated";
    case AtndErrorKind::shape_mismatch: return "shape_mismatch";
    case AtndErrorKind::bad_manifest: return "bad_manifest";
    case AtndErrorKind::invalid_distribution: return "invalid_distribution";
  }
  return "unknown";
}

class AtndError : public Error {
 public:
  AtndError(AtndErrorKind kind, const std::string& message)
      : Error(ErrorCategory::data, to_string(kind), "ATND: " + message), kind_(kind) {}

  AtndErrorKind kind() const noexcept { return kind_; }

 private:
  AtndErrorKind kind_;
};

struct ReadOptions {
  /// Append the layer-average head to every tensor after loading.
  bool synthesize_average_head = true;
  /// Receives renormalization warnings; defaults to stderr.
  std::function<void(const std::string&)> on_warning;
};

namespace detail {

inline constexpr char kAtndMagic[4] = {'A', 'T', 'N', 'D'};
inline constexpr std::uint32_t kAtndVersion = 1;
inline constexpr std::uint32_t kFlagHidden = 1u;

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { out_.append(s); }
  void string(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t offset() const noexcept { return pos_; }

  void need(std::uint64_t count, const char* what) const {
    if (count > remaining()) {
      throw AtndError(AtndErrorKind::truncated, std::string("unexpected end of file reading ") + what + " at offset " +
                                                   std::to_string(pos_));
    }
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string_view bytes(std::uint64_t count, const char* what) {
    need(count, what);
    std::string_view s = data_.substr(pos_, static_cast<std::size_t>(count));
    pos_ += static_cast<std::size_t>(count);
    return s;
  }

  std::vector<float> floats(std::uint64_t count, const char* what) {
    if (count > remaining() / 4) need(count * 4, what);
    std::vector<float> out(static_cast<std::size_t>(count));
    for (auto& v : out) v = std::bit_cast<float>(u32(what));
    return out;
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline void warn(const ReadOptions& opts, const std::string& message) {
  if (opts.on_warning) {
    opts.on_warning(message);
  } else {
    std::cerr << "warning: " << message << "\n";
  }
}

inline void finish_tensor(AttentionTensor& t, std::size_t index, const ReadOptions& opts) {
  std::size_t changed = 0;
  try {
    changed = t.renormalize_rows();
  } catch (const Error& e) {
    throw AtndError(AtndErrorKind::invalid_distribution, "sentence " + std::to_string(index + 1) + ": " + e.what());
  }
  if (changed > 0) {
    warn(opts, "sentence " + std::to_string(index + 1) + ": renormalized " + std::to_string(changed) +
                   " attention rows outside the sum tolerance");
  }
  if (opts.synthesize_average_head) t = with_average_head(t);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw io_error("failed reading " + path.string());
  return data;
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw io_error("failed writing " + path.string());
}

// Checks that every sentence agrees with the corpus shape and returns it.
inline AtndManifest checked_manifest(const AttentionCorpus& corpus) {
  AtndManifest m = corpus.manifest;
  m.sentence_count = corpus.sentences.size();
  if (!corpus.sentences.empty()) {
    const AttentionTensor& first = corpus.sentences.front().tensor;
    if (m.layers == 0) m.layers = first.layers();
    if (m.heads == 0) m.heads = first.heads();
    if (m.hidden_dim == 0) m.hidden_dim = first.hidden_dim();
  }
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    const AttentionSentence& s = corpus.sentences[i];
    const AttentionTensor& t = s.tensor;
    const std::string where = "sentence " + std::to_string(i + 1);
    if (t.layers() != m.layers || t.heads() != m.heads || t.hidden_dim() != m.hidden_dim) {
      throw AtndError(AtndErrorKind::shape_mismatch, where + " does not match the corpus shape");
    }
    if (s.words.size() != static_cast<std::size_t>(t.length())) {
      throw AtndError(AtndErrorKind::shape_mismatch, where + " has " + std::to_string(s.words.size()) +
                                                         " words but attention over " + std::to_string(t.length()));
    }
    if (!(t.max_row_error() <= AttentionTensor::kRowTolerance)) {
      throw AtndError(AtndErrorKind::invalid_distribution, where + " has attention rows that are not distributions");
    }
  }
  return m;
}

}  // namespace detail

/// Serializes a corpus to ATND bytes. Only real heads are written; a
/// synthesized average head is dropped.
inline std::string encode_atnd(const AttentionCorpus& corpus) {
  const AtndManifest manifest = detail::checked_manifest(corpus);
  detail::ByteWriter w;
  w.bytes(std::string_view(detail::kAtndMagic, 4));
  w.u32(detail::kAtndVersion);
  w.u32(manifest.hidden_dim > 0 ? detail::kFlagHidden : 0u);
  w.string(manifest.to_json().dump());
  for (const AttentionSentence& s : corpus.sentences) {
    const AttentionTensor& t = s.tensor;
    w.u32(static_cast<std::uint32_t>(t.length()));
    for (const std::string& word : s.words) w.string(word);
    const std::size_t nn = static_cast<std::size_t>(t.length()) * static_cast<std::size_t>(t.length());
    const std::size_t slots = static_cast<std::size_t>(t.head_slots());
    for (std::size_t l = 0; l < static_cast<std::size_t>(t.layers()); ++l) {
      for (std::size_t h = 0; h < static_cast<std::size_t>(t.heads()); ++h) {
        std::span<const float> block = t.attention().subspan((l * slots + h) * nn, nn);
        for (float v : block) w.f32(v);
      }
    }
    for (float v : t.hidden()) w.f32(v);
  }
  return w.take();
}

inline AttentionCorpus decode_atnd(std::string_view data, const ReadOptions& opts = {}) {
  detail::ByteReader r(data);
  std::string_view magic = r.bytes(4, "magic");
  if (magic != std::string_view(detail::kAtndMagic, 4)) throw AtndError(AtndErrorKind::bad_magic, "missing ATND magic");
  const std::uint32_t version = r.u32("version");
  if (version != detail::kAtndVersion) {
    throw AtndError(AtndErrorKind::unsupported_version, "version " + std::to_string(version) + " is not supported");
  }
  const std::uint32_t flags = r.u32("flags");
  if ((flags & ~detail::kFlagHidden) != 0) {
    throw AtndError(AtndErrorKind::unsupported_version, "unknown flag bits " + std::to_string(flags));
  }
  const std::uint32_t manifest_len = r.u32("manifest length");
  std::string_view manifest_text = r.bytes(manifest_len, "manifest");

  AttentionCorpus corpus;
  try {
    corpus.manifest = AtndManifest::from_json(nlohmann::json::parse(manifest_text));
  } catch (const nlohmann::json::exception& e) {
    throw AtndError(AtndErrorKind::bad_manifest, std::string("manifest is not valid JSON: ") + e.what());
  }
  AtndManifest& m = corpus.manifest;
  if (m.layers < 1 || m.heads < 1 || m.hidden_dim < 0) {
    throw AtndError(AtndErrorKind::bad_manifest, "manifest must declare positive layers and heads");
  }
  const bool has_hidden = (flags & detail::kFlagHidden) != 0;
  if (has_hidden != (m.hidden_dim > 0)) {
    throw AtndError(AtndErrorKind::shape_mismatch, "hidden-state flag disagrees with manifest hidden_dim");
  }

  const std::uint64_t L = static_cast<std::uint64_t>(m.layers);
  const std::uint64_t A = static_cast<std::uint64_t>(m.heads);
  const std::uint64_t dim = static_cast<std::uint64_t>(m.hidden_dim);
  corpus.sentences.reserve(std::min<std::size_t>(m.sentence_count, 1u << 16));
  for (std::size_t i = 0; i < m.sentence_count; ++i) {
    const std::uint32_t n = r.u32("sentence length");
    if (n == 0) throw AtndError(AtndErrorKind::shape_mismatch, "sentence " + std::to_string(i + 1) + " is empty");
    // Each word takes at least its 4-byte length prefix.
    r.need(static_cast<std::uint64_t>(n) * 4, "words");
    AttentionSentence s;
    s.words.reserve(n);
    for (std::uint32_t w = 0; w < n; ++w) {
      const std::uint32_t len = r.u32("word length");
      s.words.emplace_back(r.bytes(len, "word"));
    }
    const std::uint64_t count = L * A * n * n;
    std::vector<float> attention = r.floats(count, "attention payload");
    std::vector<float> hidden;
    if (has_hidden) hidden = r.floats(L * n * dim, "hidden payload");
    s.tensor = AttentionTensor(m.layers, m.heads, static_cast<int>(n), std::move(attention), false, m.hidden_dim,
                               std::move(hidden));
    detail::finish_tensor(s.tensor, i, opts);
    corpus.sentences.push_back(std::move(s));
  }
  if (r.remaining() != 0) {
    throw AtndError(AtndErrorKind::shape_mismatch, std::to_string(r.remaining()) + " trailing bytes after " +
                                                       std::to_string(m.sentence_count) + " declared sentences");
  }
  return corpus;
}

inline void write_atnd(const AttentionCorpus& corpus, const std::filesystem::path& path) {
  detail::write_file(path, encode_atnd(corpus));
}

inline AttentionCorpus read_atnd(const std::filesystem::path& path, const ReadOptions& opts = {}) {
  return decode_atnd(detail::read_file(path), opts);
}

/// JSON debug format: {"manifest": {...}, "sentences": [{"words": [...],
/// "attn": [L][A][n][n], "hidden": [L][n][dim]}]}. A bare sentence object or
/// an array of sentence objects is accepted as well.
inline AttentionCorpus parse_attention_json(const nlohmann::json& root, const ReadOptions& opts = {}) {
  AttentionCorpus corpus;
  const nlohmann::json* list = &root;
  nlohmann::json single;
  if (root.is_object() && root.contains("sentences")) {
    if (root.contains("manifest")) corpus.manifest = AtndManifest::from_json(root.at("manifest"));
    list = &root.at("sentences");
  } else if (root.is_object()) {
    single = nlohmann::json::array({root});
    list = &single;
  }
  if (!list->is_array()) throw AtndError(AtndErrorKind::bad_manifest, "expected a list of sentences");

  try {
    std::size_t index = 0;
    for (const nlohmann::json& js : *list) {
      AttentionSentence s;
      s.words = js.at("words").get<std::vector<std::string>>();
      const auto attn = js.at("attn").get<std::vector<std::vector<std::vector<std::vector<float>>>>>();
      const int n = static_cast<int>(s.words.size());
      const int L = static_cast<int>(attn.size());
      const int A = L > 0 ? static_cast<int>(attn[0].size()) : 0;
      std::vector<float> flat;
      for (const auto& layer : attn) {
        if (static_cast<int>(layer.size()) != A) throw AtndError(AtndErrorKind::shape_mismatch, "ragged head dimension");
        for (const auto& head : layer) {
          if (static_cast<int>(head.size()) != n) throw AtndError(AtndErrorKind::shape_mismatch, "attention rows != words");
          for (const auto& row : head) {
            if (static_cast<int>(row.size()) != n) throw AtndError(AtndErrorKind::shape_mismatch, "attention columns != words");
            flat.insert(flat.end(), row.begin(), row.end());
          }
        }
      }
      std::vector<float> hidden;
      int dim = 0;
      if (js.contains("hidden")) {
        const auto h = js.at("hidden").get<std::vector<std::vector<std::vector<float>>>>();
        if (static_cast<int>(h.size()) != L) throw AtndError(AtndErrorKind::shape_mismatch, "hidden layers != attention layers");
        for (const auto& layer : h) {
          if (static_cast<int>(layer.size()) != n) throw AtndError(AtndErrorKind::shape_mismatch, "hidden rows != words");
          for (const auto& v : layer) {
            if (dim == 0) dim = static_cast<int>(v.size());
            if (static_cast<int>(v.size()) != dim) throw AtndError(AtndErrorKind::shape_mismatch, "ragged hidden dimension");
            hidden.insert(hidden.end(), v.begin(), v.end());
          }
        }
      }
      try {
        s.tensor = AttentionTensor(L, A, n, std::move(flat), false, dim, std::move(hidden));
      } catch (const Error& e) {
        throw AtndError(AtndErrorKind::shape_mismatch, "sentence " + std::to_string(index + 1) + ": " + e.what());
      }
      detail::finish_tensor(s.tensor, index, opts);
      corpus.sentences.push_back(std::move(s));
      ++index;
    }
  } catch (const nlohmann::json::exception& e) {
    throw AtndError(AtndErrorKind::shape_mismatch, std::string("malformed attention JSON: ") + e.what());
  }

  AtndManifest& m = corpus.manifest;
  if (!corpus.sentences.empty()) {
    const AttentionTensor& t = corpus.sentences.front().tensor;
    m.layers = t.layers();
    m.heads = t.heads();
    m.hidden_dim = t.hidden_dim();
  }
  m.sentence_count = corpus.sentences.size();
  for (const AttentionSentence& s : corpus.sentences) {
    if (s.tensor.layers() != m.layers || s.tensor.heads() != m.heads || s.tensor.hidden_dim() != m.hidden_dim) {
      throw AtndError(AtndErrorKind::shape_mismatch, "sentences disagree on model shape");
    }
  }
  return corpus;
}

inline nlohmann::json attention_to_json(const AttentionCorpus& corpus) {
  const AtndManifest manifest = detail::checked_manifest(corpus);
  nlohmann::json out;
  out["manifest"] = manifest.to_json();
  out["sentences"] = nlohmann::json::array();
  for (const AttentionSentence& s : corpus.sentences) {
    const AttentionTensor& t = s.tensor;
    const std::size_t n = static_cast<std::size_t>(t.length());
    nlohmann::json attn = nlohmann::json::array();
    for (int l = 1; l <= t.layers(); ++l) {
      nlohmann::json layer = nlohmann::json::array();
      for (int h = 1; h <= t.heads(); ++h) {
        nlohmann::json head = nlohmann::json::array();
        for (int r = 1; r <= t.length(); ++r) {
          std::span<const float> row = t.row(HeadId{l, h}, r);
          head.push_back(std::vector<float>(row.begin(), row.end()));
        }
        layer.push_back(std::move(head));
      }
      attn.push_back(std::move(layer));
    }
    nlohmann::json js{{"words", s.words}, {"attn", std::move(attn)}};
    if (t.has_hidden()) {
      nlohmann::json hidden = nlohmann::json::array();
      const std::size_t d = static_cast<std::size_t>(t.hidden_dim());
      for (std::size_t l = 0; l < static_cast<std::size_t>(t.layers()); ++l) {
        nlohmann::json layer = nlohmann::json::array();
        for (std::size_t w = 0; w < n; ++w) {
          std::span<const float> v = t.hidden().subspan((l * n + w) * d, d);
          layer.push_back(std::vector<float>(v.begin(), v.end()));
        }
        hidden.push_back(std::move(layer));
      }
      js["hidden"] = std::move(hidden);
    }
    out["sentences"].push_back(std::move(js));
  }
  return out;
}

inline AttentionCorpus read_attention_json(const std::filesystem::path& path, const ReadOptions& opts = {}) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw AtndError(AtndErrorKind::bad_manifest, path.string() + " is not valid JSON: " + e.what());
  }
  return parse_attention_json(root, opts);
}

inline void write_attention_json(const AttentionCorpus& corpus, const std::filesystem::path& path) {
  detail::write_file(path, attention_to_json(corpus).dump() + "\n");
}

/// Loads ATND or, for a ".json" extension, the JSON debug format.
inline AttentionCorpus load_attention(const std::filesystem::path& path, const ReadOptions& opts = {}) {
  if (path.extension() == ".json") return read_attention_json(path, opts);
  return read_atnd(path, opts);
}

inline void save_attention(const AttentionCorpus& corpus, const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    write_attention_json(corpus, path);
  } else {
    write_atnd(corpus, path);
  }
}

}  // namespace attnparse
