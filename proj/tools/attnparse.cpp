// attnparse: command-line front end.
//
//   attnparse rank-heads --attn val.atnd --gold val.trees --method cc --metric both --out heads.json
//   attnparse parse      --attn test.atnd --heads heads.json --k 20 --out pred.trees
//   attnparse evaluate   --pred pred.trees --gold test.trees --label-recall NP,VP --report report.json
//   attnparse baseline   --gold test.trees --strategy right --out base.trees
//   attnparse analyze overlap --heads en.json fr.json --k 20 --out overlap.json
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 I/O error.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "attnparse/attnparse.hpp"

namespace fs = std::filesystem;
using namespace attnparse;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct GoldOptions {
  std::string punct_tags;
  bool keep_punct = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--punct-tags", punct_tags, "Comma-separated POS tags removed from gold trees (replaces the default set)");
    cmd->add_flag("--keep-punct", keep_punct, "Do not strip punctuation from gold trees");
  }

  std::vector<GoldTree> load(const fs::path& path) const {
    std::vector<GoldTree> trees = read_trees(path);
    if (keep_punct) return trees;
    std::set<std::string> tags = default_punctuation_tags();
    if (!punct_tags.empty()) {
      const std::vector<std::string> list = split_list(punct_tags);
      tags = std::set<std::string>(list.begin(), list.end());
    }
    for (std::size_t i = 0; i < trees.size(); ++i) {
      try {
        trees[i] = strip_punctuation(trees[i], tags);
      } catch (const Error& e) {
        throw Error(e.category(), e.code(), path.string() + ": tree " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    return trees;
  }
};

unsigned threads_from(int flag) {
  return resolve_threads(flag > 0 ? std::optional<unsigned>(static_cast<unsigned>(flag)) : std::nullopt);
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error("bad_json", path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw io_error("failed writing " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

HeadRanking load_ranking(const fs::path& path) { return HeadRanking::from_json(read_json(path)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constituency trees from transformer attention"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: $ATND_THREADS, else 1)")->check(CLI::NonNegativeNumber);

  // rank-heads
  auto* rank = app.add_subcommand("rank-heads", "Rank every attention head by validation F1");
  std::string rank_attn, rank_gold, rank_method = "td", rank_metric = "both", rank_out, k_grid;
  std::string meta_model, meta_language, meta_date;
  GoldOptions rank_gold_opts;
  rank->add_option("--attn", rank_attn, "Validation attention (.atnd or .json)")->required();
  rank->add_option("--gold", rank_gold, "Validation gold trees (.trees)")->required();
  rank->add_option("--method", rank_method, "td | cp | cc")->check(CLI::IsMember({"td", "cp", "cc"}));
  rank->add_option("--metric", rank_metric, "jsd | hel | both")->check(CLI::IsMember({"jsd", "hel", "both"}));
  rank->add_option("--out", rank_out, "Output ranking (heads.json)")->required();
  rank->add_option("--k-grid", k_grid, "Comma-separated ensemble sizes to evaluate on the validation set, e.g. 5,10,20,30");
  rank->add_option("--model", meta_model, "Model id recorded in the ranking (default: from the attention manifest)");
  rank->add_option("--language", meta_language, "Language recorded in the ranking (default: from the attention manifest)");
  rank->add_option("--date", meta_date, "Ranking date recorded in the metadata");
  rank->add_option("--threads", threads, "Worker threads")->check(CLI::NonNegativeNumber);
  rank_gold_opts.add_to(rank);

  // parse
  auto* parse = app.add_subcommand("parse", "Parse with the top-K ensemble of a head ranking");
  std::string parse_attn, parse_heads, parse_method_name, parse_out;
  int parse_k = -1;
  bool parse_normalize = false;
  parse->add_option("--attn", parse_attn, "Test attention (.atnd or .json)")->required();
  parse->add_option("--heads", parse_heads, "Head ranking from rank-heads")->required();
  parse->add_option("--k", parse_k, "Number of top heads (default: the ranking's recommended K, else 20 or all heads if fewer)");
  parse->add_option("--method", parse_method_name, "td | cp | cc (default: the ranking's method)")
      ->check(CLI::IsMember({"td", "cp", "cc"}));
  parse->add_flag("--normalize", parse_normalize, "Min-max normalize each head's distances before averaging");
  parse->add_option("--out", parse_out, "Predicted trees (.trees)")->required();
  parse->add_option("--threads", threads, "Worker threads")->check(CLI::NonNegativeNumber);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Unlabeled sentence-level F1 against gold trees");
  std::string eval_pred, eval_gold, eval_labels, eval_report, eval_heads;
  GoldOptions eval_gold_opts;
  eval->add_option("--pred", eval_pred, "Predicted trees")->required();
  eval->add_option("--gold", eval_gold, "Gold trees")->required();
  eval->add_option("--label-recall", eval_labels, "Comma-separated labels, e.g. NP,VP");
  eval->add_option("--report", eval_report, "Report JSON path");
  eval->add_option("--heads", eval_heads, "Ranking used for the predictions (recorded in the report)");
  eval_gold_opts.add_to(eval);

  // baseline
  auto* base = app.add_subcommand("baseline", "Left-branching, right-branching or random trees");
  std::string base_gold, base_strategy, base_out;
  std::uint64_t base_seed = 13;
  GoldOptions base_gold_opts;
  base->add_option("--gold", base_gold, "Gold trees (supply words and lengths)")->required();
  base->add_option("--strategy", base_strategy, "left | right | random")
      ->required()
      ->check(CLI::IsMember({"left", "right", "random"}));
  base->add_option("--seed", base_seed, "Seed for the random strategy");
  base->add_option("--out", base_out, "Output trees")->required();
  base_gold_opts.add_to(base);

  // analyze overlap
  auto* analyze = app.add_subcommand("analyze", "Analyses over head rankings");
  analyze->require_subcommand(1);
  auto* overlap = analyze->add_subcommand("overlap", "Top-K head set overlap across rankings");
  std::vector<std::string> overlap_heads;
  int overlap_k = 20;
  std::string overlap_out, overlap_csv;
  overlap->add_option("--heads", overlap_heads, "Ranking files, one per language")->required()->expected(1, -1);
  overlap->add_option("--k", overlap_k, "Top-K size");
  overlap->add_option("--out", overlap_out, "overlap.json")->required();
  overlap->add_option("--csv", overlap_csv, "overlap.csv (default: next to --out)");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus with a planted head");
  SyntheticOptions synth_opts;
  std::string synth_attn, synth_gold, synth_planted = "1,1", synth_shape = "random";
  synth->add_option("--sentences", synth_opts.sentences, "Number of sentences");
  synth->add_option("--min-len", synth_opts.min_length, "Minimum sentence length");
  synth->add_option("--max-len", synth_opts.max_length, "Maximum sentence length");
  synth->add_option("--layers", synth_opts.layers, "Layers");
  synth->add_option("--heads", synth_opts.heads, "Heads per layer");
  synth->add_option("--planted", synth_planted, "Planted head as layer,head, or 'none'");
  synth->add_option("--shape", synth_shape, "random | right")->check(CLI::IsMember({"random", "right"}));
  synth->add_option("--decay", synth_opts.decay, "Per-level mass decay of the planted head");
  synth->add_option("--seed", synth_opts.seed, "Seed");
  synth->add_option("--language", synth_opts.language, "Language code for the manifest");
  synth->add_option("--out-attn", synth_attn, "Attention output (.atnd or .json)")->required();
  synth->add_option("--out-gold", synth_gold, "Gold trees output")->required();

  // validate
  auto* validate = app.add_subcommand("validate", "Check an attention file's shapes and row sums");
  std::string validate_attn;
  validate->add_option("--attn", validate_attn, "Attention file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage/bad_arguments]: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (rank->parsed()) {
      const unsigned n_threads = threads_from(threads);
      const AttentionCorpus corpus = load_attention(rank_attn);
      const std::vector<GoldTree> gold = rank_gold_opts.load(rank_gold);
      const Method method = parse_method(rank_method);
      std::vector<Metric> metrics;
      if (rank_metric == "both") {
        metrics = {Metric::jsd, Metric::hel};
      } else {
        metrics = {parse_metric(rank_metric)};
      }
      HeadRanking ranking = rank_heads_best_metric(corpus, gold, method, metrics, n_threads);
      ranking.metadata.validation_corpus = fs::path(rank_attn).filename().string();
      if (!meta_model.empty()) ranking.metadata.model = meta_model;
      if (!meta_language.empty()) ranking.metadata.language = meta_language;
      ranking.metadata.date = meta_date;
      if (!k_grid.empty()) {
        std::vector<int> grid;
        for (const std::string& s : split_list(k_grid)) {
          try {
            grid.push_back(std::stoi(s));
          } catch (const std::exception&) {
            throw usage_error("bad_k", "--k-grid entries must be integers");
          }
        }
        select_k(ranking, corpus, gold, grid, {}, n_threads);
      }
      write_json(rank_out, ranking.to_json());
      const RankedHead& best = ranking.entries.front();
      std::printf("method %s, metric %s, best head %s F1 %.1f\n", std::string(to_string(ranking.method)).c_str(),
                  std::string(to_string(ranking.metric)).c_str(), to_string(best.head).c_str(), 100.0 * best.f1);
      return 0;
    }

    if (parse->parsed()) {
      const unsigned n_threads = threads_from(threads);
      const HeadRanking ranking = load_ranking(parse_heads);
      int k = parse_k;
      if (parse_k == -1) {
        k = ranking.recommended_k.value_or(std::min<int>(20, static_cast<int>(ranking.entries.size())));
      }
      if (k < 1 || static_cast<std::size_t>(k) > ranking.entries.size()) {
        throw usage_error("k_out_of_range", "--k must lie in [1, " + std::to_string(ranking.entries.size()) + "]");
      }
      const AttentionCorpus corpus = load_attention(parse_attn);
      EnsembleOptions opts;
      opts.normalize = parse_normalize;
      if (!parse_method_name.empty()) opts.method = parse_method(parse_method_name);
      const std::vector<BinaryTree> trees = parse_corpus(corpus, ranking, k, opts, n_threads);
      std::vector<std::string> lines;
      for (std::size_t i = 0; i < trees.size(); ++i) lines.push_back(write_tree(trees[i], corpus.sentences[i].words));
      write_lines(parse_out, lines);
      return 0;
    }

    if (eval->parsed()) {
      const std::vector<GoldTree> preds = read_trees(eval_pred);
      const std::vector<GoldTree> gold = eval_gold_opts.load(eval_gold);
      EvaluationReport report;
      report.sentence_f1 = sentence_scores(std::span<const GoldTree>(preds), std::span<const GoldTree>(gold));
      report.corpus_f1 = corpus_f1(std::span<const double>(report.sentence_f1));
      for (const GoldTree& g : gold) report.lengths.push_back(g.size());
      for (const std::string& label : split_list(eval_labels)) {
        report.label_recall[label] = label_recall(std::span<const GoldTree>(preds), std::span<const GoldTree>(gold), label);
      }
      if (!eval_heads.empty()) report.ranking_metadata = load_ranking(eval_heads).to_json().at("metadata");
      const nlohmann::json j = report.to_json();
      if (!eval_report.empty()) write_json(eval_report, j);
      std::cout << "F1 " << j.at("corpus_f1_display").get<std::string>() << " over " << gold.size() << " sentences\n";
      for (const auto& [label, recall] : report.label_recall) std::cout << label << " recall " << recall << "\n";
      return 0;
    }

    if (base->parsed()) {
      const std::vector<GoldTree> gold = base_gold_opts.load(base_gold);
      const BaselineStrategy strategy = parse_baseline_strategy(base_strategy);
      std::vector<std::string> lines;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        const BinaryTree t = baseline_tree(gold[i].size(), strategy, sentence_seed(base_seed, i));
        lines.push_back(write_tree(t, gold[i].words()));
      }
      write_lines(base_out, lines);
      return 0;
    }

    if (overlap->parsed()) {
      std::vector<HeadRanking> rankings;
      std::vector<std::string> names;
      for (const std::string& file : overlap_heads) {
        rankings.push_back(load_ranking(file));
        const std::string& lang = rankings.back().metadata.language;
        names.push_back(lang.empty() ? fs::path(file).stem().string() : lang);
      }
      // Disambiguate rankings that share a language code.
      for (std::size_t i = 0; i < names.size(); ++i) {
        for (std::size_t j = i + 1; j < names.size(); ++j) {
          if (names[j] == names[i]) names[j] = fs::path(overlap_heads[j]).stem().string();
        }
      }
      const OverlapReport report = head_overlap(rankings, names, overlap_k);
      write_json(overlap_out, report.to_json());
      fs::path csv = overlap_csv.empty() ? fs::path(overlap_out).replace_extension(".csv") : fs::path(overlap_csv);
      write_text(csv, report.to_csv());
      std::cout << report.universal.size() << " heads shared by all " << names.size() << " rankings\n";
      return 0;
    }

    if (synth->parsed()) {
      if (synth_planted == "none") {
        synth_opts.planted.reset();
      } else {
        const std::vector<std::string> parts = split_list(synth_planted);
        if (parts.size() != 2) throw usage_error("bad_head", "--planted expects layer,head");
        synth_opts.planted = HeadId{std::stoi(parts[0]), std::stoi(parts[1])};
      }
      synth_opts.shape = synth_shape == "right" ? GoldShape::right_branching : GoldShape::random;
      const SyntheticCorpus corpus = make_synthetic_corpus(synth_opts);
      save_attention(corpus.attention, synth_attn);
      std::vector<std::string> lines;
      for (const GoldTree& g : corpus.gold) lines.push_back(write_gold_tree(g));
      write_lines(synth_gold, lines);
      return 0;
    }

    if (validate->parsed()) {
      ReadOptions opts;
      opts.synthesize_average_head = false;
      std::size_t warnings = 0;
      opts.on_warning = [&](const std::string& msg) {
        ++warnings;
        std::cerr << "warning: " << msg << "\n";
      };
      const AttentionCorpus corpus = load_attention(validate_attn, opts);
      double worst = 0.0;
      for (const AttentionSentence& s : corpus.sentences) worst = std::max(worst, s.tensor.max_row_error());
      std::cout << corpus.sentences.size() << " sentences, " << corpus.manifest.layers << " layers x "
                << corpus.manifest.heads << " heads, hidden dim " << corpus.manifest.hidden_dim
                << ", max row-sum error " << worst << "\n";
      return warnings == 0 ? 0 : kExitData;
    }
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.category()) << "/" << e.code() << "]: " << e.what() << "\n";
    switch (e.category()) {
      case ErrorCategory::usage: return kExitUsage;
      case ErrorCategory::data: return kExitData;
      case ErrorCategory::io: return kExitIo;
    }
  } catch (const std::exception& e) {
    std::cerr << "error[data/unexpected]: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
