#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "attnparse/attnparse.hpp"
#include "oracles.hpp"

using namespace attnparse;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = oracle::scratch_dir(std::string("cli-") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  }

  oracle::CliResult run(const std::string& args) { return oracle::run_cli(ATTNPARSE_CLI, args, dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void synth(const std::string& extra = "") {
    const auto r = run("synth --sentences 8 --seed 5 --out-attn " + path("c.atnd") + " --out-gold " + path("c.trees") +
                       " " + extra);
    ASSERT_EQ(r.status, 0) << r.err;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, PipelineOnPlantedCorpus) {
  synth();
  auto r = run("rank-heads --attn " + path("c.atnd") + " --gold " + path("c.trees") + " --method cc --metric both" +
               " --k-grid 1,2 --date 2024-01-01 --out " + path("heads.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const HeadRanking ranking = HeadRanking::from_json(nlohmann::json::parse(oracle::read_all(path("heads.json"))));
  EXPECT_EQ(ranking.entries.front().head, (HeadId{1, 1}));
  EXPECT_EQ(ranking.metadata.date, "2024-01-01");
  EXPECT_EQ(ranking.metric_search.size(), 2u);
  EXPECT_EQ(ranking.recommended_k, 1);

  r = run("parse --attn " + path("c.atnd") + " --heads " + path("heads.json") + " --out " + path("pred.trees"));
  ASSERT_EQ(r.status, 0) << r.err;
  r = run("evaluate --pred " + path("pred.trees") + " --gold " + path("c.trees") + " --label-recall NP --heads " +
          path("heads.json") + " --report " + path("report.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = nlohmann::json::parse(oracle::read_all(path("report.json")));
  EXPECT_EQ(report.at("corpus_f1"), 100.0);
  EXPECT_EQ(report.at("label_recall").at("NP"), 1.0);
  EXPECT_EQ(report.at("ranking").at("date"), "2024-01-01");
  EXPECT_NE(r.out.find("F1 100.0"), std::string::npos) << r.out;
}

TEST_F(Cli, JsonAttentionIsAccepted) {
  synth();
  const AttentionCorpus c = read_atnd(path("c.atnd"));
  write_attention_json(c, path("c.json"));
  auto r = run("validate --attn " + path("c.json"));
  EXPECT_EQ(r.status, 0) << r.err;
  r = run("rank-heads --attn " + path("c.json") + " --gold " + path("c.trees") + " --metric jsd --out " +
          path("heads.json"));
  EXPECT_EQ(r.status, 0) << r.err;
}

TEST_F(Cli, BaselinesAreDeterministic) {
  synth("--shape right");
  for (const char* s : {"left", "right", "random"}) {
    auto r = run(std::string("baseline --gold ") + path("c.trees") + " --strategy " + s + " --out " + path("a.trees"));
    ASSERT_EQ(r.status, 0) << r.err;
    r = run(std::string("baseline --gold ") + path("c.trees") + " --strategy " + s + " --out " + path("b.trees"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(oracle::read_all(path("a.trees")), oracle::read_all(path("b.trees")));
  }
  run("baseline --gold " + path("c.trees") + " --strategy right --out " + path("right.trees"));
  const auto r = run("evaluate --pred " + path("right.trees") + " --gold " + path("c.trees"));
  EXPECT_NE(r.out.find("F1 100.0"), std::string::npos) << r.out;
}

TEST_F(Cli, OverlapWritesJsonAndCsv) {
  synth();
  run("rank-heads --attn " + path("c.atnd") + " --gold " + path("c.trees") + " --metric jsd --out " + path("a.json"));
  run("rank-heads --attn " + path("c.atnd") + " --gold " + path("c.trees") + " --metric hel --out " + path("b.json"));
  const auto r = run("analyze overlap --heads " + path("a.json") + " " + path("b.json") + " --k 3 --out " +
                     path("overlap.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(oracle::read_all(path("overlap.json")));
  EXPECT_EQ(j.at("rankings").size(), 2u);
  EXPECT_TRUE(fs::exists(path("overlap.csv")));
}

TEST_F(Cli, ExitCodesByCategory) {
  synth();
  run("rank-heads --attn " + path("c.atnd") + " --gold " + path("c.trees") + " --out " + path("heads.json"));

  auto r = run("parse --attn " + path("c.atnd") + " --heads " + path("heads.json") + " --k 0 --out " + path("p.trees"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("error[usage/k_out_of_range]"), std::string::npos) << r.err;

  r = run("rank-heads --attn " + path("c.atnd") + " --gold " + path("c.trees") + " --metric cos --out x");
  EXPECT_EQ(r.status, 2);
  r = run("frobnicate");
  EXPECT_EQ(r.status, 2);

  r = run("parse --attn " + path("missing.atnd") + " --heads " + path("heads.json") + " --out " + path("p.trees"));
  EXPECT_EQ(r.status, 4);
  EXPECT_NE(r.err.find("error[io/"), std::string::npos) << r.err;

  std::string bytes = oracle::read_all(path("c.atnd"));
  bytes[1] = 'Z';
  {
    std::ofstream(path("bad.atnd"), std::ios::binary) << bytes;
  }
  r = run("validate --attn " + path("bad.atnd"));
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.err.find("error[data/bad_magic]"), std::string::npos) << r.err;

  {
    std::ofstream(path("short.trees")) << "(S (NN a) (NN b))\n";
  }
  r = run("evaluate --pred " + path("short.trees") + " --gold " + path("c.trees"));
  EXPECT_EQ(r.status, 3);
}

TEST_F(Cli, ThreadCountDoesNotChangeOutput) {
  synth("--planted none");
  run("rank-heads --attn " + path("c.atnd") + " --gold " + path("c.trees") + " --method cp --out " + path("h1.json") +
      " --threads 1");
  run("rank-heads --attn " + path("c.atnd") + " --gold " + path("c.trees") + " --method cp --out " + path("h3.json") +
      " --threads 3");
  EXPECT_EQ(oracle::read_all(path("h1.json")), oracle::read_all(path("h3.json")));
  setenv("ATND_THREADS", "2", 1);
  run("parse --attn " + path("c.atnd") + " --heads " + path("h1.json") + " --k 4 --out " + path("p2.trees"));
  unsetenv("ATND_THREADS");
  run("parse --attn " + path("c.atnd") + " --heads " + path("h1.json") + " --k 4 --out " + path("p1.trees"));
  EXPECT_EQ(oracle::read_all(path("p1.trees")), oracle::read_all(path("p2.trees")));
}

TEST(Threads, ResolutionOrder) {
  setenv("ATND_THREADS", "3", 1);
  EXPECT_EQ(resolve_threads(std::nullopt), 3u);
  EXPECT_EQ(resolve_threads(2u), 2u);
  setenv("ATND_THREADS", "zero", 1);
  EXPECT_THROW(resolve_threads(std::nullopt), Error);
  unsetenv("ATND_THREADS");
  EXPECT_EQ(resolve_threads(std::nullopt), 1u);
}
