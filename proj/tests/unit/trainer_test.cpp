#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "calm/checkpoint.hpp"
#include "calm/config.hpp"
#include "calm/harness.hpp"
#include "calm/store.hpp"
#include "calm/synthetic.hpp"
#include "calm/trainer.hpp"
#include "test_util.hpp"

namespace calm {
namespace {

namespace fs = std::filesystem;

RunConfig small_config(const fs::path& root) {
  RunConfig c;
  c.synthetic.samples_per_class = 8;
  c.synthetic.n_anchors = 6;
  c.model.latent_dim = 8;
  c.model.hidden_dim = 12;
  c.optim.epochs = 2;
  c.optim.batch_size = 8;
  c.optim.lr = 1e-3;
  c.manifest = (root / "data" / "manifest.json").string();
  c.output_dir = (root / "run").string();
  write_synthetic(generate_synthetic(c.synthetic, c.seed), root / "data");
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST(Train, SameSeedIsBitwiseReproducible) {
  auto root = testing::scratch_dir("train_det");
  RunConfig c = small_config(root);
  Corpus corpus = load_corpus(c.manifest);
  TrainResult a = train(c, corpus);
  const std::string log_a = slurp(fs::path(c.output_dir) / "metrics.jsonl");
  const std::string ck_a = slurp(fs::path(c.output_dir) / "final.ckpt");
  TrainResult b = train(c, corpus);
  ASSERT_EQ(a.step_losses.size(), b.step_losses.size());
  for (std::size_t i = 0; i < a.step_losses.size(); ++i) EXPECT_EQ(a.step_losses[i].total, b.step_losses[i].total);
  EXPECT_EQ(log_a, slurp(fs::path(c.output_dir) / "metrics.jsonl"));
  EXPECT_EQ(ck_a, slurp(fs::path(c.output_dir) / "final.ckpt"));

  c.seed = 1;
  c.optim.seed = 1;
  TrainResult other = train(c, corpus, {false, {}, nullptr});
  EXPECT_NE(other.step_losses[0].total, a.step_losses[0].total);
}

TEST(Train, LogHasHeaderThenOneRecordPerEpoch) {
  auto root = testing::scratch_dir("train_files");
  RunConfig c = small_config(root);
  train(c, load_corpus(c.manifest));
  std::ifstream in(fs::path(c.output_dir) / "metrics.jsonl");
  std::vector<nlohmann::json> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), 1u + 1u + c.optim.epochs);
  EXPECT_EQ(lines[0]["type"], "header");
  EXPECT_EQ(lines[0]["config"]["optim"]["lr"], 1e-3);
  EXPECT_EQ(lines[0]["config"]["model"]["temperature"], 5.0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i]["type"], "eval");
    EXPECT_EQ(lines[i]["epoch"], i - 1);
    EXPECT_TRUE(lines[i]["val"].contains("r1"));
  }
  EXPECT_GT(lines.back()["train"]["rec"].get<double>(), 0.0);
}

TEST(Train, EpochsZeroEvaluatesOnly) {
  auto root = testing::scratch_dir("train_zero");
  RunConfig c = small_config(root);
  c.optim.epochs = 0;
  Corpus corpus = load_corpus(c.manifest);
  TrainResult r = train(c, corpus);
  EXPECT_TRUE(r.step_losses.empty());
  ASSERT_EQ(r.evaluations.size(), 1u);
  CalmModel fresh = build_model(c, corpus);
  auto a = fresh.state(), b = r.final_model.state();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].tensor.size(); ++j) EXPECT_EQ(a[i].tensor[j], b[i].tensor[j]) << a[i].name;
}

TEST(Train, OnlyTrainableParametersChange) {
  auto root = testing::scratch_dir("train_frozen");
  RunConfig c = small_config(root);
  Corpus corpus = load_corpus(c.manifest);
  TrainResult r = train(c, corpus, {false, {}, nullptr});
  CalmModel fresh = build_model(c, corpus);
  for (std::size_t j = 0; j < fresh.anchors.base().size(); ++j)
    EXPECT_EQ(fresh.anchors.base()[j], r.final_model.anchors.base()[j]);
  bool moved = false;
  for (std::size_t j = 0; j < fresh.anchors.positional().size(); ++j)
    moved |= fresh.anchors.positional()[j] != r.final_model.anchors.positional()[j];
  EXPECT_TRUE(moved);
  EXPECT_EQ(r.final_model.temperature.value(), 5.0);
}

TEST(Train, MaxStepsCapsTheRun) {
  auto root = testing::scratch_dir("train_cap");
  RunConfig c = small_config(root);
  c.optim.epochs = 50;
  c.optim.max_steps = 7;
  TrainResult r = train(c, load_corpus(c.manifest), {false, {}, nullptr});
  EXPECT_EQ(r.step_losses.size(), 7u);
  EXPECT_EQ(r.evaluations.back().step, 7u);
}

TEST(Train, BestCheckpointReproducesLoggedMetrics) {
  auto root = testing::scratch_dir("train_best");
  RunConfig c = small_config(root);
  c.optim.epochs = 3;
  Corpus corpus = load_corpus(c.manifest);
  TrainResult r = train(c, corpus);
  CalmModel best = model_from_checkpoint(read_checkpoint(fs::path(c.output_dir) / "best.ckpt"));
  EXPECT_EQ(evaluate(best, corpus, "val").to_json_text(), r.best_val.to_json_text());
  for (const char* f : {"run_header.json", "config.resolved.json", "metrics.jsonl", "final.ckpt"})
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / f)) << f;
}

TEST(Train, ResolvedConfigReplaysByteForByte) {
  auto root = testing::scratch_dir("train_replay");
  RunConfig c = small_config(root);
  Corpus corpus = load_corpus(c.manifest);
  train(c, corpus);
  const auto first = slurp(fs::path(c.output_dir) / "final.ckpt");
  RunConfig again = load_run_config(fs::path(c.output_dir) / "config.resolved.json");
  train(again, corpus);
  EXPECT_EQ(first, slurp(fs::path(c.output_dir) / "final.ckpt"));
}

TEST(Harness, GradcheckDeskConfig) {
  RunConfig c;
  c.model.latent_dim = 3;
  c.model.hidden_dim = 4;
  GradcheckReport r = model_gradcheck(c);
  EXPECT_LE(r.max_rel_error, 1e-5);
  EXPECT_GE(r.entries.size(), 13u);
}

TEST(Harness, AblationHasFiveRowsSharingData) {
  auto root = testing::scratch_dir("ablate");
  RunConfig c = small_config(root);
  c.optim.epochs = 1;
  auto rows = run_ablation(c, load_corpus(c.manifest), false);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(rows[i].mode, kAblationModes[i]);
    EXPECT_EQ(rows[i].data_checksum, rows[0].data_checksum);
  }
  auto j = ablation_json(rows, c);
  EXPECT_EQ(j["rows"].size(), 5u);
  const std::string table = ablation_table(rows);
  for (const char* m : {"BASELINE", "KL_DIV", "CROSS_ENTROPY", "MSE", "CALM"})
    EXPECT_NE(table.find(m), std::string::npos);
}

}  // namespace
}  // namespace calm
