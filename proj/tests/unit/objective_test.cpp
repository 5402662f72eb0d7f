#include <gtest/gtest.h>

#include <cmath>

#include "calm/error.hpp"
#include "calm/gradcheck.hpp"
#include "calm/model.hpp"
#include "calm/objective.hpp"
#include "calm/ops.hpp"
#include "test_util.hpp"

namespace calm {
namespace {

using testing::random_tensor;

AnchorDistribution dist(Tensor probs, Modality m) { return {std::move(probs), m}; }

struct Fixture {
  CalmModel model;
  Batch batch;
  CvaeNoise noise;
};

Fixture make_fixture(std::uint64_t seed, std::size_t b = 4, std::size_t k = 5, std::size_t d = 6,
                     std::size_t t = 3) {
  Rng rng(seed);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < k; ++i) labels.push_back("a" + std::to_string(i));
  ModelConfig cfg;
  cfg.latent_dim = 3;
  cfg.hidden_dim = 4;
  CalmModel model = CalmModel::init(cfg, AnchorSet(random_tensor({k, d}, rng), labels), rng);
  Batch batch{random_tensor({b * t, d}, rng), random_tensor({b, d}, rng), t};
  Rng eps(seed + 100), drop(seed + 200);
  CvaeNoise noise = sample_noise(model.cvae.shape, b, eps, drop, true);
  return {std::move(model), std::move(batch), std::move(noise)};
}

TEST(TaskLoss, SingleSampleIsZero) {
  Tape tape;
  EXPECT_EQ(task_loss(tape, Tensor::matrix({{1, 2}}), Tensor::matrix({{-1, 0.5}}), 14.0).item(), 0.0);
}

TEST(TaskLoss, AlignedOrthonormalPairsApproachZero) {
  Tape tape;
  Tensor e = Tensor::matrix({{1, 0}, {0, 1}});
  EXPECT_LT(task_loss(tape, e, e, 100.0).item(), 1e-40);
}

TEST(TaskLoss, UniformSimilaritiesGiveLogTwo) {
  Tape tape;
  Tensor v = Tensor::matrix({{1, 0}, {1, 0}});
  EXPECT_NEAR(task_loss(tape, v, v, 14.0).item(), std::log(2.0), 1e-6);
}

TEST(TaskLoss, EmptyBatchThrows) {
  Tape tape;
  EXPECT_THROW(task_loss(tape, Tensor::zeros({0, 2}), Tensor::zeros({0, 2}), 1.0), EmptyInputError);
}

TEST(AlignmentLoss, DiscriminativeExamples) {
  Tape tape;
  Rng rng(1);
  Tensor p = ops::softmax_rows(tape, random_tensor({3, 4}, rng)).detach();
  LossConfig cfg;
  cfg.mode = AlignMode::Mse;
  EXPECT_EQ(alignment_loss(tape, dist(p, Modality::Video), dist(p, Modality::Text), nullptr, cfg).item(), 0.0);
  cfg.mode = AlignMode::KlDiv;
  EXPECT_NEAR(alignment_loss(tape, dist(p, Modality::Video), dist(p, Modality::Text), nullptr, cfg).item(), 0.0, 1e-10);
  cfg.mode = AlignMode::CrossEntropy;
  EXPECT_NEAR(alignment_loss(tape, dist(Tensor::matrix({{0.5, 0.5}}), Modality::Video),
                             dist(Tensor::matrix({{1, 0}}), Modality::Text), nullptr, cfg)
                  .item(),
              0.6931, 1e-4);
  cfg.mode = AlignMode::Baseline;
  EXPECT_EQ(alignment_loss(tape, dist(p, Modality::Video), dist(p, Modality::Text), nullptr, cfg).item(), 0.0);
}

TEST(AlignmentLoss, CalmWithoutVaeOutputThrows) {
  Tape tape;
  Tensor p = Tensor::matrix({{0.5, 0.5}});
  EXPECT_THROW(alignment_loss(tape, dist(p, Modality::Video), dist(p, Modality::Text), nullptr, {}),
               ContractError);
}

TEST(AlignmentLoss, AllModesNonNegative) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Tape tape;
    Tensor a = ops::softmax_rows(tape, random_tensor({2, 5}, rng, -3, 3));
    Tensor b = ops::softmax_rows(tape, random_tensor({2, 5}, rng, -3, 3));
    for (AlignMode m : {AlignMode::KlDiv, AlignMode::CrossEntropy, AlignMode::Mse}) {
      LossConfig cfg;
      cfg.mode = m;
      EXPECT_GE(alignment_loss(tape, dist(a, Modality::Video), dist(b, Modality::Text), nullptr, cfg).item(), 0.0);
    }
  }
}

TEST(TotalLoss, BaselineEqualsTaskLoss) {
  Fixture fx = make_fixture(2);
  LossConfig cfg;
  cfg.mode = AlignMode::Baseline;
  Tape tape;
  TotalLoss out = total_loss(tape, fx.batch, fx.model, cfg, fx.noise);
  Tensor v = fx.model.video_features(tape, fx.batch.frames, fx.batch.frames_per_video);
  Tensor s = fx.model.text_features(tape, fx.batch.text);
  EXPECT_EQ(out.total.item(), task_loss(tape, v, s, cfg.task_temperature).item());
}

TEST(TotalLoss, BaselineIgnoresAnchors) {
  Fixture fx = make_fixture(3);
  LossConfig cfg;
  cfg.mode = AlignMode::Baseline;
  Tape t1;
  const double before = total_loss(t1, fx.batch, fx.model, cfg, fx.noise).total.item();
  for (auto& v : fx.model.anchors.positional().mutable_data()) v += 0.7;
  Tape t2;
  EXPECT_EQ(total_loss(t2, fx.batch, fx.model, cfg, fx.noise).total.item() - before, 0.0);
}

TEST(TotalLoss, ReportSumsToTotal) {
  for (AlignMode m : {AlignMode::Calm, AlignMode::KlDiv, AlignMode::CrossEntropy, AlignMode::Mse,
                      AlignMode::Baseline}) {
    Fixture fx = make_fixture(4);
    LossConfig cfg;
    cfg.mode = m;
    Tape tape;
    TotalLoss out = total_loss(tape, fx.batch, fx.model, cfg, fx.noise);
    EXPECT_NEAR(out.report.sum_of_terms(), out.report.total, 1e-10) << to_string(m);
    EXPECT_EQ(out.report.total, out.total.item());
  }
}

TEST(TotalLoss, AlphaZeroDropsKl) {
  Fixture fx = make_fixture(5);
  LossConfig cfg;
  cfg.alpha = 0.0;
  Tape tape;
  TotalLoss out = total_loss(tape, fx.batch, fx.model, cfg, fx.noise);
  EXPECT_GT(out.report.kl, 0.0);
  EXPECT_NEAR(out.report.total, out.report.task + out.report.rec, 1e-12);
}

TEST(TotalLoss, GradcheckEveryModeAndParameter) {
  struct Variant {
    AlignMode mode;
    bool block;
  };
  for (Variant v : {Variant{AlignMode::Calm, true}, Variant{AlignMode::Calm, false},
                    Variant{AlignMode::KlDiv, true}, Variant{AlignMode::CrossEntropy, true},
                    Variant{AlignMode::Mse, true}, Variant{AlignMode::Baseline, true}}) {
    Fixture fx = make_fixture(6);
    // move off the identity/zero initialization so every path is exercised
    Rng rng(60);
    for (auto& p : fx.model.parameters())
      for (auto& x : p.tensor.mutable_data()) x += 0.1 * rng.normal();
    LossConfig cfg;
    cfg.mode = v.mode;
    cfg.block_target_grad = v.block;
    Tensor target;
    if (v.mode == AlignMode::Calm && v.block) {
      Tape probe;
      target = total_loss(probe, fx.batch, fx.model, cfg, fx.noise).target;
    }
    auto f = [&](Tape& t) { return total_loss(t, fx.batch, fx.model, cfg, fx.noise, target).total; };
    auto report = finite_diff_check(f, fx.model.parameters());
    EXPECT_LE(report.max_rel_error, 1e-5) << to_string(v.mode) << " block " << v.block;
  }
}

std::vector<double> text_grad(Fixture& fx, const LossConfig& cfg, const Tensor& target = {}) {
  for (auto& p : fx.model.parameters()) p.tensor.zero_grad();
  Tape tape;
  tape.backward(total_loss(tape, fx.batch, fx.model, cfg, fx.noise, target).total);
  auto g = fx.model.text_adapter.weight.grad();
  return {g.begin(), g.end()};
}

TEST(TotalLoss, FixedTargetMatchesBlockedGradient) {
  Fixture fx = make_fixture(7);
  LossConfig cfg;
  Tape probe;
  Tensor target = total_loss(probe, fx.batch, fx.model, cfg, fx.noise).target;
  EXPECT_EQ(text_grad(fx, cfg), text_grad(fx, cfg, target));
  LossConfig open = cfg;
  open.block_target_grad = false;
  EXPECT_NE(text_grad(fx, cfg), text_grad(fx, open));
  Tape t;
  EXPECT_THROW(total_loss(t, fx.batch, fx.model, open, fx.noise, target), ContractError);
}

TEST(AlignMode, ParsesNames) {
  EXPECT_EQ(align_mode_from_string("KL_DIV"), AlignMode::KlDiv);
  EXPECT_EQ(to_string(AlignMode::CrossEntropy), "CROSS_ENTROPY");
  EXPECT_THROW(align_mode_from_string("calm"), ConfigError);
}

}  // namespace
}  // namespace calm
