#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "calm/cvae.hpp"
#include "calm/error.hpp"
#include "calm/gradcheck.hpp"
#include "calm/ops.hpp"
#include "test_util.hpp"

namespace calm {
namespace {

using testing::random_tensor;

AnchorDistribution dist(Tensor probs, Modality m = Modality::Text) { return {std::move(probs), m}; }

Tensor random_simplex(std::size_t rows, std::size_t k, Rng& rng) {
  Tape tape;
  return ops::softmax_rows(tape, random_tensor({rows, k}, rng, -2, 2)).detach();
}

TEST(Encode, ZeroWeightsGiveStandardPosterior) {
  CvaeParams p = CvaeParams::zeros({4, 6, 3});
  Rng rng(1);
  Tape tape;
  Posterior post = encode(tape, dist(random_simplex(2, 4, rng)), p);
  for (double v : post.mu.data()) EXPECT_EQ(v, 0.0);
  for (double v : post.logvar.data()) EXPECT_EQ(v, 0.0);
}

TEST(Encode, WrongWidthThrows) {
  CvaeParams p = CvaeParams::zeros({4, 6, 3});
  Rng rng(1);
  Tape tape;
  EXPECT_THROW(encode(tape, dist(random_simplex(2, 5, rng)), p), DimensionError);
}

TEST(Decode, ZeroWeightsGiveUniform) {
  CvaeParams p = CvaeParams::zeros({5, 6, 3});
  Rng rng(2);
  Tape tape;
  Reconstruction r = decode(tape, random_tensor({3, 3}, rng), p);
  for (double v : r.probs.data()) EXPECT_NEAR(v, 0.2, 1e-15);
}

TEST(Reparameterize, Examples) {
  Rng rng(3);
  Tensor mu = random_tensor({2, 3}, rng);
  Tensor lv = random_tensor({2, 3}, rng);
  Tape tape;
  LatentSample s = reparameterize(tape, mu, lv, Tensor::zeros({2, 3}));
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_EQ(s.z[i], mu[i]);
  Tensor e = random_tensor({2, 3}, rng);
  LatentSample t = reparameterize(tape, mu, Tensor::zeros({2, 3}), e);
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_EQ(t.z[i], mu[i] + e[i]);
}

TEST(Reparameterize, ShiftInMuShiftsZ) {
  Rng rng(4);
  Tensor mu = random_tensor({1, 4}, rng);
  Tensor lv = random_tensor({1, 4}, rng);
  Tensor eps = random_tensor({1, 4}, rng);
  Tensor mu2 = mu.detach();
  for (auto& v : mu2.mutable_data()) v += 0.25;
  Tape tape;
  Tensor z1 = reparameterize(tape, mu, lv, eps).z;
  Tensor z2 = reparameterize(tape, mu2, lv, eps).z;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(z2[i] - z1[i], 0.25, 1e-15);
}

TEST(Reparameterize, MonteCarloMoments) {
  // mean and variance of z over 1e5 draws
  Tensor mu = Tensor::matrix({{0.7, -1.2}});
  Tensor lv = Tensor::matrix({{0.4, -0.9}});
  Rng rng(5);
  const int n = 100000;
  double s[2] = {0, 0}, s2[2] = {0, 0};
  for (int i = 0; i < n; ++i) {
    Tape tape;
    Tensor z = reparameterize(tape, mu, lv, rng).z;
    for (int j = 0; j < 2; ++j) {
      s[j] += z[j];
      s2[j] += z[j] * z[j];
    }
  }
  for (int j = 0; j < 2; ++j) {
    const double mean = s[j] / n, var = s2[j] / n - mean * mean;
    const double sd = std::exp(0.5 * lv[j]);
    EXPECT_NEAR(mean, mu[j], 4 * sd / std::sqrt(n));
    EXPECT_NEAR(var, sd * sd, 0.02 * sd * sd);
  }
}

TEST(RecLoss, HandValues) {
  Tape tape;
  EXPECT_NEAR(rec_loss(tape, dist(Tensor::matrix({{1, 0}})), {Tensor::matrix({{0.5, 0.5}})}).item(),
              0.6931, 1e-4);
  EXPECT_NEAR(rec_loss(tape, dist(Tensor::matrix({{1, 0}})), {Tensor::matrix({{0.5, 0.5}})}).item(),
              std::log(2.0), 1e-6);
  Tensor u = Tensor::full({1, 4}, 0.25);
  EXPECT_NEAR(rec_loss(tape, dist(u), {u}).item(), std::log(4.0), 1e-6);
  EXPECT_THROW(rec_loss(tape, dist(u), {Tensor::full({1, 3}, 1.0 / 3)}), DimensionError);
}

TEST(RecLoss, BoundedBelowByEntropy) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Tensor t = random_simplex(3, 6, rng);
    Tensor r = random_simplex(3, 6, rng);
    Tape tape;
    const double h = entropy(t);
    EXPECT_NEAR(rec_loss(tape, dist(t), {t}).item(), h, 1e-12);
    EXPECT_GE(rec_loss(tape, dist(t), {r}).item(), h - 1e-12);
  }
}

TEST(KlLoss, HandValues) {
  Tape tape;
  EXPECT_EQ(kl_loss(tape, Tensor::zeros({1, 3}), Tensor::zeros({1, 3})).item(), 0.0);
  EXPECT_NEAR(kl_loss(tape, Tensor::matrix({{1, 0}}), Tensor::zeros({1, 2})).item(), 0.5, 1e-15);
}

TEST(KlLoss, NonNegative) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    Tape tape;
    EXPECT_GE(kl_loss(tape, random_tensor({2, 4}, rng, -2, 2), random_tensor({2, 4}, rng, -2, 2)).item(), 0.0);
  }
}

TEST(KlLoss, MatchesMonteCarloEstimate) {
  Rng rng(6);
  const std::size_t d = 4;
  Tensor mu = random_tensor({1, d}, rng);
  Tensor lv = random_tensor({1, d}, rng);
  Tape tape;
  const double closed = kl_loss(tape, mu, lv).item();
  // E_q[log q(z) - log p(z)]
  const int n = 100000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double e = rng.normal();
      const double z = mu[j] + std::exp(0.5 * lv[j]) * e;
      acc += -0.5 * lv[j] - 0.5 * e * e + 0.5 * z * z;
    }
  }
  EXPECT_NEAR(acc / n, closed, 0.01 * closed);
}

TEST(CvaeForward, DeterministicWithFrozenNoise) {
  CvaeShape shape{5, 4, 3};
  auto run = [&] {
    Rng init(7), eps(8), drop(9), data(10);
    CvaeParams p = CvaeParams::init(shape, init);
    CvaeNoise noise = sample_noise(shape, 1, eps, drop, true);
    Tape tape;
    CvaeOutput out = cvae_forward(tape, dist(random_simplex(1, 5, data), Modality::Video),
                                  dist(random_simplex(1, 5, data)), p, noise);
    return std::make_pair(out.rec.item(), out.kl.item());
  };
  auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(CvaeForward, GradcheckAllParameters) {
  for (Activation act : {Activation::Tanh, Activation::Relu}) {
    CvaeShape shape{5, 4, 3, act, 0.1};
    Rng init(11), eps(12), drop(13), data(14);
    CvaeParams p = CvaeParams::init(shape, init);
    CvaeNoise noise = sample_noise(shape, 4, eps, drop, true);
    Tensor vlogits = random_tensor({4, 5}, data, -2, 2, true);
    Tensor slogits = random_tensor({4, 5}, data, -2, 2, false);
    auto f = [&](Tape& t) {
      CvaeOutput out = cvae_forward(t, dist(ops::softmax_rows(t, vlogits), Modality::Video),
                                    dist(ops::softmax_rows(t, slogits)), p, noise);
      return ops::add(t, out.rec, ops::scale(t, out.kl, 0.1));
    };
    auto params = p.parameters();
    params.push_back({"vp_logits", vlogits});
    auto report = finite_diff_check(f, params);
    EXPECT_LE(report.max_rel_error, 1e-5) << to_string(act);
    EXPECT_EQ(report.entries.size(), 11u);
  }
}

TEST(CvaeForward, TargetGradientBlocked) {
  CvaeShape shape{4, 5, 3};
  Rng init(15), eps(16), drop(17), data(18);
  CvaeParams p = CvaeParams::init(shape, init);
  CvaeNoise noise = sample_noise(shape, 2, eps, drop, false);
  Tensor sl = random_tensor({2, 4}, data, -1, 1, true);
  Tensor vl = random_tensor({2, 4}, data, -1, 1, true);
  for (bool block : {true, false}) {
    sl.zero_grad();
    Tape tape;
    CvaeOutput out = cvae_forward(tape, dist(ops::softmax_rows(tape, vl), Modality::Video),
                                  dist(ops::softmax_rows(tape, sl)), p, noise, CvaeOptions{block});
    tape.backward(out.rec);
    double norm = 0.0;
    if (sl.has_grad())
      for (double g : sl.grad()) norm += std::abs(g);
    if (block)
      EXPECT_EQ(norm, 0.0);
    else
      EXPECT_GT(norm, 0.0);
  }
}

TEST(SampleNoise, NoMasksOutsideTraining) {
  CvaeShape shape{4, 5, 3};
  Rng a(1), b(2);
  CvaeNoise n = sample_noise(shape, 2, a, b, false);
  EXPECT_FALSE(n.enc_mask.defined());
  EXPECT_EQ(n.eps.shape(), (Shape{2, 3}));
}

TEST(Activation, ParsesNames) {
  EXPECT_EQ(activation_from_string("relu"), Activation::Relu);
  EXPECT_EQ(activation_from_string("tanh"), Activation::Tanh);
  EXPECT_THROW(activation_from_string("gelu"), ConfigError);
}

}  // namespace
}  // namespace calm
