#include <gtest/gtest.h>

#include <cmath>

#include "calm/error.hpp"
#include "calm/gradcheck.hpp"
#include "calm/optim.hpp"

namespace calm {
namespace {

OptimConfig plain(double lr, double wd) {
  OptimConfig c;
  c.lr = lr;
  c.weight_decay = wd;
  return c;
}

TEST(AdamW, ZeroGradNoDecayIsFixedPoint) {
  Tensor w = Tensor::matrix({{1.5, -2}}, true);
  std::vector<NamedTensor> params{{"w", w}};
  auto state = make_adamw_state(params);
  w.grad_sink();
  adamw_step(params, state, plain(0.1, 0.0));
  EXPECT_EQ(w[0], 1.5);
  EXPECT_EQ(w[1], -2.0);
  EXPECT_EQ(state.step, 1u);
}

TEST(AdamW, FirstStepMovesByLr) {
  Tensor w = Tensor::scalar(1.0, true);
  std::vector<NamedTensor> params{{"w", w}};
  auto state = make_adamw_state(params);
  w.grad_sink()[0] = 1.0;
  adamw_step(params, state, plain(0.1, 0.0));
  EXPECT_NEAR(w[0], 0.9, 1e-6);
}

TEST(AdamW, DecayOnly) {
  Tensor w = Tensor::scalar(1.0, true);
  std::vector<NamedTensor> params{{"w", w}};
  auto state = make_adamw_state(params);
  w.grad_sink();
  adamw_step(params, state, plain(0.1, 0.1));
  EXPECT_DOUBLE_EQ(w[0], 0.99);
}

TEST(AdamW, MatchesHandRolledReference) {
  const double lr = 0.05, wd = 0.02, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Tensor w = Tensor::scalar(0.3, true);
  std::vector<NamedTensor> params{{"w", w}};
  auto state = make_adamw_state(params);
  double theta = 0.3, m = 0, v = 0;
  const double grads[] = {0.5, -1.0, 0.25, 2.0};
  for (int t = 1; t <= 4; ++t) {
    const double g = grads[t - 1];
    w.zero_grad();
    w.grad_sink()[0] = g;
    adamw_step(params, state, plain(lr, wd));
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    theta -= lr * (mh / (std::sqrt(vh) + eps) + wd * theta);
    EXPECT_NEAR(w[0], theta, 1e-14);
  }
}

TEST(AdamW, NonFiniteGradAbortsWithoutUpdating) {
  Tensor a = Tensor::scalar(1.0, true);
  Tensor b = Tensor::scalar(2.0, true);
  std::vector<NamedTensor> params{{"a", a}, {"b", b}};
  auto state = make_adamw_state(params);
  a.grad_sink()[0] = 1.0;
  b.grad_sink()[0] = NAN;
  try {
    adamw_step(params, state, plain(0.1, 0.0));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
  EXPECT_EQ(a[0], 1.0);
  EXPECT_EQ(state.step, 0u);
}

TEST(OptimConfig, Validates) {
  EXPECT_THROW(plain(0.0, 0.0).validate(), ConfigError);
  OptimConfig c;
  c.beta1 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = OptimConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(OptimConfig{}.validate());
}

}  // namespace
}  // namespace calm
