#pragma once

#include <cstdint>
#include <vector>

#include "calm/gradcheck.hpp"

namespace calm {

struct OptimConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::size_t batch_size = 32;
  std::size_t epochs = 5;
  std::size_t max_steps = 0;  // 0: no cap
  std::uint64_t seed = 0;

  void validate() const;
};

/// First/second moments per parameter, mirroring parameter shapes.
struct AdamWState {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::uint64_t step = 0;
};

AdamWState make_adamw_state(const std::vector<NamedTensor>& params);

/// One bias-corrected Adam update with decoupled weight decay:
///   θ ← θ − lr·(m̂ / (√v̂ + eps) + wd·θ)
/// Gradients are read from each tensor's grad buffer (absent = zero). If any
/// gradient is non-finite nothing is updated and NumericError names the
/// offending parameter.
void adamw_step(const std::vector<NamedTensor>& params, AdamWState& state,
                const OptimConfig& config);

}  // namespace calm
