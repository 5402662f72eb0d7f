#pragma once

#include <functional>
#include <string>
#include <vector>

#include "calm/tensor.hpp"

namespace calm {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct GradcheckEntry {
  std::string name;
  std::size_t elements = 0;
  double max_rel_error = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;  // one per checked parameter
  double max_rel_error = 0.0;
};

/// Builds a scalar on the given tape. Must be deterministic: any noise
/// (dropout masks, ε) has to be frozen outside the closure.
using ScalarFn = std::function<Tensor(Tape&)>;

/// Compares tape gradients with central differences, element by element.
/// The error is |g_ad - g_fd| / max(1, |g_fd|). Parameters that do not
/// require grad are skipped. Parameter values and gradients are restored.
GradcheckReport finite_diff_check(const ScalarFn& f, const std::vector<NamedTensor>& params,
                                  double h = 1e-5);

}  // namespace calm
