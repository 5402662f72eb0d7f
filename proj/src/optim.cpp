#include "calm/optim.hpp"

#include <cmath>
#include <string>

#include "calm/error.hpp"

namespace calm {

void OptimConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("optim.lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("optim.beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("optim.beta2 must be in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("optim.eps must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("optim.weight_decay must be non-negative");
  if (batch_size == 0) throw ConfigError("optim.batch_size must be at least 1");
}

AdamWState make_adamw_state(const std::vector<NamedTensor>& params) {
  AdamWState s;
  for (const auto& p : params) {
    s.first.emplace_back(p.tensor.size(), 0.0);
    s.second.emplace_back(p.tensor.size(), 0.0);
  }
  return s;
}

void adamw_step(const std::vector<NamedTensor>& params, AdamWState& state,
                const OptimConfig& config) {
  if (state.first.size() != params.size())
    throw ContractError("adamw_step: optimizer state does not match parameter list");

  for (const auto& p : params) {
    const auto g = p.tensor.grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericError("adamw_step: non-finite gradient in " + p.name + " at element " +
                           std::to_string(i) + " (step " + std::to_string(state.step + 1) + ")");
      }
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor param = params[k].tensor;
    auto theta = param.mutable_data();
    const auto g = param.grad();
    auto& m = state.first[k];
    auto& v = state.second[k];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * gi;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * gi * gi;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= config.lr * (m_hat / (std::sqrt(v_hat) + config.eps) +
                               config.weight_decay * theta[i]);
    }
  }
}

}  // namespace calm
