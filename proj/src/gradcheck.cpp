#include "calm/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "calm/error.hpp"

namespace calm {

namespace {

double evaluate(const ScalarFn& f) {
  Tape tape;
  const double v = f(tape).item();
  if (!std::isfinite(v)) throw NumericError("finite_diff_check: objective is not finite");
  return v;
}

}  // namespace

GradcheckReport finite_diff_check(const ScalarFn& f, const std::vector<NamedTensor>& params,
                                  double h) {
  if (!(h > 0.0)) throw ContractError("finite_diff_check: step must be positive");

  std::vector<Tensor> checked;
  std::vector<std::vector<double>> saved_grads;
  for (const auto& p : params) {
    if (!p.tensor.requires_grad()) continue;
    Tensor t = p.tensor;
    saved_grads.emplace_back(t.grad().begin(), t.grad().end());
    t.zero_grad();
    checked.push_back(t);
  }

  {
    Tape tape;
    Tensor root = f(tape);
    if (!std::isfinite(root.item()))
      throw NumericError("finite_diff_check: objective is not finite");
    tape.backward(root);
  }

  GradcheckReport report;
  std::size_t slot = 0;
  for (const auto& p : params) {
    if (!p.tensor.requires_grad()) continue;
    Tensor t = checked[slot];
    std::vector<double> analytic(t.size(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());

    GradcheckEntry entry{p.name, t.size(), 0.0};
    auto values = t.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + h;
      const double up = evaluate(f);
      values[i] = original - h;
      const double down = evaluate(f);
      values[i] = original;
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      entry.max_rel_error = std::max(entry.max_rel_error, err);
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));

    auto grad = t.grad_sink();
    const auto& prior = saved_grads[slot];
    if (prior.empty()) {
      std::fill(grad.begin(), grad.end(), 0.0);
    } else {
      std::copy(prior.begin(), prior.end(), grad.begin());
    }
    ++slot;
  }
  return report;
}

}  // namespace calm
