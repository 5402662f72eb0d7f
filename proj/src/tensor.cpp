#include "calm/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "calm/error.hpp"

namespace calm {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<TensorImpl>()) {
  if (shape.size() > 2) throw DimensionError("tensor rank above 2: " + shape_string(shape));
  if (shape_size(shape) != data.size()) {
    throw DimensionError("shape " + shape_string(shape) + " needs " +
                         std::to_string(shape_size(shape)) + " values, got " +
                         std::to_string(data.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({}, {value}, requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows,
                      bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data), requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values), requires_grad);
}

std::size_t Tensor::rows() const { return rank() == 2 ? impl_->shape[0] : 1; }

std::size_t Tensor::cols() const {
  switch (rank()) {
    case 0: return 1;
    case 1: return impl_->shape[0];
    default: return impl_->shape[1];
  }
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
  return impl_->data[0];
}

std::span<double> Tensor::grad_sink() {
  if (!impl_->requires_grad) return {};
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->data, false); }

Tensor Tape::record(Tensor out, std::initializer_list<Tensor> inputs, BackwardFn backward) {
  bool needs = false;
  for (const auto& in : inputs) {
    if (in.impl()->tape != nullptr && in.impl()->tape != this)
      throw ContractError("op input was produced on a different tape");
    needs = needs || in.requires_grad();
  }
  if (!needs) return out;
  out.set_requires_grad(true);
  out.impl()->tape = this;
  nodes_.push_back(Node{std::vector<Tensor>(inputs), out, std::move(backward)});
  return out;
}

void Tape::backward(const Tensor& root) {
  if (!root.defined() || root.size() != 1)
    throw ContractError("backward root must be a scalar, got " +
                        (root.defined() ? shape_string(root.shape()) : std::string("<null>")));
  if (root.impl()->tape != this)
    throw ContractError("backward root was not produced on this tape");

  for (auto& node : nodes_) {
    auto& g = node.output.impl()->grad;
    g.assign(node.output.size(), 0.0);
  }

  // Each pass accumulates into a fresh leaf buffer which is then added to
  // the prior gradient once, so repeated passes sum exactly.
  std::vector<std::pair<TensorImpl*, std::vector<double>>> leaves;
  for (auto& node : nodes_) {
    for (auto& in : node.inputs) {
      TensorImpl* impl = in.impl();
      if (impl->tape != nullptr || !impl->requires_grad) continue;
      const bool seen = std::any_of(leaves.begin(), leaves.end(),
                                    [impl](const auto& l) { return l.first == impl; });
      if (seen) continue;
      leaves.emplace_back(impl, std::move(impl->grad));
      impl->grad.assign(impl->data.size(), 0.0);
    }
  }

  const_cast<TensorImpl*>(root.impl())->grad[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const auto& g = it->output.impl()->grad;
    if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) continue;
    it->backward(g);
  }

  for (auto& [impl, prior] : leaves) {
    if (prior.empty()) continue;
    for (std::size_t i = 0; i < prior.size(); ++i) impl->grad[i] = prior[i] + impl->grad[i];
  }
}

}  // namespace calm
