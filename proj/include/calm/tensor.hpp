#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace calm {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

class Tape;

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  const Tape* tape = nullptr;  // producer; null for leaves
};

/// Dense row-major float64 array with an optional gradient accumulator.
///
/// A Tensor is a shared handle: copies alias the same storage, which is how
/// the tape and the optimizer see the same parameter. Rank-0 and rank-1
/// tensors are viewed as a single row by the matrix ops.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// Builds an r×c matrix from nested braces; rows must be equal length.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t size() const { return impl_->data.size(); }
  std::size_t rank() const { return impl_->shape.size(); }
  /// Row count under the matrix view (1 for rank < 2).
  std::size_t rows() const;
  /// Column count under the matrix view.
  std::size_t cols() const;

  std::span<const double> data() const { return impl_->data; }
  /// Direct write access; only the optimizer and loaders should use this.
  std::span<double> mutable_data() { return impl_->data; }
  double operator[](std::size_t i) const { return impl_->data[i]; }
  double at(std::size_t r, std::size_t c) const { return impl_->data[r * cols() + c]; }
  /// Value of a one-element tensor.
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool flag) { impl_->requires_grad = flag; }
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const { return impl_->grad; }
  /// Gradient buffer for accumulation; allocated (zeroed) on first use.
  /// Empty when the tensor does not require grad.
  std::span<double> grad_sink();
  void zero_grad();

  bool is_leaf() const { return impl_->tape == nullptr; }
  /// Copy of the values with no gradient and no tape link.
  Tensor detach() const;

  const TensorImpl* impl() const { return impl_.get(); }
  TensorImpl* impl() { return impl_.get(); }
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

/// Ordered record of primitive ops for reverse-mode differentiation.
///
/// Nodes are appended as ops execute, so inputs always precede the nodes
/// that consume them. Only ops with at least one grad-requiring input are
/// recorded. A tape lives for one forward/backward; start a new one per
/// step. Not thread-safe.
class Tape {
 public:
  /// Reads the output gradient, accumulates into input grad sinks.
  using BackwardFn = std::function<void(std::span<const double> out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers `out` as produced from `inputs`. If no input requires grad
  /// the node is dropped and `out` stays a constant.
  Tensor record(Tensor out, std::initializer_list<Tensor> inputs, BackwardFn backward);

  /// Accumulates ∂root/∂leaf into every reachable grad-requiring leaf.
  /// Intermediate gradients are reset at the start of each call, so calling
  /// twice doubles leaf gradients exactly.
  void backward(const Tensor& root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

}  // namespace calm
