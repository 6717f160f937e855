#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpp/grid.hpp"

namespace fpp::nn {

/// Backward called twice, or an optimizer step without gradients.
class InvalidStateError : public std::logic_error {
 public:
  explicit InvalidStateError(const std::string& what) : std::logic_error(what) {}
};

struct TensorImpl {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;

  // Reverse-mode graph: set on op outputs, cleared once backward consumes it.
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void(TensorImpl&)> backward_fn;
  bool consumed = false;

  std::size_t numel() const { return data.size(); }
  void accumulate_grad(std::size_t i, double g) {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    grad[i] += g;
  }
  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
  }
};

/// Value-semantics handle to a shared n-d array with optional gradient.
/// Ops on tensors record a reverse-mode graph when any input requires grad.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<std::size_t> shape, double value,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// 1xHxW tensor copied from a grid.
  static Tensor from_grid(const Grid& grid, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return impl_->shape; }
  std::size_t numel() const { return impl_->numel(); }
  std::vector<double>& data() { return impl_->data; }
  const std::vector<double>& data() const { return impl_->data; }
  std::vector<double>& grad() { return impl_->grad; }
  const std::vector<double>& grad() const { return impl_->grad; }
  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool v) { impl_->requires_grad = v; }

  /// Value of a one-element tensor.
  double item() const;

  /// Channel c viewed as a grid; shape must be CxHxW.
  Grid channel_as_grid(std::size_t c = 0) const;

  std::shared_ptr<TensorImpl> impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

/// Populates gradients of every requires_grad tensor reachable from `loss`
/// (a one-element tensor), then frees the recorded graph.
void backward(const Tensor& loss);

/// Builds an op output; records the backward edge only when needed.
Tensor make_op_output(std::vector<std::size_t> shape,
                      std::vector<std::shared_ptr<TensorImpl>> parents,
                      std::function<void(TensorImpl&)> backward_fn);

}  // namespace fpp::nn
