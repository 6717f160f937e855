#include "fpp/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace fpp::nn {

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  impl->shape = std::move(shape);
  impl->data.assign(n, 0.0);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.data().begin(), t.data().end(), value);
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return full({1}, value, requires_grad);
}

Tensor Tensor::from_grid(const Grid& grid, bool requires_grad) {
  Tensor t = zeros({1, grid.rows(), grid.cols()}, requires_grad);
  std::copy(grid.data(), grid.data() + grid.size(), t.data().begin());
  return t;
}

double Tensor::item() const {
  if (numel() != 1) throw std::invalid_argument("item() on a non-scalar tensor");
  return impl_->data[0];
}

Grid Tensor::channel_as_grid(std::size_t c) const {
  if (shape().size() != 3) throw std::invalid_argument("expected CxHxW tensor");
  const std::size_t h = shape()[1], w = shape()[2];
  if (c >= shape()[0]) throw std::invalid_argument("channel out of range");
  Grid g(h, w);
  std::copy(data().begin() + static_cast<std::ptrdiff_t>(c * h * w),
            data().begin() + static_cast<std::ptrdiff_t>((c + 1) * h * w),
            g.data());
  return g;
}

Tensor make_op_output(std::vector<std::size_t> shape,
                      std::vector<std::shared_ptr<TensorImpl>> parents,
                      std::function<void(TensorImpl&)> backward_fn) {
  Tensor out = Tensor::zeros(std::move(shape));
  bool needs_grad = false;
  for (const auto& p : parents) needs_grad = needs_grad || p->requires_grad;
  if (needs_grad) {
    out.impl()->requires_grad = true;
    out.impl()->parents = std::move(parents);
    out.impl()->backward_fn = std::move(backward_fn);
  }
  return out;
}

namespace {

void topo_visit(TensorImpl* node, std::unordered_set<TensorImpl*>& seen,
                std::vector<TensorImpl*>& order) {
  // Iterative post-order; graphs can be deep for many-layer nets.
  struct Frame {
    TensorImpl* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack{{node, 0}};
  seen.insert(node);
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_parent < top.node->parents.size()) {
      TensorImpl* parent = top.node->parents[top.next_parent++].get();
      if (parent->backward_fn && !seen.count(parent)) {
        seen.insert(parent);
        stack.push_back({parent, 0});
      }
    } else {
      order.push_back(top.node);
      stack.pop_back();
    }
  }
}

}  // namespace

void backward(const Tensor& loss) {
  TensorImpl* root = loss.impl().get();
  if (root->numel() != 1)
    throw std::invalid_argument("backward expects a one-element loss tensor");
  if (!root->backward_fn) {
    if (root->consumed)
      throw InvalidStateError("backward called twice on a consumed graph");
    throw std::invalid_argument("loss tensor was not produced by a recorded graph");
  }

  std::unordered_set<TensorImpl*> seen;
  std::vector<TensorImpl*> order;
  topo_visit(root, seen, order);

  root->grad.assign(1, 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* node = *it;
    node->ensure_grad();
    node->backward_fn(*node);
  }

  // Free the graph; leaves keep their accumulated gradients.
  for (TensorImpl* node : order) {
    node->backward_fn = nullptr;
    node->parents.clear();
    node->consumed = true;
  }
}

}  // namespace fpp::nn
