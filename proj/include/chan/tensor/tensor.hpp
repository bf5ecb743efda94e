#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace chan {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

template <typename T>
struct Node;

// Backward closure of an operation: receives the gradient of the op output
// and accumulates into the gradients of the op inputs it captured.
template <typename T>
using BackwardFn = std::function<void(std::span<const T> out_grad)>;

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn<T> backward;

  // Allocates the zero gradient on first use and returns it.
  std::vector<T>& grad_buffer();
};

// A differentiable dense array. Copies share the underlying storage and graph
// node (handle semantics); use clone() for an independent copy.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor();
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  std::span<T> mutable_data() { return node_->data; }
  T item() const;
  T at(std::size_t row, std::size_t col) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  void zero_grad() { node_->grad.clear(); }

  // Reverse-mode sweep from this tensor, which must hold exactly one element.
  void backward() const;

  // Same values, no history, no gradient requirement.
  Tensor detach() const;
  Tensor clone() const;

  const std::shared_ptr<Node<T>>& node() const { return node_; }

  // Builds an op output. History is recorded only when grad mode is enabled
  // and at least one input requires a gradient.
  static Tensor from_op(Shape shape, std::vector<T> data, std::vector<Tensor> inputs, BackwardFn<T> backward);

 private:
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}
  std::shared_ptr<Node<T>> node_;
};

// Thread-local switch that suppresses graph recording, e.g. for inference.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace chan
