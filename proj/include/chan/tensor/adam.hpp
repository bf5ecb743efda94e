#pragma once

#include <string>
#include <vector>

#include "chan/tensor/tensor.hpp"

namespace chan {

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay_factor = 0.8;  // multiplies the learning rate on decay()
};

// Adam with bias correction. Moments are kept per parameter, in the order the
// parameters were registered.
template <typename T>
class Adam {
 public:
  Adam(std::vector<NamedTensor<T>> params, AdamOptions options);

  // Applies one update; every parameter must carry a gradient.
  void step();
  void zero_grad();
  // Learning rate *= decay_factor. Called by the trainer once per epoch.
  void decay();

  double learning_rate() const { return learning_rate_; }
  std::size_t step_count() const { return step_count_; }
  const std::vector<std::vector<T>>& first_moment() const { return first_; }
  const std::vector<std::vector<T>>& second_moment() const { return second_; }

 private:
  std::vector<NamedTensor<T>> params_;
  AdamOptions options_;
  double learning_rate_;
  std::size_t step_count_ = 0;
  std::vector<std::vector<T>> first_;
  std::vector<std::vector<T>> second_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace chan
