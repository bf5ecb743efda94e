#include "chan/tensor/adam.hpp"

#include <cmath>

#include "chan/error.hpp"

namespace chan {

template <typename T>
Adam<T>::Adam(std::vector<NamedTensor<T>> params, AdamOptions options)
    : params_(std::move(params)), options_(options), learning_rate_(options.learning_rate) {
  if (!(options_.learning_rate > 0)) throw InvalidArgument("adam: learning rate must be positive");
  if (!(options_.decay_factor > 0 && options_.decay_factor <= 1)) {
    throw InvalidArgument("adam: decay factor must lie in (0, 1]");
  }
  for (const auto& p : params_) {
    first_.emplace_back(p.tensor.size(), T(0));
    second_.emplace_back(p.tensor.size(), T(0));
  }
}

template <typename T>
void Adam<T>::step() {
  for (const auto& p : params_) {
    if (!p.tensor.has_grad()) throw InvalidArgument("adam: parameter '" + p.name + "' has no gradient");
  }
  ++step_count_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& tensor = params_[k].tensor;
    auto values = tensor.mutable_data();
    const auto grad = tensor.grad();
    auto& m = first_[k];
    auto& v = second_[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = static_cast<T>(b1 * m[i] + (1.0 - b1) * g);
      v[i] = static_cast<T>(b2 * v[i] + (1.0 - b2) * g * g);
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] = static_cast<T>(values[i] - learning_rate_ * m_hat / (std::sqrt(v_hat) + options_.epsilon));
    }
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template <typename T>
void Adam<T>::decay() {
  learning_rate_ *= options_.decay_factor;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace chan
