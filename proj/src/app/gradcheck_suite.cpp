#include "chan/app/gradcheck_suite.hpp"

#include <algorithm>
#include <random>

#include "chan/model/chan_model.hpp"
#include "chan/tensor/ops.hpp"

namespace chan {

namespace {

using T = double;

class Suite {
 public:
  Suite(std::uint64_t seed, GradcheckOptions options) : rng_(seed), options_(options) {}

  Tensor<T> random(Shape shape, double lo = -1.0, double hi = 1.0, bool grad = true) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<T> values(numel(shape));
    for (auto& v : values) v = dist(rng_);
    return Tensor<T>(std::move(shape), std::move(values), grad);
  }

  // Reduces an op output to a scalar through a fixed random projection so
  // every output coordinate contributes a distinct weight.
  void check(const std::string& label, std::vector<NamedTensor<T>> params, const std::function<Tensor<T>()>& op) {
    auto probe = random(op().shape(), -1.0, 1.0, false);
    auto loss = [&] { return sum_all(mul(op(), probe)); };
    reports_.push_back(gradient_check(loss, params, options_, label));
  }

  void check_loss(const std::string& label, std::vector<NamedTensor<T>> params, const std::function<Tensor<T>()>& loss) {
    reports_.push_back(gradient_check(loss, params, options_, label));
  }

  std::vector<GradcheckReport> take() { return std::move(reports_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  GradcheckOptions options_;
  std::vector<GradcheckReport> reports_;
};

void op_checks(Suite& s) {
  auto a = s.random({3, 4});
  auto b = s.random({3, 4});
  auto row = s.random({1, 4});
  s.check("add", {{"a", a}, {"b", b}}, [&] { return add(a, b); });
  s.check("add (broadcast)", {{"a", a}, {"row", row}}, [&] { return add(a, row); });
  s.check("sub", {{"a", a}, {"b", b}}, [&] { return sub(a, b); });
  s.check("mul", {{"a", a}, {"b", b}}, [&] { return mul(a, b); });
  s.check("scale", {{"a", a}}, [&] { return scale(a, 1.7); });

  auto m = s.random({4, 5});
  s.check("matmul", {{"a", a}, {"m", m}}, [&] { return matmul(a, m); });
  auto w = s.random({5, 4});
  auto bias = s.random({5});
  s.check("linear", {{"x", a}, {"weight", w}, {"bias", bias}}, [&] { return linear(a, w, std::optional(bias)); });

  s.check("tanh", {{"x", a}}, [&] { return tanh(a); });
  s.check("sigmoid", {{"x", a}}, [&] { return sigmoid(a); });
  s.check("reshape", {{"x", a}}, [&] { return reshape(a, {2, 6}); });
  s.check("concat", {{"a", a}, {"b", b}}, [&] { return concat(std::vector<Tensor<T>>{a, b}, 1); });
  s.check("slice", {{"x", a}}, [&] { return slice(a, 1, 1, 3); });
  s.check("split", {{"x", a}}, [&] {
    const std::size_t extents[] = {1, 2};
    auto parts = split(a, 0, extents);
    return mul(parts[0], sum(parts[1], 0, true));
  });
  s.check("sum", {{"x", a}}, [&] { return sum(a, 1); });
  s.check("mean", {{"x", a}}, [&] { return mean(a, 0, true); });
  s.check("softmax (axis 1)", {{"x", a}}, [&] { return softmax(a, 1); });
  auto cube = s.random({2, 3, 4});
  s.check("softmax (axis 1 of 3)", {{"x", cube}}, [&] { return softmax(cube, 1); });

  auto seq = s.random({7, 3});
  auto filter = s.random({3, 3, 2});
  auto conv_bias = s.random({2});
  for (std::size_t d : {1, 2}) {
    s.check("conv1d_dilated d=" + std::to_string(d), {{"x", seq}, {"filter", filter}, {"bias", conv_bias}},
            [&, d] { return conv1d_dilated(seq, filter, std::optional(conv_bias), d); });
  }
  s.check("max_pool1d", {{"x", seq}}, [&] { return max_pool1d(seq, 2); });

  auto pooled = s.random({3, 3});
  auto deconv = s.random({4, 3, 2});
  for (std::size_t target : {6, 7}) {
    s.check("transposed_conv1d -> " + std::to_string(target), {{"x", pooled}, {"filter", deconv}, {"bias", conv_bias}},
            [&, target] { return transposed_conv1d(pooled, deconv, std::optional(conv_bias), 2, target); });
  }

  auto scores = s.random({5, 1}, 0.05, 0.95);
  std::vector<T> labels{0.0, 0.5, 1.0, 0.5, 0.0};
  s.check_loss("bce_loss", {{"scores", scores}}, [&] { return bce_loss(scores, std::span<const T>(labels)); });
}

void model_check(Suite& s) {
  ChanConfig config;
  config.input_dim = 8;
  config.conv_channels = {4, 6};
  config.attention_dim = 4;
  config.fusion_dim = 6;
  config.mlp_hidden = 5;
  config.concept_embed_dim = 3;
  config.seed = s.rng()();
  ChanModel<T> model(config);
  // Xavier leaves biases at zero; perturb them so their gradients are exercised.
  for (auto& p : model.parameters()) {
    if (p.tensor.rank() == 1) {
      auto noise = s.random(p.tensor.shape(), -0.2, 0.2, false);
      std::copy(noise.data().begin(), noise.data().end(), p.tensor.mutable_data().begin());
    }
  }

  auto features = s.random({12, 8}, -1.0, 1.0, false);
  const SegmentBoundaries boundaries{{6}, 12};
  auto e1 = s.random({1, 3}, -1.0, 1.0, false);
  auto e2 = s.random({1, 3}, -1.0, 1.0, false);
  QueryEmbedding<T> query{e1, e2, scale(add(e1, e2), 0.5)};
  std::vector<T> labels(12);
  std::bernoulli_distribution coin(0.5);
  for (auto& l : labels) l = coin(s.rng()) ? 1.0 : 0.0;

  s.check_loss("chan model end-to-end", model.parameters(), [&] {
    return bce_loss(model.forward(features, boundaries, query), std::span<const T>(labels));
  });
}

}  // namespace

std::vector<GradcheckReport> run_gradcheck_suite(std::uint64_t seed, const GradcheckOptions& options) {
  Suite suite(seed, options);
  op_checks(suite);
  model_check(suite);
  return suite.take();
}

bool all_passed(const std::vector<GradcheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
}

nlohmann::json to_json(const std::vector<GradcheckReport>& reports) {
  nlohmann::json checks = nlohmann::json::array();
  double worst = 0;
  for (const auto& r : reports) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& e : r.entries) {
      params.push_back({{"name", e.name},
                        {"coords_checked", e.coords_checked},
                        {"max_rel_error", e.max_rel_error},
                        {"max_abs_error", e.max_abs_error}});
    }
    checks.push_back({{"label", r.label}, {"max_rel_error", r.max_rel_error}, {"passed", r.passed}, {"parameters", params}});
    worst = std::max(worst, r.max_rel_error);
  }
  return {{"passed", all_passed(reports)},
          {"tolerance", reports.empty() ? 0.0 : reports.front().tolerance},
          {"max_rel_error", worst},
          {"checks", checks}};
}

}  // namespace chan
