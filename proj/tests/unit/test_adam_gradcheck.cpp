#include <cmath>

#include "chan/app/gradcheck_suite.hpp"
#include "chan/error.hpp"
#include "chan/tensor/adam.hpp"
#include "chan/tensor/ops.hpp"
#include "doctest.h"
#include "support/gen.hpp"

using namespace chan;

namespace {

// loss = g * x, so the gradient is exactly g.
void constant_gradient(Tensor<double>& x, double g) { sum_all(scale(x, g)).backward(); }

}  // namespace

TEST_CASE("zero gradient leaves parameters unchanged") {
  Tensor<double> x({3}, {1.0, -2.0, 0.5}, true);
  Adam<double> adam({{"x", x}}, {});
  for (int i = 0; i < 5; ++i) {
    adam.zero_grad();
    constant_gradient(x, 0.0);
    adam.step();
  }
  CHECK(std::vector<double>(x.data().begin(), x.data().end()) == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("first step moves by the learning rate whatever the gradient scale") {
  for (double g : {1e-3, 1.0, 1e3}) {
    Tensor<double> x({1}, {0.0}, true);
    AdamOptions opt;
    Adam<double> adam({{"x", x}}, opt);
    constant_gradient(x, g);
    adam.step();
    // m_hat = g, v_hat = g^2 after bias correction: step = lr * g / (|g| + eps).
    const double expected = -opt.learning_rate * g / (g + opt.epsilon);
    CHECK(x.data()[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(x.data()[0] == doctest::Approx(-opt.learning_rate).epsilon(1e-4));
  }
}

TEST_CASE("hand-unrolled Adam recurrence over several steps") {
  Tensor<double> x({1}, {0.7}, true);
  AdamOptions opt;
  opt.learning_rate = 0.05;
  Adam<double> adam({{"x", x}}, opt);
  double ref = 0.7, m = 0, v = 0;
  for (int t = 1; t <= 6; ++t) {
    // loss = x^2, gradient 2x
    adam.zero_grad();
    sum_all(mul(x, x)).backward();
    adam.step();
    const double g = 2 * ref;
    m = opt.beta1 * m + (1 - opt.beta1) * g;
    v = opt.beta2 * v + (1 - opt.beta2) * g * g;
    const double mh = m / (1 - std::pow(opt.beta1, t));
    const double vh = v / (1 - std::pow(opt.beta2, t));
    ref -= opt.learning_rate * mh / (std::sqrt(vh) + opt.epsilon);
    CHECK(x.data()[0] == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(adam.step_count() == 6);
  REQUIRE(adam.first_moment().size() == 1);
  CHECK(adam.first_moment()[0].size() == 1);
  CHECK(adam.second_moment()[0].size() == 1);
}

TEST_CASE("learning rate after e decays is 1e-4 * 0.8^e and stays positive") {
  Tensor<double> x({2, 2}, {0, 0, 0, 0}, true);
  Adam<double> adam({{"x", x}}, {});
  CHECK(adam.first_moment()[0].size() == 4);
  for (int e = 0; e < 200; ++e) {
    CHECK(adam.learning_rate() == doctest::Approx(1e-4 * std::pow(0.8, e)).epsilon(1e-12));
    adam.decay();
  }
  CHECK(adam.learning_rate() > 0);
}

TEST_CASE("missing gradient names the parameter") {
  Tensor<double> a({1}, {1.0}, true), b({1}, {2.0}, true);
  Adam<double> adam({{"alpha", a}, {"beta", b}}, {});
  sum_all(a).backward();
  try {
    adam.step();
    FAIL("step accepted a parameter without gradient");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("'beta'") != std::string::npos);
  }
}

TEST_CASE("bad optimiser settings are rejected") {
  Tensor<double> a({1}, {1.0}, true);
  AdamOptions opt;
  opt.learning_rate = 0;
  CHECK_THROWS_AS(Adam<double>({{"a", a}}, opt), InvalidArgument);
  opt = {};
  opt.decay_factor = 1.5;
  CHECK_THROWS_AS(Adam<double>({{"a", a}}, opt), InvalidArgument);
}

TEST_CASE("identical runs give bitwise identical parameters") {
  auto run = [] {
    chan::testing::Gen g(11);
    auto w = g.tensor<float>({4, 3}, 1.0, true);
    const auto x = g.tensor<float>({5, 3});
    Adam<float> adam({{"w", w}}, {});
    for (int i = 0; i < 20; ++i) {
      adam.zero_grad();
      sum_all(tanh(linear(x, w))).backward();
      adam.step();
    }
    return std::vector<float>(w.data().begin(), w.data().end());
  };
  CHECK(run() == run());
}

TEST_CASE("gradient suite passes in 64-bit mode") {
  const auto reports = run_gradcheck_suite();
  CHECK(all_passed(reports));
  bool has_model = false;
  for (const auto& r : reports) {
    CAPTURE(r.label);
    CHECK(r.max_rel_error < 1e-4);
    has_model = has_model || r.label.find("model") != std::string::npos;
  }
  CHECK(has_model);
  const auto j = to_json(reports);
  CHECK(j.at("passed").get<bool>());
  CHECK(j.at("checks").size() == reports.size());
}
