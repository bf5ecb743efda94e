#include <cmath>
#include <numeric>

#include "chan/error.hpp"
#include "chan/tensor/gradcheck.hpp"
#include "chan/tensor/ops.hpp"
#include "doctest.h"
#include "support/gen.hpp"

using namespace chan;
using chan::testing::Gen;

namespace {

using TD = Tensor<double>;
const std::optional<TD> kNoBias;

TD column(std::vector<double> v) {
  const auto n = v.size();
  return TD({n, 1}, std::move(v));
}

std::vector<double> values(const TD& t) { return {t.data().begin(), t.data().end()}; }

double dot(const TD& a, const TD& b) {
  return std::inner_product(a.data().begin(), a.data().end(), b.data().begin(), 0.0);
}

// A fixed random projection turns any op output into a scalar loss.
GradcheckReport check_op(Gen& g, const std::vector<TD>& inputs, const std::function<TD()>& op) {
  const auto probe_shape = op().shape();
  const auto probe = g.tensor<double>(probe_shape);
  std::vector<NamedTensor<double>> params;
  for (std::size_t i = 0; i < inputs.size(); ++i) params.push_back({"in" + std::to_string(i), inputs[i]});
  return gradient_check([&] { return sum_all(mul(op(), probe)); }, params);
}

}  // namespace

TEST_CASE("softmax of a constant vector is uniform") {
  for (double c : {-50.0, 0.0, 3.5, 1e3}) {
    const auto s = softmax(TD({3}, {c, c, c}), 0);
    for (double v : s.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("tanh and sigmoid at zero") {
  const auto z = TD::zeros({2, 3});
  const auto t = tanh(z);
  for (double v : t.data()) CHECK(v == 0.0);
  CHECK(sigmoid(TD::scalar(0.0)).item() == 0.5);
}

TEST_CASE("shape mismatch names the op and both shapes") {
  try {
    (void)matmul(TD::zeros({2, 3}), TD::zeros({4, 2}));
    FAIL("matmul accepted mismatched shapes");
  } catch (const ShapeError& e) {
    CHECK(e.op() == "matmul");
    CHECK(e.lhs_shape() == "[2x3]");
    CHECK(e.rhs_shape() == "[4x2]");
  }
  CHECK_THROWS_AS((void)add(TD::zeros({2, 3}), TD::zeros({2, 4})), ShapeError);
}

TEST_CASE("conv1d with an identity filter returns its input for any dilation") {
  Gen g(1);
  const auto x = g.tensor<double>({7, 2});
  TD f = TD::zeros({3, 2, 2});
  f.mutable_data()[1 * 4 + 0 * 2 + 0] = 1;  // centre tap, channel 0 -> 0
  f.mutable_data()[1 * 4 + 1 * 2 + 1] = 1;
  for (std::size_t d : {1, 2, 5}) CHECK(values(conv1d_dilated(x, f, kNoBias, d)) == values(x));
}

TEST_CASE("dilated conv hand example") {
  // y[t] = x[t-2] + x[t+2], zero outside the sequence
  const auto out = conv1d_dilated(column({1, 2, 3, 4, 5}), TD({3, 1, 1}, {1, 0, 1}), kNoBias, 2);
  CHECK(values(out) == std::vector<double>{3, 4, 6, 2, 3});
}

TEST_CASE("dilated conv matches a sliding-window loop") {
  Gen g(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = g.size(1, 9), cin = g.size(1, 3), cout = g.size(1, 3), k = g.size(0, 2), d = g.size(1, 3);
    const auto x = g.tensor<double>({n, cin});
    const auto f = g.tensor<double>({2 * k + 1, cin, cout});
    const auto b = g.tensor<double>({cout});
    const auto out = conv1d_dilated(x, f, std::optional(b), d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < cout; ++o) {
        double acc = b.data()[o];
        for (long t = -static_cast<long>(k); t <= static_cast<long>(k); ++t) {
          const long src = static_cast<long>(i) + static_cast<long>(d) * t;
          if (src < 0 || src >= static_cast<long>(n)) continue;
          for (std::size_t c = 0; c < cin; ++c)
            acc += f.data()[((t + static_cast<long>(k)) * cin + c) * cout + o] * x.data()[src * cin + c];
        }
        CHECK(out.data()[i * cout + o] == doctest::Approx(acc).epsilon(1e-12));
      }
  }
}

TEST_CASE("even filter lengths and zero dilation are rejected") {
  CHECK_THROWS_AS((void)conv1d_dilated(column({1, 2}), TD::zeros({2, 1, 1}), kNoBias, 1), InvalidArgument);
  CHECK_THROWS_AS((void)conv1d_dilated(column({1, 2}), TD::zeros({3, 1, 1}), kNoBias, 0), InvalidArgument);
}

TEST_CASE("max pool") {
  SUBCASE("window 1 is the identity") {
    const auto x = column({3, -1, 2});
    CHECK(values(max_pool1d(x, 1)) == values(x));
  }
  SUBCASE("partial trailing window") { CHECK(values(max_pool1d(column({3, 1, 4, 1, 5}), 2)) == std::vector<double>{3, 4, 5}); }
  SUBCASE("gradient reaches only the first maximum of each window") {
    const TD x({6, 1}, {2, 2, 0, 7, 1, 1}, true);
    sum_all(max_pool1d(x, 2)).backward();
    CHECK(std::vector<double>(x.grad().begin(), x.grad().end()) == std::vector<double>{1, 0, 0, 1, 1, 0});
  }
  CHECK_THROWS_AS((void)max_pool1d(column({1}), 0), InvalidArgument);
}

TEST_CASE("transposed conv with stride 1 and identity filter is the identity") {
  Gen g(3);
  const auto x = g.tensor<double>({5, 2});
  TD f = TD::zeros({1, 2, 2});
  f.mutable_data()[0] = 1;
  f.mutable_data()[3] = 1;
  CHECK(values(transposed_conv1d(x, f, kNoBias, 1, 5)) == values(x));
}

TEST_CASE("transposed conv is the adjoint of conv") {
  Gen g(4);
  for (int trial = 0; trial < 25; ++trial) {
    const auto n = g.size(1, 10), cin = g.size(1, 3), cout = g.size(1, 3), k = g.size(0, 2);
    const auto f = g.tensor<double>({2 * k + 1, cin, cout});
    TD ft = TD::zeros({2 * k + 1, cout, cin});  // channel axes swapped
    for (std::size_t t = 0; t < 2 * k + 1; ++t)
      for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t o = 0; o < cout; ++o) ft.mutable_data()[(t * cout + o) * cin + c] = f.data()[(t * cin + c) * cout + o];
    const auto x = g.tensor<double>({n, cin});
    const auto y = g.tensor<double>({n, cout});
    const double lhs = dot(conv1d_dilated(x, f, kNoBias, 1), y);
    const double rhs = dot(x, transposed_conv1d(y, ft, kNoBias, 1, n));
    CHECK(std::abs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("transposed conv crops floor in front and ceil behind") {
  // Full output of [1] with filter [1 2 3 4] at stride 2 is [1 2 3 4]; length 3 drops the 4.
  const auto out = transposed_conv1d(column({1}), TD({4, 1, 1}, {1, 2, 3, 4}), kNoBias, 2, 3);
  CHECK(values(out) == std::vector<double>{1, 2, 3});
  const auto two = transposed_conv1d(column({1}), TD({4, 1, 1}, {1, 2, 3, 4}), kNoBias, 2, 2);
  CHECK(values(two) == std::vector<double>{2, 3});
  CHECK_THROWS_AS((void)transposed_conv1d(column({1}), TD({4, 1, 1}, {1, 2, 3, 4}), kNoBias, 2, 5),
                  InvalidArgument);
}

TEST_CASE("bce loss") {
  SUBCASE("all one half") {
    const std::vector<double> half(6, 0.5);
    CHECK(bce_loss(column(half), std::span<const double>(half)).item() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("perfect prediction is near zero") {
    const std::vector<double> labels{0, 1, 1, 0};
    const double loss = bce_loss(column(labels), std::span<const double>(labels)).item();
    CHECK(loss >= 0);
    CHECK(loss <= 1e-6 * std::abs(std::log(1e-7)));
  }
  SUBCASE("scalar loop oracle") {
    Gen g(5);
    std::vector<double> s(5), y(5);
    for (auto& v : s) v = g.uniform(0.01, 0.99);
    for (auto& v : y) v = g.uniform(0, 1);
    double oracle = 0;
    for (int i = 0; i < 5; ++i) oracle -= y[i] * std::log(s[i]) + (1 - y[i]) * std::log(1 - s[i]);
    oracle /= 5;
    CHECK(std::abs(bce_loss(column(s), std::span<const double>(y)).item() - oracle) < 1e-10);
  }
  SUBCASE("length mismatch") {
    const std::vector<double> y{1, 0};
    CHECK_THROWS_AS((void)bce_loss(column({0.5, 0.5, 0.5}), std::span<const double>(y)), ShapeError);
  }
}

TEST_CASE("softmax sums to one and ignores a constant shift") {
  Gen g(6);
  for (int trial = 0; trial < 50; ++trial) {
    Shape shape;
    for (std::size_t r = 0, rank = g.size(1, 3); r < rank; ++r) shape.push_back(g.size(1, 5));
    const auto axis = g.size(0, shape.size() - 1);
    const auto x = g.tensor<double>(shape, 20.0);
    const auto s = softmax(x, axis);
    const auto totals = sum(s, axis);
    for (double v : totals.data()) CHECK(std::abs(v - 1.0) <= 1e-6);
    const auto shifted = softmax(add(x, TD::scalar(g.uniform(-100, 100))), axis);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s.data()[i] - shifted.data()[i]) <= 1e-6);
  }
}

TEST_CASE("concat then split is the identity") {
  Gen g(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto axis = g.size(0, 1);
    const auto other = g.size(1, 4);
    std::vector<std::size_t> extents;
    std::vector<TD> parts;
    for (std::size_t p = 0, np = g.size(1, 4); p < np; ++p) {
      extents.push_back(g.size(1, 4));
      parts.push_back(axis == 0 ? g.tensor<double>({extents.back(), other}) : g.tensor<double>({other, extents.back()}));
    }
    const auto back = split(concat(parts, axis), axis, extents);
    REQUIRE(back.size() == parts.size());
    for (std::size_t p = 0; p < parts.size(); ++p) {
      CHECK(back[p].shape() == parts[p].shape());
      CHECK(values(back[p]) == values(parts[p]));
    }
  }
}

TEST_CASE("finite differences agree with backward for every op on random inputs") {
  Gen g(8);
  auto in = [&](Shape s) { return g.tensor<double>(std::move(s), 1.0, true); };
  const auto a = in({3, 4}), b = in({3, 4}), row = in({1, 4}), w = in({5, 4}), bias = in({5}), m = in({4, 2});
  const auto pos = TD({3, 4}, [&] {
    std::vector<double> v(12);
    for (auto& x : v) x = g.uniform(0.1, 0.9);
    return v;
  }(), true);
  const std::vector<double> labels{0, 0.5, 1, 1, 0, 0.5, 0.5, 1, 0, 1, 0, 0.5};

  struct Case {
    const char* name;
    std::vector<TD> inputs;
    std::function<TD()> op;
  };
  const std::vector<Case> cases = {
      {"add broadcast", {a, row}, [&] { return add(a, row); }},
      {"sub", {a, b}, [&] { return sub(a, b); }},
      {"mul", {a, b}, [&] { return mul(a, b); }},
      {"matmul", {a, m}, [&] { return matmul(a, m); }},
      {"linear", {a, w, bias}, [&] { return linear(a, w, std::optional(bias)); }},
      {"tanh", {a}, [&] { return tanh(a); }},
      {"sigmoid", {a}, [&] { return sigmoid(a); }},
      {"concat", {a, b}, [&] { return concat(std::vector<TD>{a, b}, 1); }},
      {"mean", {a}, [&] { return mean(a, 0); }},
      {"softmax", {a}, [&] { return softmax(a, 1); }},
      {"bce", {pos}, [&] { return bce_loss(reshape(pos, {12, 1}), std::span<const double>(labels)); }},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const auto report = check_op(g, c.inputs, c.op);
    CHECK(report.passed);
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("gradient check reports a wrong backward instead of throwing") {
  const TD x({2}, {0.3, -0.4}, true);
  auto broken = [&] {
    std::vector<double> y{x.data()[0] * x.data()[0], x.data()[1]};
    // Claims d/dx0 of x0^2 is x0 rather than 2 x0.
    auto node = x.node();
    return sum_all(TD::from_op({2}, y, {x}, [node](std::span<const double> g) {
      auto& grad = node->grad_buffer();
      grad[0] += g[0] * node->data[0];
      grad[1] += g[1];
    }));
  };
  GradcheckReport report;
  CHECK_NOTHROW(report = gradient_check(broken, {{"x", x}}));
  CHECK_FALSE(report.passed);
  CHECK(report.max_rel_error > 0.1);
}
