#include "chan/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chan/error.hpp"

namespace chan {

namespace {

struct Broadcast {
  Shape out;
  std::vector<std::size_t> stride_a;
  std::vector<std::size_t> stride_b;
  bool same = false;
};

std::vector<std::size_t> contiguous_strides(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

Broadcast plan_broadcast(const char* op, const Shape& a, const Shape& b) {
  Broadcast plan;
  if (a == b) {
    plan.out = a;
    plan.same = true;
    return plan;
  }
  const std::size_t rank = std::max(a.size(), b.size());
  plan.out.assign(rank, 1);
  plan.stride_a.assign(rank, 0);
  plan.stride_b.assign(rank, 0);
  auto sa = contiguous_strides(a);
  auto sb = contiguous_strides(b);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t out_axis = rank - 1 - i;
    const std::size_t ea = i < a.size() ? a[a.size() - 1 - i] : 1;
    const std::size_t eb = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (ea != eb && ea != 1 && eb != 1) throw ShapeError(op, shape_string(a), shape_string(b), "not broadcastable");
    plan.out[out_axis] = std::max(ea, eb);
    if (i < a.size() && ea != 1) plan.stride_a[out_axis] = sa[a.size() - 1 - i];
    if (i < b.size() && eb != 1) plan.stride_b[out_axis] = sb[b.size() - 1 - i];
  }
  return plan;
}

// Visits every output element with the matching flat offsets into a and b.
template <typename Fn>
void for_each_broadcast(const Broadcast& plan, Fn&& fn) {
  const std::size_t total = numel(plan.out);
  if (plan.same) {
    for (std::size_t i = 0; i < total; ++i) fn(i, i, i);
    return;
  }
  const std::size_t rank = plan.out.size();
  std::vector<std::size_t> index(rank, 0);
  std::size_t off_a = 0;
  std::size_t off_b = 0;
  for (std::size_t i = 0; i < total; ++i) {
    fn(i, off_a, off_b);
    for (std::size_t axis = rank; axis-- > 0;) {
      if (++index[axis] < plan.out[axis]) {
        off_a += plan.stride_a[axis];
        off_b += plan.stride_b[axis];
        break;
      }
      off_a -= plan.stride_a[axis] * (plan.out[axis] - 1);
      off_b -= plan.stride_b[axis] * (plan.out[axis] - 1);
      index[axis] = 0;
    }
  }
}

// View of a tensor as [outer, axis_extent, inner] around one axis.
struct AxisView {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisView axis_view(const char* op, const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw InvalidArgument(std::string(op) + ": axis " + std::to_string(axis) + " out of range for " + shape_string(shape));
  }
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

void require_rank(const char* op, const Shape& shape, std::size_t rank) {
  if (shape.size() != rank) {
    throw ShapeError(op, shape_string(shape), "rank " + std::to_string(rank), "unexpected rank");
  }
}

template <typename T>
bool wants_grad(const Tensor<T>& t) {
  return t.requires_grad();
}

template <typename T, typename Forward, typename DA, typename DB>
Tensor<T> binary(const char* op, const Tensor<T>& a, const Tensor<T>& b, Forward fwd, DA da, DB db) {
  auto plan = plan_broadcast(op, a.shape(), b.shape());
  std::vector<T> out(numel(plan.out));
  const auto xa = a.data();
  const auto xb = b.data();
  for_each_broadcast(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) { out[o] = fwd(xa[ia], xb[ib]); });
  return Tensor<T>::from_op(plan.out, std::move(out), {a, b}, [a, b, plan, da, db](std::span<const T> g) {
    auto na = a.node();
    auto nb = b.node();
    const auto& va = na->data;
    const auto& vb = nb->data;
    if (na->requires_grad) {
      auto& ga = na->grad_buffer();
      for_each_broadcast(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) { ga[ia] += da(g[o], va[ia], vb[ib]); });
    }
    if (nb->requires_grad) {
      auto& gb = nb->grad_buffer();
      for_each_broadcast(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) { gb[ib] += db(g[o], va[ia], vb[ib]); });
    }
  });
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary<T>(
      "add", a, b, [](T x, T y) { return x + y; }, [](T g, T, T) { return g; }, [](T g, T, T) { return g; });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary<T>(
      "sub", a, b, [](T x, T y) { return x - y; }, [](T g, T, T) { return g; }, [](T g, T, T) { return -g; });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary<T>(
      "mul", a, b, [](T x, T y) { return x * y; }, [](T g, T, T y) { return g * y; },
      [](T g, T x, T) { return g * x; });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [x, factor](std::span<const T> g) {
    auto& gx = x.node()->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("matmul", a.shape(), 2);
  require_rank("matmul", b.shape(), 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) throw ShapeError("matmul", shape_string(a.shape()), shape_string(b.shape()), "inner extents differ");
  std::vector<T> out(m * n, T(0));
  const auto xa = a.data();
  const auto xb = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    T* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T s = xa[i * k + p];
      const T* brow = xb.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += s * brow[j];
    }
  }
  return Tensor<T>::from_op({m, n}, std::move(out), {a, b}, [a, b, m, k, n](std::span<const T> g) {
    const auto& va = a.node()->data;
    const auto& vb = b.node()->data;
    if (a.requires_grad()) {
      auto& ga = a.node()->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          T acc = 0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * vb[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (b.requires_grad()) {
      auto& gb = b.node()->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const T s = va[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += s * g[i * n + j];
        }
    }
  });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const std::optional<Tensor<T>>& bias) {
  require_rank("linear", x.shape(), 2);
  require_rank("linear", weight.shape(), 2);
  const std::size_t rows = x.dim(0), in = x.dim(1), out_dim = weight.dim(0);
  if (weight.dim(1) != in) {
    throw ShapeError("linear", shape_string(x.shape()), shape_string(weight.shape()), "input width differs from weight columns");
  }
  if (bias && (bias->rank() != 1 || bias->dim(0) != out_dim)) {
    throw ShapeError("linear", shape_string(weight.shape()), shape_string(bias->shape()), "bias extent");
  }
  std::vector<T> out(rows * out_dim);
  const auto xv = x.data();
  const auto wv = weight.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xv.data() + r * in;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const T* wr = wv.data() + o * in;
      T acc = bias ? bias->data()[o] : T(0);
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
      out[r * out_dim + o] = acc;
    }
  }
  std::vector<Tensor<T>> inputs{x, weight};
  if (bias) inputs.push_back(*bias);
  return Tensor<T>::from_op({rows, out_dim}, std::move(out), std::move(inputs),
                            [x, weight, bias, rows, in, out_dim](std::span<const T> g) {
                              const auto& xv = x.node()->data;
                              const auto& wv = weight.node()->data;
                              if (x.requires_grad()) {
                                auto& gx = x.node()->grad_buffer();
                                for (std::size_t r = 0; r < rows; ++r)
                                  for (std::size_t o = 0; o < out_dim; ++o) {
                                    const T s = g[r * out_dim + o];
                                    if (s == T(0)) continue;
                                    const T* wr = wv.data() + o * in;
                                    T* gr = gx.data() + r * in;
                                    for (std::size_t i = 0; i < in; ++i) gr[i] += s * wr[i];
                                  }
                              }
                              if (weight.requires_grad()) {
                                auto& gw = weight.node()->grad_buffer();
                                for (std::size_t r = 0; r < rows; ++r)
                                  for (std::size_t o = 0; o < out_dim; ++o) {
                                    const T s = g[r * out_dim + o];
                                    if (s == T(0)) continue;
                                    const T* xr = xv.data() + r * in;
                                    T* gr = gw.data() + o * in;
                                    for (std::size_t i = 0; i < in; ++i) gr[i] += s * xr[i];
                                  }
                              }
                              if (bias && bias->requires_grad()) {
                                auto& gb = bias->node()->grad_buffer();
                                for (std::size_t r = 0; r < rows; ++r)
                                  for (std::size_t o = 0; o < out_dim; ++o) gb[o] += g[r * out_dim + o];
                              }
                            });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  std::vector<T> out(x.size());
  const auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  auto y = std::make_shared<std::vector<T>>(out);
  return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [x, y](std::span<const T> g) {
    auto& gx = x.node()->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (T(1) - (*y)[i] * (*y)[i]);
  });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  std::vector<T> out(x.size());
  const auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Branches keep exp() from overflowing for large |x|.
    const T v = xv[i];
    if (v >= T(0)) {
      out[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      out[i] = e / (T(1) + e);
    }
  }
  auto y = std::make_shared<std::vector<T>>(out);
  return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [x, y](std::span<const T> g) {
    auto& gx = x.node()->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*y)[i] * (T(1) - (*y)[i]);
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.size()) throw ShapeError("reshape", shape_string(x.shape()), shape_string(shape), "element count");
  std::vector<T> out(x.data().begin(), x.data().end());
  return Tensor<T>::from_op(std::move(shape), std::move(out), {x}, [x](std::span<const T> g) {
    auto& gx = x.node()->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw InvalidArgument("concat: no inputs");
  const Shape& first = parts.front().shape();
  auto base = axis_view("concat", first, axis);
  std::size_t total_extent = 0;
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
    if (!ok) throw ShapeError("concat", shape_string(first), shape_string(s), "off-axis extents differ");
    extents.push_back(s[axis]);
    total_extent += s[axis];
  }
  Shape out_shape = first;
  out_shape[axis] = total_extent;
  std::vector<T> out(numel(out_shape));
  const std::size_t row = total_extent * base.inner;
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto src = parts[p].data();
    const std::size_t chunk = extents[p] * base.inner;
    for (std::size_t o = 0; o < base.outer; ++o) {
      std::copy_n(src.data() + o * chunk, chunk, out.data() + o * row + offset);
    }
    offset += chunk;
  }
  return Tensor<T>::from_op(std::move(out_shape), std::move(out), parts,
                            [parts, extents, base, row](std::span<const T> g) {
                              std::size_t offset = 0;
                              for (std::size_t p = 0; p < parts.size(); ++p) {
                                const std::size_t chunk = extents[p] * base.inner;
                                if (parts[p].requires_grad()) {
                                  auto& gp = parts[p].node()->grad_buffer();
                                  for (std::size_t o = 0; o < base.outer; ++o)
                                    for (std::size_t i = 0; i < chunk; ++i) gp[o * chunk + i] += g[o * row + offset + i];
                                }
                                offset += chunk;
                              }
                            });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t begin, std::size_t end) {
  auto view = axis_view("slice", x.shape(), axis);
  if (begin >= end || end > view.extent) {
    throw InvalidArgument("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) + ") invalid for " +
                          shape_string(x.shape()) + " on axis " + std::to_string(axis));
  }
  Shape out_shape = x.shape();
  out_shape[axis] = end - begin;
  const std::size_t chunk = (end - begin) * view.inner;
  const std::size_t row = view.extent * view.inner;
  const std::size_t start = begin * view.inner;
  std::vector<T> out(view.outer * chunk);
  const auto src = x.data();
  for (std::size_t o = 0; o < view.outer; ++o) std::copy_n(src.data() + o * row + start, chunk, out.data() + o * chunk);
  return Tensor<T>::from_op(std::move(out_shape), std::move(out), {x}, [x, view, chunk, row, start](std::span<const T> g) {
    auto& gx = x.node()->grad_buffer();
    for (std::size_t o = 0; o < view.outer; ++o)
      for (std::size_t i = 0; i < chunk; ++i) gx[o * row + start + i] += g[o * chunk + i];
  });
}

template <typename T>
std::vector<Tensor<T>> split(const Tensor<T>& x, std::size_t axis, std::span<const std::size_t> extents) {
  std::size_t total = std::accumulate(extents.begin(), extents.end(), std::size_t{0});
  if (axis >= x.rank() || total != x.dim(axis)) {
    throw InvalidArgument("split: extents sum to " + std::to_string(total) + " but tensor is " + shape_string(x.shape()));
  }
  std::vector<Tensor<T>> pieces;
  std::size_t begin = 0;
  for (auto e : extents) {
    pieces.push_back(slice(x, axis, begin, begin + e));
    begin += e;
  }
  return pieces;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x, std::size_t axis, bool keepdim) {
  auto v = axis_view("sum", x.shape(), axis);
  Shape out_shape = x.shape();
  if (keepdim) {
    out_shape[axis] = 1;
  } else {
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  }
  std::vector<T> out(v.outer * v.inner, T(0));
  const auto src = x.data();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t e = 0; e < v.extent; ++e) {
      const T* in = src.data() + (o * v.extent + e) * v.inner;
      T* dst = out.data() + o * v.inner;
      for (std::size_t i = 0; i < v.inner; ++i) dst[i] += in[i];
    }
  return Tensor<T>::from_op(std::move(out_shape), std::move(out), {x}, [x, v](std::span<const T> g) {
    auto& gx = x.node()->grad_buffer();
    for (std::size_t o = 0; o < v.outer; ++o)
      for (std::size_t e = 0; e < v.extent; ++e)
        for (std::size_t i = 0; i < v.inner; ++i) gx[(o * v.extent + e) * v.inner + i] += g[o * v.inner + i];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x, std::size_t axis, bool keepdim) {
  const auto extent = axis_view("mean", x.shape(), axis).extent;
  return scale(sum(x, axis, keepdim), T(1) / static_cast<T>(extent));
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
  T acc = 0;
  for (auto v : x.data()) acc += v;
  return Tensor<T>::from_op({}, {acc}, {x}, [x](std::span<const T> g) {
    auto& gx = x.node()->grad_buffer();
    for (auto& v : gx) v += g[0];
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  auto v = axis_view("softmax", x.shape(), axis);
  std::vector<T> out(x.size());
  const auto src = x.data();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t i = 0; i < v.inner; ++i) {
      const std::size_t base = o * v.extent * v.inner + i;
      T peak = src[base];
      for (std::size_t e = 1; e < v.extent; ++e) peak = std::max(peak, src[base + e * v.inner]);
      T total = 0;
      for (std::size_t e = 0; e < v.extent; ++e) {
        const T ex = std::exp(src[base + e * v.inner] - peak);
        out[base + e * v.inner] = ex;
        total += ex;
      }
      for (std::size_t e = 0; e < v.extent; ++e) out[base + e * v.inner] /= total;
    }
  auto y = std::make_shared<std::vector<T>>(out);
  return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [x, y, v](std::span<const T> g) {
    auto& gx = x.node()->grad_buffer();
    for (std::size_t o = 0; o < v.outer; ++o)
      for (std::size_t i = 0; i < v.inner; ++i) {
        const std::size_t base = o * v.extent * v.inner + i;
        T dot = 0;
        for (std::size_t e = 0; e < v.extent; ++e) dot += g[base + e * v.inner] * (*y)[base + e * v.inner];
        for (std::size_t e = 0; e < v.extent; ++e) {
          const std::size_t k = base + e * v.inner;
          gx[k] += (*y)[k] * (g[k] - dot);
        }
      }
  });
}

template <typename T>
Tensor<T> conv1d_dilated(const Tensor<T>& x, const Tensor<T>& filter, const std::optional<Tensor<T>>& bias,
                         std::size_t dilation) {
  require_rank("conv1d_dilated", x.shape(), 2);
  require_rank("conv1d_dilated", filter.shape(), 3);
  if (dilation == 0) throw InvalidArgument("conv1d_dilated: dilation must be >= 1");
  const std::size_t taps = filter.dim(0);
  if (taps % 2 == 0) throw InvalidArgument("conv1d_dilated: filter length " + std::to_string(taps) + " is even");
  const std::size_t len = x.dim(0), cin = x.dim(1), cout = filter.dim(2);
  if (filter.dim(1) != cin) {
    throw ShapeError("conv1d_dilated", shape_string(x.shape()), shape_string(filter.shape()), "input channels");
  }
  if (bias && (bias->rank() != 1 || bias->dim(0) != cout)) {
    throw ShapeError("conv1d_dilated", shape_string(filter.shape()), shape_string(bias->shape()), "bias extent");
  }
  const auto half = static_cast<std::ptrdiff_t>(taps / 2);
  const auto d = static_cast<std::ptrdiff_t>(dilation);
  const auto n = static_cast<std::ptrdiff_t>(len);

  std::vector<T> out(len * cout, T(0));
  const auto xv = x.data();
  const auto fv = filter.data();
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    T* orow = out.data() + i * static_cast<std::ptrdiff_t>(cout);
    if (bias) std::copy_n(bias->data().data(), cout, orow);
    for (std::ptrdiff_t t = -half; t <= half; ++t) {
      const std::ptrdiff_t src = i + d * t;
      if (src < 0 || src >= n) continue;
      const T* xrow = xv.data() + src * static_cast<std::ptrdiff_t>(cin);
      const T* ftap = fv.data() + (t + half) * static_cast<std::ptrdiff_t>(cin * cout);
      for (std::size_t c = 0; c < cin; ++c) {
        const T s = xrow[c];
        const T* f = ftap + c * cout;
        for (std::size_t o = 0; o < cout; ++o) orow[o] += s * f[o];
      }
    }
  }
  std::vector<Tensor<T>> inputs{x, filter};
  if (bias) inputs.push_back(*bias);
  return Tensor<T>::from_op({len, cout}, std::move(out), std::move(inputs),
                            [x, filter, bias, half, d, n, cin, cout](std::span<const T> g) {
                              const auto& xv = x.node()->data;
                              const auto& fv = filter.node()->data;
                              std::vector<T>* gx = x.requires_grad() ? &x.node()->grad_buffer() : nullptr;
                              std::vector<T>* gf = filter.requires_grad() ? &filter.node()->grad_buffer() : nullptr;
                              for (std::ptrdiff_t i = 0; i < n; ++i) {
                                const T* grow = g.data() + i * static_cast<std::ptrdiff_t>(cout);
                                for (std::ptrdiff_t t = -half; t <= half; ++t) {
                                  const std::ptrdiff_t src = i + d * t;
                                  if (src < 0 || src >= n) continue;
                                  const std::size_t xoff = static_cast<std::size_t>(src) * cin;
                                  const std::size_t foff = static_cast<std::size_t>(t + half) * cin * cout;
                                  for (std::size_t c = 0; c < cin; ++c) {
                                    if (gx) {
                                      T acc = 0;
                                      const T* f = fv.data() + foff + c * cout;
                                      for (std::size_t o = 0; o < cout; ++o) acc += f[o] * grow[o];
                                      (*gx)[xoff + c] += acc;
                                    }
                                    if (gf) {
                                      const T s = xv[xoff + c];
                                      T* gfo = gf->data() + foff + c * cout;
                                      for (std::size_t o = 0; o < cout; ++o) gfo[o] += s * grow[o];
                                    }
                                  }
                                }
                              }
                              if (bias && bias->requires_grad()) {
                                auto& gb = bias->node()->grad_buffer();
                                for (std::ptrdiff_t i = 0; i < n; ++i)
                                  for (std::size_t o = 0; o < cout; ++o) gb[o] += g[i * static_cast<std::ptrdiff_t>(cout) + o];
                              }
                            });
}

template <typename T>
Tensor<T> max_pool1d(const Tensor<T>& x, std::size_t window) {
  require_rank("max_pool1d", x.shape(), 2);
  if (window == 0) throw InvalidArgument("max_pool1d: window must be >= 1");
  const std::size_t len = x.dim(0), ch = x.dim(1);
  const std::size_t out_len = (len + window - 1) / window;
  std::vector<T> out(out_len * ch);
  auto argmax = std::make_shared<std::vector<std::size_t>>(out_len * ch);
  const auto xv = x.data();
  for (std::size_t p = 0; p < out_len; ++p) {
    const std::size_t begin = p * window;
    const std::size_t end = std::min(len, begin + window);
    for (std::size_t c = 0; c < ch; ++c) {
      std::size_t best = begin;
      for (std::size_t i = begin + 1; i < end; ++i) {
        if (xv[i * ch + c] > xv[best * ch + c]) best = i;
      }
      out[p * ch + c] = xv[best * ch + c];
      (*argmax)[p * ch + c] = best * ch + c;
    }
  }
  return Tensor<T>::from_op({out_len, ch}, std::move(out), {x}, [x, argmax](std::span<const T> g) {
    auto& gx = x.node()->grad_buffer();
    for (std::size_t k = 0; k < g.size(); ++k) gx[(*argmax)[k]] += g[k];
  });
}

template <typename T>
Tensor<T> transposed_conv1d(const Tensor<T>& x, const Tensor<T>& filter, const std::optional<Tensor<T>>& bias,
                            std::size_t stride, std::size_t target_length) {
  require_rank("transposed_conv1d", x.shape(), 2);
  require_rank("transposed_conv1d", filter.shape(), 3);
  if (stride == 0) throw InvalidArgument("transposed_conv1d: stride must be >= 1");
  if (target_length == 0) throw InvalidArgument("transposed_conv1d: target_length must be >= 1");
  const std::size_t len = x.dim(0), cin = x.dim(1), taps = filter.dim(0), cout = filter.dim(2);
  if (filter.dim(1) != cin) {
    throw ShapeError("transposed_conv1d", shape_string(x.shape()), shape_string(filter.shape()), "input channels");
  }
  if (bias && (bias->rank() != 1 || bias->dim(0) != cout)) {
    throw ShapeError("transposed_conv1d", shape_string(filter.shape()), shape_string(bias->shape()), "bias extent");
  }
  const std::size_t full = (len - 1) * stride + taps;
  if (target_length > full) {
    throw InvalidArgument("transposed_conv1d: target length " + std::to_string(target_length) +
                          " exceeds producible length " + std::to_string(full));
  }
  const std::size_t crop = (full - target_length) / 2;

  std::vector<T> out(target_length * cout, T(0));
  if (bias) {
    for (std::size_t j = 0; j < target_length; ++j) std::copy_n(bias->data().data(), cout, out.data() + j * cout);
  }
  const auto xv = x.data();
  const auto fv = filter.data();
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t t = 0; t < taps; ++t) {
      const std::size_t pos = i * stride + t;
      if (pos < crop || pos - crop >= target_length) continue;
      T* orow = out.data() + (pos - crop) * cout;
      const T* ftap = fv.data() + t * cin * cout;
      for (std::size_t c = 0; c < cin; ++c) {
        const T s = xv[i * cin + c];
        const T* f = ftap + c * cout;
        for (std::size_t o = 0; o < cout; ++o) orow[o] += s * f[o];
      }
    }
  }
  std::vector<Tensor<T>> inputs{x, filter};
  if (bias) inputs.push_back(*bias);
  return Tensor<T>::from_op(
      {target_length, cout}, std::move(out), std::move(inputs),
      [x, filter, bias, stride, target_length, crop, len, cin, taps, cout](std::span<const T> g) {
        const auto& xv = x.node()->data;
        const auto& fv = filter.node()->data;
        std::vector<T>* gx = x.requires_grad() ? &x.node()->grad_buffer() : nullptr;
        std::vector<T>* gf = filter.requires_grad() ? &filter.node()->grad_buffer() : nullptr;
        for (std::size_t i = 0; i < len; ++i) {
          for (std::size_t t = 0; t < taps; ++t) {
            const std::size_t pos = i * stride + t;
            if (pos < crop || pos - crop >= target_length) continue;
            const T* grow = g.data() + (pos - crop) * cout;
            for (std::size_t c = 0; c < cin; ++c) {
              const std::size_t foff = (t * cin + c) * cout;
              if (gx) {
                T acc = 0;
                for (std::size_t o = 0; o < cout; ++o) acc += fv[foff + o] * grow[o];
                (*gx)[i * cin + c] += acc;
              }
              if (gf) {
                const T s = xv[i * cin + c];
                for (std::size_t o = 0; o < cout; ++o) (*gf)[foff + o] += s * grow[o];
              }
            }
          }
        }
        if (bias && bias->requires_grad()) {
          auto& gb = bias->node()->grad_buffer();
          for (std::size_t j = 0; j < target_length; ++j)
            for (std::size_t o = 0; o < cout; ++o) gb[o] += g[j * cout + o];
        }
      });
}

template <typename T>
Tensor<T> bce_loss(const Tensor<T>& scores, std::span<const T> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("bce_loss", shape_string(scores.shape()), "[" + std::to_string(labels.size()) + "]", "length");
  }
  const T lo = static_cast<T>(kBceClamp);
  const T hi = T(1) - lo;
  const auto s = scores.data();
  const T count = static_cast<T>(labels.size());
  T total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const T p = std::clamp(s[i], lo, hi);
    total += labels[i] * std::log(p) + (T(1) - labels[i]) * std::log(T(1) - p);
  }
  std::vector<T> target(labels.begin(), labels.end());
  return Tensor<T>::from_op({}, {-total / count}, {scores}, [scores, target, lo, hi, count](std::span<const T> g) {
    auto& gs = scores.node()->grad_buffer();
    const auto& sv = scores.node()->data;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const T p = sv[i];
      if (p < lo || p > hi) continue;
      gs[i] += -g[0] * (target[i] / p - (T(1) - target[i]) / (T(1) - p)) / count;
    }
  });
}

#define CHAN_INSTANTIATE_OPS(T)                                                                                   \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                                     \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                                     \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                                     \
  template Tensor<T> scale(const Tensor<T>&, T);                                                                  \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                                  \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const std::optional<Tensor<T>>&);                 \
  template Tensor<T> tanh(const Tensor<T>&);                                                                      \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                                   \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                                            \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);                                          \
  template Tensor<T> slice(const Tensor<T>&, std::size_t, std::size_t, std::size_t);                              \
  template std::vector<Tensor<T>> split(const Tensor<T>&, std::size_t, std::span<const std::size_t>);             \
  template Tensor<T> sum(const Tensor<T>&, std::size_t, bool);                                                    \
  template Tensor<T> mean(const Tensor<T>&, std::size_t, bool);                                                   \
  template Tensor<T> sum_all(const Tensor<T>&);                                                                   \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                                                      \
  template Tensor<T> conv1d_dilated(const Tensor<T>&, const Tensor<T>&, const std::optional<Tensor<T>>&,          \
                                    std::size_t);                                                                 \
  template Tensor<T> max_pool1d(const Tensor<T>&, std::size_t);                                                   \
  template Tensor<T> transposed_conv1d(const Tensor<T>&, const Tensor<T>&, const std::optional<Tensor<T>>&,       \
                                       std::size_t, std::size_t);                                                 \
  template Tensor<T> bce_loss(const Tensor<T>&, std::span<const T>);

CHAN_INSTANTIATE_OPS(float)
CHAN_INSTANTIATE_OPS(double)

#undef CHAN_INSTANTIATE_OPS

}  // namespace chan
