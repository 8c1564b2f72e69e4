#include "mcl/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "mcl/core/error.hpp"
#include "mcl/kernels/kernels.hpp"

namespace mcl::nn {

namespace {

thread_local bool g_grad_mode = true;

// Pads a shape to rank 5 with leading singleton dims so a fixed-depth loop
// can walk any tensor.
struct Walk5 {
  int64_t dims[5] = {1, 1, 1, 1, 1};
  explicit Walk5(const Shape& s) {
    const int off = 5 - s.rank();
    for (int i = 0; i < s.rank(); ++i) dims[off + i] = s[i];
  }
};

void padded_strides(const Shape& s, int64_t out[5]) {
  // row-major strides, padded to rank 5 (leading entries get the full size)
  int64_t str[Shape::kMaxRank];
  int64_t acc = 1;
  for (int i = s.rank() - 1; i >= 0; --i) {
    str[i] = acc;
    acc *= s[i];
  }
  const int off = 5 - s.rank();
  for (int i = 0; i < 5; ++i) out[i] = 0;
  for (int i = 0; i < s.rank(); ++i) out[off + i] = str[i];
}

}  // namespace

bool grad_mode() { return g_grad_mode; }

GradModeGuard::GradModeGuard(bool enable) : prev_(g_grad_mode) { g_grad_mode = enable; }
GradModeGuard::~GradModeGuard() { g_grad_mode = prev_; }

template <typename T>
Var<T> make_node(const char* op, Tensor<T> value, std::vector<Var<T>> inputs,
                 typename Node<T>::VjpFn vjp) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = op;
  bool rg = false;
  for (const auto& in : inputs)
    if (in && in->requires_grad) rg = true;
  if (g_grad_mode && rg) {
    n->requires_grad = true;
    n->inputs = std::move(inputs);
    n->vjp = std::move(vjp);
  }
  return n;
}

template <typename T>
Var<T> constant(Tensor<T> v) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(v);
  n->op = "const";
  return n;
}

template <typename T>
Var<T> constant_scalar(T v) {
  return constant(Tensor<T>::scalar(v));
}

template <typename T>
Var<T> leaf(Tensor<T> v) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(v);
  n->requires_grad = true;
  n->op = "leaf";
  return n;
}

template <typename T>
Var<T> detach(const Var<T>& a) {
  return constant(a->value);
}

namespace {

template <typename T>
void check_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a->shape() != b->shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + a->shape().str() + " vs " +
                     b->shape().str());
}

}  // namespace

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a, b, "add");
  Tensor<T> out(a->shape());
  kern::add(a->value.data(), b->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("add", std::move(out), {a, b},
                      [](const Var<T>& gy, const Var<T>&) {
                        return std::vector<Var<T>>{gy, gy};
                      });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a, b, "sub");
  Tensor<T> out(a->shape());
  kern::sub(a->value.data(), b->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("sub", std::move(out), {a, b},
                      [](const Var<T>& gy, const Var<T>&) {
                        return std::vector<Var<T>>{gy, neg(gy)};
                      });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a, b, "mul");
  Tensor<T> out(a->shape());
  kern::mul(a->value.data(), b->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("mul", std::move(out), {a, b},
                      [](const Var<T>& gy, const Var<T>& self) {
                        return std::vector<Var<T>>{mul(gy, self->inputs[1]),
                                                   mul(gy, self->inputs[0])};
                      });
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a, b, "div");
  Tensor<T> out(a->shape());
  kern::div(a->value.data(), b->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("div", std::move(out), {a, b},
                      [](const Var<T>& gy, const Var<T>& self) {
                        const Var<T>& bb = self->inputs[1];
                        Var<T> ga = div(gy, bb);
                        // -gy*a/b^2 = -(ga * a) / b
                        Var<T> gb = neg(div(mul(ga, self->inputs[0]), bb));
                        return std::vector<Var<T>>{ga, gb};
                      });
}

template <typename T>
Var<T> neg(const Var<T>& a) {
  Tensor<T> out(a->shape());
  kern::scale(a->value.data(), T(-1), T(0), out.mutable_data(), out.numel());
  return make_node<T>("neg", std::move(out), {a},
                      [](const Var<T>& gy, const Var<T>&) {
                        return std::vector<Var<T>>{neg(gy)};
                      });
}

template <typename T>
Var<T> scale(const Var<T>& a, T s) {
  Tensor<T> out(a->shape());
  kern::scale(a->value.data(), s, T(0), out.mutable_data(), out.numel());
  return make_node<T>("scale", std::move(out), {a},
                      [s](const Var<T>& gy, const Var<T>&) {
                        return std::vector<Var<T>>{scale(gy, s)};
                      });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T c) {
  Tensor<T> out(a->shape());
  kern::scale(a->value.data(), T(1), c, out.mutable_data(), out.numel());
  return make_node<T>("add_scalar", std::move(out), {a},
                      [](const Var<T>& gy, const Var<T>&) {
                        return std::vector<Var<T>>{gy};
                      });
}

namespace {

// gy masked by the sign of x; derivative w.r.t. x is zero a.e., so that slot
// returns null.
template <typename T>
Var<T> relu_mask(const Var<T>& g, const Var<T>& x) {
  Tensor<T> out(g->shape());
  kern::relu_mask_mul(g->value.data(), x->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("relu_mask", std::move(out), {g, x},
                      [](const Var<T>& gy, const Var<T>& self) {
                        return std::vector<Var<T>>{relu_mask(gy, self->inputs[1]), nullptr};
                      });
}

}  // namespace

template <typename T>
Var<T> relu(const Var<T>& a) {
  Tensor<T> out(a->shape());
  kern::relu(a->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("relu", std::move(out), {a},
                      [](const Var<T>& gy, const Var<T>& self) {
                        return std::vector<Var<T>>{relu_mask(gy, self->inputs[0])};
                      });
}

template <typename T>
Var<T> sqrt(const Var<T>& a) {
  Tensor<T> out(a->shape());
  kern::sqrt(a->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("sqrt", std::move(out), {a},
                      [](const Var<T>& gy, const Var<T>& self) {
                        return std::vector<Var<T>>{scale(div(gy, self), T(0.5))};
                      });
}

template <typename T>
Var<T> square(const Var<T>& a) {
  Tensor<T> out(a->shape());
  kern::square(a->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("square", std::move(out), {a},
                      [](const Var<T>& gy, const Var<T>& self) {
                        return std::vector<Var<T>>{mul(gy, scale(self->inputs[0], T(2)))};
                      });
}

template <typename T>
Var<T> exp(const Var<T>& a) {
  Tensor<T> out(a->shape());
  kern::exp(a->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("exp", std::move(out), {a},
                      [](const Var<T>& gy, const Var<T>& self) {
                        return std::vector<Var<T>>{mul(gy, self)};
                      });
}

template <typename T>
Var<T> log(const Var<T>& a) {
  Tensor<T> out(a->shape());
  kern::log(a->value.data(), out.mutable_data(), out.numel());
  return make_node<T>("log", std::move(out), {a},
                      [](const Var<T>& gy, const Var<T>& self) {
                        return std::vector<Var<T>>{div(gy, self->inputs[0])};
                      });
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape s) {
  Tensor<T> out = a->value.reshaped(s);  // shares storage
  Shape orig = a->shape();
  return make_node<T>("reshape", std::move(out), {a},
                      [orig](const Var<T>& gy, const Var<T>&) {
                        return std::vector<Var<T>>{reshape(gy, orig)};
                      });
}

template <typename T>
Var<T> broadcast_to(const Var<T>& a, Shape s) {
  const Shape& in = a->shape();
  if (in.rank() != s.rank())
    throw ShapeError("broadcast_to: rank mismatch " + in.str() + " vs " + s.str());
  std::vector<int> bcast_axes;
  for (int i = 0; i < in.rank(); ++i) {
    if (in[i] == s[i]) continue;
    if (in[i] != 1)
      throw ShapeError("broadcast_to: cannot expand " + in.str() + " to " + s.str());
    bcast_axes.push_back(i);
  }
  if (bcast_axes.empty()) return a;

  Tensor<T> out(s);
  int64_t sstr[5];
  padded_strides(in, sstr);
  // zero the stride on broadcast axes
  {
    const int off = 5 - in.rank();
    for (int ax : bcast_axes) sstr[off + ax] = 0;
  }
  Walk5 w(s);
  const T* src = a->value.data();
  T* dst = out.mutable_data();
  int64_t di = 0;
  for (int64_t i0 = 0; i0 < w.dims[0]; ++i0)
    for (int64_t i1 = 0; i1 < w.dims[1]; ++i1)
      for (int64_t i2 = 0; i2 < w.dims[2]; ++i2)
        for (int64_t i3 = 0; i3 < w.dims[3]; ++i3) {
          const int64_t base = i0 * sstr[0] + i1 * sstr[1] + i2 * sstr[2] + i3 * sstr[3];
          if (sstr[4] == 1) {
            std::copy(src + base, src + base + w.dims[4], dst + di);
            di += w.dims[4];
          } else {
            for (int64_t i4 = 0; i4 < w.dims[4]; ++i4) dst[di++] = src[base + i4 * sstr[4]];
          }
        }

  return make_node<T>("broadcast", std::move(out), {a},
                      [bcast_axes](const Var<T>& gy, const Var<T>&) {
                        return std::vector<Var<T>>{reduce_sum(gy, bcast_axes, true)};
                      });
}

template <typename T>
Var<T> reduce_sum(const Var<T>& a, std::vector<int> axes, bool keepdim) {
  const Shape& in = a->shape();
  std::sort(axes.begin(), axes.end());
  for (size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] < 0 || axes[i] >= in.rank())
      throw ShapeError("reduce_sum: axis out of range for " + in.str());
    if (i > 0 && axes[i] == axes[i - 1]) throw ShapeError("reduce_sum: duplicate axis");
  }
  bool reduced[Shape::kMaxRank] = {};
  for (int ax : axes) reduced[ax] = true;

  Shape keep_shape = in;  // same rank, reduced dims = 1
  for (int ax : axes) keep_shape[ax] = 1;

  Tensor<T> out(keep_shape);
  int64_t dstr[5];
  padded_strides(keep_shape, dstr);
  {
    const int off = 5 - in.rank();
    for (int ax : axes) dstr[off + ax] = 0;
  }
  Walk5 w(in);
  const T* src = a->value.data();
  T* dst = out.mutable_data();
  int64_t si = 0;
  for (int64_t i0 = 0; i0 < w.dims[0]; ++i0)
    for (int64_t i1 = 0; i1 < w.dims[1]; ++i1)
      for (int64_t i2 = 0; i2 < w.dims[2]; ++i2)
        for (int64_t i3 = 0; i3 < w.dims[3]; ++i3) {
          const int64_t base = i0 * dstr[0] + i1 * dstr[1] + i2 * dstr[2] + i3 * dstr[3];
          if (dstr[4] == 0) {
            T acc = T(0);
            for (int64_t i4 = 0; i4 < w.dims[4]; ++i4) acc += src[si++];
            dst[base] += acc;
          } else {
            for (int64_t i4 = 0; i4 < w.dims[4]; ++i4) dst[base + i4 * dstr[4]] += src[si++];
          }
        }

  if (!keepdim) {
    std::vector<int64_t> dims;
    for (int i = 0; i < in.rank(); ++i)
      if (!reduced[i]) dims.push_back(in[i]);
    if (dims.empty()) dims.push_back(1);
    Shape squeezed;
    switch (dims.size()) {
      case 1: squeezed = Shape{dims[0]}; break;
      case 2: squeezed = Shape{dims[0], dims[1]}; break;
      case 3: squeezed = Shape{dims[0], dims[1], dims[2]}; break;
      case 4: squeezed = Shape{dims[0], dims[1], dims[2], dims[3]}; break;
      default: squeezed = Shape{dims[0], dims[1], dims[2], dims[3], dims[4]}; break;
    }
    out = out.reshaped(squeezed);
  }

  Shape in_shape = in;
  Shape kshape = keep_shape;
  return make_node<T>("reduce_sum", std::move(out), {a},
                      [in_shape, kshape](const Var<T>& gy, const Var<T>&) {
                        Var<T> g = reshape(gy, kshape);
                        return std::vector<Var<T>>{broadcast_to(g, in_shape)};
                      });
}

template <typename T>
Var<T> reduce_mean(const Var<T>& a, std::vector<int> axes, bool keepdim) {
  int64_t count = 1;
  for (int ax : axes) count *= a->shape()[ax];
  return scale(reduce_sum(a, std::move(axes), keepdim), T(1) / static_cast<T>(count));
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  if (a->shape().rank() != 2 || b->shape().rank() != 2 || a->shape()[1] != b->shape()[0])
    throw ShapeError("matmul: incompatible shapes " + a->shape().str() + " x " +
                     b->shape().str());
  const int64_t m = a->shape()[0], k = a->shape()[1], n = b->shape()[1];
  Tensor<T> out(Shape{m, n});
  kern::gemm(false, false, m, n, k, T(1), a->value.data(), k, b->value.data(), n, T(0),
             out.mutable_data(), n);
  return make_node<T>("matmul", std::move(out), {a, b},
                      [](const Var<T>& gy, const Var<T>& self) {
                        const Var<T>& aa = self->inputs[0];
                        const Var<T>& bb = self->inputs[1];
                        return std::vector<Var<T>>{matmul(gy, transpose2d(bb)),
                                                   matmul(transpose2d(aa), gy)};
                      });
}

template <typename T>
Var<T> transpose2d(const Var<T>& a) {
  if (a->shape().rank() != 2) throw ShapeError("transpose2d expects rank-2");
  const int64_t m = a->shape()[0], n = a->shape()[1];
  Tensor<T> out(Shape{n, m});
  const T* src = a->value.data();
  T* dst = out.mutable_data();
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  return make_node<T>("transpose", std::move(out), {a},
                      [](const Var<T>& gy, const Var<T>&) {
                        return std::vector<Var<T>>{transpose2d(gy)};
                      });
}

template <typename T>
std::vector<Var<T>> grad(const Var<T>& y, const std::vector<Var<T>>& wrt,
                         bool create_graph, bool allow_unused) {
  if (!y) throw StateError("grad: null output");
  if (y->value.numel() != 1) throw InputError("grad: output must be scalar");
  if (!y->requires_grad)
    throw StateError("grad: output does not depend on any differentiable input");

  // Reverse topological order via iterative post-order DFS over grad-requiring
  // nodes.
  std::vector<Var<T>> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Var<T>, size_t>> stack;
  stack.emplace_back(y, 0);
  seen.insert(y.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->inputs.size()) {
      Var<T> child = node->inputs[idx++];
      if (child && child->requires_grad && !seen.count(child.get())) {
        seen.insert(child.get());
        stack.emplace_back(std::move(child), 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  GradModeGuard guard(create_graph);
  std::unordered_map<Node<T>*, Var<T>> gmap;
  gmap[y.get()] = constant(Tensor<T>::ones(y->shape()));

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Var<T>& node = *it;
    auto found = gmap.find(node.get());
    if (found == gmap.end() || !node->vjp) continue;
    std::vector<Var<T>> gs = node->vjp(found->second, node);
    if (gs.size() != node->inputs.size())
      throw StateError(std::string("vjp arity mismatch in op ") + node->op);
    for (size_t i = 0; i < gs.size(); ++i) {
      const Var<T>& input = node->inputs[i];
      if (!input || !input->requires_grad || !gs[i]) continue;
      auto slot = gmap.find(input.get());
      if (slot == gmap.end())
        gmap[input.get()] = gs[i];
      else
        slot->second = add(slot->second, gs[i]);
    }
  }

  std::vector<Var<T>> out;
  out.reserve(wrt.size());
  for (const auto& w : wrt) {
    auto found = w ? gmap.find(w.get()) : gmap.end();
    if (found != gmap.end()) {
      out.push_back(found->second);
    } else if (allow_unused) {
      out.push_back(constant(Tensor<T>::zeros(w->shape())));
    } else {
      throw StateError("grad: requested node is not part of the graph");
    }
  }
  return out;
}

#define MCL_INSTANTIATE(T)                                                               \
  template Var<T> make_node<T>(const char*, Tensor<T>, std::vector<Var<T>>,              \
                               typename Node<T>::VjpFn);                                 \
  template Var<T> constant<T>(Tensor<T>);                                                \
  template Var<T> constant_scalar<T>(T);                                                 \
  template Var<T> leaf<T>(Tensor<T>);                                                    \
  template Var<T> detach<T>(const Var<T>&);                                              \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                                  \
  template Var<T> sub<T>(const Var<T>&, const Var<T>&);                                  \
  template Var<T> mul<T>(const Var<T>&, const Var<T>&);                                  \
  template Var<T> div<T>(const Var<T>&, const Var<T>&);                                  \
  template Var<T> neg<T>(const Var<T>&);                                                 \
  template Var<T> scale<T>(const Var<T>&, T);                                            \
  template Var<T> add_scalar<T>(const Var<T>&, T);                                       \
  template Var<T> relu<T>(const Var<T>&);                                                \
  template Var<T> sqrt<T>(const Var<T>&);                                                \
  template Var<T> square<T>(const Var<T>&);                                              \
  template Var<T> exp<T>(const Var<T>&);                                                 \
  template Var<T> log<T>(const Var<T>&);                                                 \
  template Var<T> reshape<T>(const Var<T>&, Shape);                                      \
  template Var<T> broadcast_to<T>(const Var<T>&, Shape);                                 \
  template Var<T> reduce_sum<T>(const Var<T>&, std::vector<int>, bool);                  \
  template Var<T> reduce_mean<T>(const Var<T>&, std::vector<int>, bool);                 \
  template Var<T> matmul<T>(const Var<T>&, const Var<T>&);                               \
  template Var<T> transpose2d<T>(const Var<T>&);                                         \
  template std::vector<Var<T>> grad<T>(const Var<T>&, const std::vector<Var<T>>&, bool,  \
                                       bool);

MCL_INSTANTIATE(float)
MCL_INSTANTIATE(double)

#undef MCL_INSTANTIATE

}  // namespace mcl::nn
