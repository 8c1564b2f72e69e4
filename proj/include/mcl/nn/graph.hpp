#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mcl/core/tensor.hpp"

namespace mcl::nn {

// Define-by-run reverse-mode autodiff. Every op's vjp is expressed with the
// same op builders, so grad() with create_graph=true yields nodes that can be
// differentiated again (double backprop, used by the gradient-map losses).

template <typename T>
class Node;
template <typename T>
using Var = std::shared_ptr<Node<T>>;

bool grad_mode();

// Sets graph recording for the current thread (RAII).
class GradModeGuard {
 public:
  explicit GradModeGuard(bool enable);
  ~GradModeGuard();
  GradModeGuard(const GradModeGuard&) = delete;

 private:
  bool prev_;
};

struct NoGradGuard : GradModeGuard {
  NoGradGuard() : GradModeGuard(false) {}
};

template <typename T>
class Node {
 public:
  using VjpFn =
      std::function<std::vector<Var<T>>(const Var<T>& gy, const Var<T>& self)>;

  Tensor<T> value;
  std::vector<Var<T>> inputs;  // retained only while recording
  VjpFn vjp;                   // null for leaves and constants
  bool requires_grad = false;
  const char* op = "leaf";

  const Shape& shape() const { return value.shape(); }
};

template <typename T>
Var<T> make_node(const char* op, Tensor<T> value, std::vector<Var<T>> inputs,
                 typename Node<T>::VjpFn vjp);

template <typename T>
Var<T> constant(Tensor<T> v);
template <typename T>
Var<T> constant_scalar(T v);
template <typename T>
Var<T> leaf(Tensor<T> v);  // trainable parameter
template <typename T>
Var<T> detach(const Var<T>& a);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> neg(const Var<T>& a);
template <typename T>
Var<T> scale(const Var<T>& a, T s);
template <typename T>
Var<T> add_scalar(const Var<T>& a, T c);
template <typename T>
Var<T> relu(const Var<T>& a);
template <typename T>
Var<T> sqrt(const Var<T>& a);
template <typename T>
Var<T> square(const Var<T>& a);
template <typename T>
Var<T> exp(const Var<T>& a);
template <typename T>
Var<T> log(const Var<T>& a);

template <typename T>
Var<T> reshape(const Var<T>& a, Shape s);
// a's rank must equal s's; broadcast axes must have size 1 in a.
template <typename T>
Var<T> broadcast_to(const Var<T>& a, Shape s);
template <typename T>
Var<T> reduce_sum(const Var<T>& a, std::vector<int> axes, bool keepdim);
template <typename T>
Var<T> reduce_mean(const Var<T>& a, std::vector<int> axes, bool keepdim);
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b);  // [m,k]x[k,n]
template <typename T>
Var<T> transpose2d(const Var<T>& a);

// Gradient of scalar y w.r.t. each node in wrt. With allow_unused, nodes not
// reached by the graph yield zero tensors instead of a StateError.
template <typename T>
std::vector<Var<T>> grad(const Var<T>& y, const std::vector<Var<T>>& wrt,
                         bool create_graph, bool allow_unused = false);

}  // namespace mcl::nn
