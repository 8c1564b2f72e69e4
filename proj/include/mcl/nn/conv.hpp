#pragma once

#include <array>

#include "mcl/nn/graph.hpp"

namespace mcl::nn {

struct Conv3dSpec {
  std::array<int64_t, 3> stride{1, 1, 1};  // t, h, w
  std::array<int64_t, 3> pad{0, 0, 0};
};

// x: [N,Ci,T,H,W], w: [Co,Ci,kt,kh,kw] -> [N,Co,To,Ho,Wo].
// The three ops below form a closed family under differentiation: each vjp is
// expressed with the other two, which is what makes double backprop through
// convolutions exact.
template <typename T>
Var<T> conv3d(const Var<T>& x, const Var<T>& w, const Conv3dSpec& spec);

template <typename T>
Var<T> conv3d_input_grad(const Var<T>& gy, const Var<T>& w, Shape x_shape,
                         const Conv3dSpec& spec);

template <typename T>
Var<T> conv3d_weight_grad(const Var<T>& x, const Var<T>& gy, Shape w_shape,
                          const Conv3dSpec& spec);

Shape conv3d_output_shape(const Shape& x, const Shape& w, const Conv3dSpec& spec);

}  // namespace mcl::nn
