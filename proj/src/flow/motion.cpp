#include "mcl/flow/motion.hpp"

#include <cmath>

#include "mcl/core/error.hpp"
#include "mcl/kernels/kernels.hpp"

namespace mcl::flow {

namespace {

void check_flow(const FlowPair& flow) {
  if (flow.u.rank() != 2 || flow.u.shape() != flow.v.shape())
    throw ShapeError("flow components must be matching [H,W] maps");
  if (!flow.u.all_finite() || !flow.v.all_finite())
    throw InputError("flow contains non-finite values");
}

// d/dx and d/dy with central differences; the replicated border sample makes
// the one-sided difference at the edges come out as (f1-f0)/2.
void derivatives(const TensorF& f, TensorF& dx, TensorF& dy) {
  const int64_t h = f.dim(0), w = f.dim(1);
  const float* p = f.data();
  float* px = dx.mutable_data();
  float* py = dy.mutable_data();
  for (int64_t y = 0; y < h; ++y) {
    const int64_t ym = y > 0 ? y - 1 : 0;
    const int64_t yp = y < h - 1 ? y + 1 : h - 1;
    for (int64_t x = 0; x < w; ++x) {
      const int64_t xm = x > 0 ? x - 1 : 0;
      const int64_t xp = x < w - 1 ? x + 1 : w - 1;
      px[y * w + x] = 0.5f * (p[y * w + xp] - p[y * w + xm]);
      py[y * w + x] = 0.5f * (p[yp * w + x] - p[ym * w + x]);
    }
  }
}

}  // namespace

MotionBoundary motion_boundary(const FlowPair& flow) {
  check_flow(flow);
  MotionBoundary b{TensorF(flow.u.shape()), TensorF(flow.u.shape()),
                   TensorF(flow.u.shape()), TensorF(flow.u.shape())};
  derivatives(flow.u, b.ux, b.uy);
  derivatives(flow.v, b.vx, b.vy);
  return b;
}

TensorF motion_map(const FlowPair& flow) {
  MotionBoundary b = motion_boundary(flow);
  TensorF m(flow.u.shape());
  kern::hypot4(b.ux.data(), b.uy.data(), b.vx.data(), b.vy.data(),
               m.mutable_data(), m.numel());
  return m;
}

MotionVolume volume_from_st(TensorF st) {
  if (st.rank() != 3) throw ShapeError("motion volume expects [N,H,W], got " + st.shape().str());
  const int64_t n = st.dim(0), h = st.dim(1), w = st.dim(2);
  MotionVolume vol;
  vol.s = TensorF(Shape{h, w});
  vol.t = TensorF(Shape{n});
  const float* p = st.data();
  // double accumulation keeps the pooling-consistency identity tight
  std::vector<double> sacc(static_cast<size_t>(h * w), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    double tacc = 0.0;
    const float* frame = p + i * h * w;
    for (int64_t j = 0; j < h * w; ++j) {
      sacc[j] += frame[j];
      tacc += frame[j];
    }
    vol.t[i] = static_cast<float>(tacc / static_cast<double>(h * w));
  }
  for (int64_t j = 0; j < h * w; ++j)
    vol.s[j] = static_cast<float>(sacc[j] / static_cast<double>(n));
  vol.st = std::move(st);
  return vol;
}

MotionVolume build_motion_volume(const FlowSequence& flows) {
  if (flows.flows.empty()) throw InputError("build_motion_volume: empty flow sequence");
  const int64_t n = flows.size();
  const int64_t h = flows.flows[0].u.dim(0), w = flows.flows[0].u.dim(1);
  TensorF st(Shape{n, h, w});
  for (int64_t i = 0; i < n; ++i) {
    TensorF m = motion_map(flows.flows[i]);
    if (m.dim(0) != h || m.dim(1) != w)
      throw ShapeError("build_motion_volume: inconsistent flow shapes");
    std::copy(m.data(), m.data() + h * w, st.mutable_data() + i * h * w);
  }
  return volume_from_st(std::move(st));
}

NormalizedMap l2_normalize_map(const TensorF& in, double eps) {
  if (!in.all_finite()) throw InputError("l2_normalize_map: non-finite input");
  NormalizedMap out;
  double acc = 0.0;
  const float* p = in.data();
  for (int64_t i = 0; i < in.numel(); ++i) acc += static_cast<double>(p[i]) * p[i];
  const double norm = std::sqrt(acc);
  if (norm <= eps) {
    out.map = TensorF(in.shape());
    out.zero_flag = true;
    return out;
  }
  out.map = TensorF(in.shape());
  const float inv = static_cast<float>(1.0 / norm);
  kern::scale(p, inv, 0.f, out.map.mutable_data(), in.numel());
  return out;
}

}  // namespace mcl::flow
