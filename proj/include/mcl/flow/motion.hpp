#pragma once

#include <vector>

#include "mcl/core/tensor.hpp"

namespace mcl::flow {

// Dense displacement field between two frames, pixels/frame.
struct FlowPair {
  TensorF u;  // [H,W] horizontal
  TensorF v;  // [H,W] vertical
};

// One FlowPair per frame; the last entry duplicates the previous one so the
// sequence length matches the frame count.
struct FlowSequence {
  std::vector<FlowPair> flows;
  int64_t size() const { return static_cast<int64_t>(flows.size()); }
};

// Per-frame motion maps plus their temporal/spatial average poolings.
struct MotionVolume {
  TensorF st;  // [N,H,W], nonnegative
  TensorF s;   // [H,W]  = mean over frames
  TensorF t;   // [N]    = mean over pixels
};

// x- and y- derivatives of both flow components.
struct MotionBoundary {
  TensorF ux, uy, vx, vy;  // each [H,W]
};

struct NormalizedMap {
  TensorF map;
  bool zero_flag = false;  // input norm was below eps; map left all-zero
};

// Central differences on interior pixels, replicate padding at the borders.
MotionBoundary motion_boundary(const FlowPair& flow);

// Pointwise sqrt of the summed squared motion-boundary maps. Invariant to
// adding any constant field to the flow.
TensorF motion_map(const FlowPair& flow);

MotionVolume build_motion_volume(const FlowSequence& flows);

// Rebuild pooled views from an existing stack of motion maps (used for
// cropped sub-volumes).
MotionVolume volume_from_st(TensorF st);

NormalizedMap l2_normalize_map(const TensorF& in, double eps = 1e-8);

}  // namespace mcl::flow
