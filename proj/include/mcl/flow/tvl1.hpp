#pragma once

#include <vector>

#include "mcl/core/tensor.hpp"
#include "mcl/flow/motion.hpp"

namespace mcl::flow {

// Zach/Pock/Bischof duality-based TV-L1 solver parameters. Defaults follow
// the published reference implementation of the method.
struct Tvl1Params {
  float lambda_data = 0.15f;   // data attachment weight
  float theta = 0.3f;          // quadratic coupling
  float tau_step = 0.25f;      // primal-dual time step
  int pyramid_levels = 5;
  float pyramid_scale = 0.5f;  // per-level downscale factor, in (0,1)
  int warps_per_level = 5;
  int inner_iterations = 10;   // fixed-point iterations per warp
  float stop_epsilon = 0.01f;  // early-exit threshold on the mean update

  void validate() const;  // throws ConfigError
};

// Dense flow mapping prev -> next. Color frames ([H,W,3]) are converted to
// luminance internally; [H,W] and [H,W,1] are accepted as grayscale.
// Deterministic for fixed inputs and params.
FlowPair tvl1_flow(const TensorF& prev, const TensorF& next,
                   const Tvl1Params& params = {});

// Same, recording the true TV-L1 energy after each warp at the finest
// pyramid level. The solver rejects warp iterations that would increase this
// energy, so the trace is non-increasing by construction.
FlowPair tvl1_flow_traced(const TensorF& prev, const TensorF& next,
                          const Tvl1Params& params,
                          std::vector<double>* finest_energies);

// Flow for every consecutive pair; entry N-1 is a copy of entry N-2.
FlowSequence flow_sequence(const std::vector<TensorF>& video,
                           const Tvl1Params& params = {});

}  // namespace mcl::flow
