#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcl/core/tensor.hpp"

namespace mcl::flow {

// Motion cache file, one per video:
//   magic "MCLM" | u32 version=1 | u32 N | u32 H | u32 W |
//   N*H*W float32 motion-map values, frame-major row-major, little-endian.
struct MotionCacheHeader {
  uint32_t n = 0, h = 0, w = 0;
};

void write_motion_cache(const std::string& path, const TensorF& st);
MotionCacheHeader read_motion_cache_header(const std::string& path);
TensorF read_motion_cache(const std::string& path);  // [N,H,W]
// Gather only the requested frames (for clip sampling): returns [L,H,W].
TensorF read_motion_cache_frames(const std::string& path,
                                 const std::vector<int64_t>& frames);

}  // namespace mcl::flow
