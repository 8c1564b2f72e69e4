#pragma once

#include <string>

#include "mcl/core/tensor.hpp"

namespace mcl::io {

// Reads an 8/16-bit PNG as [H,W,C] float in [0,1]; palette and alpha inputs
// are expanded/dropped so C is always 1 or 3.
TensorF load_png(const std::string& path);

// Writes [H,W], [H,W,1] or [H,W,3] as an 8-bit PNG, clamping to [0,1].
void save_png(const std::string& path, const TensorF& img);

}  // namespace mcl::io
