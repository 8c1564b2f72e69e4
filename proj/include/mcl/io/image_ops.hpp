#pragma once

#include "mcl/core/tensor.hpp"

namespace mcl::io {

// Images are [H,W,C] (C in {1,3}) or single-channel [H,W] maps.

TensorF crop(const TensorF& img, int64_t top, int64_t left, int64_t height, int64_t width);
TensorF resize_bilinear(const TensorF& img, int64_t out_h, int64_t out_w);
TensorF flip_horizontal(const TensorF& img);
TensorF gaussian_blur(const TensorF& img, double sigma);
TensorF rgb_to_gray(const TensorF& img);  // keeps channel count (all equal)
TensorF center_crop(const TensorF& img, int64_t size);

}  // namespace mcl::io
