#include "mcl/io/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mcl/core/error.hpp"

namespace mcl::io {

namespace {

struct Dims {
  int64_t h, w, c;
  bool has_channel_dim;
};

Dims dims_of(const TensorF& img) {
  if (img.rank() == 2) return {img.dim(0), img.dim(1), 1, false};
  if (img.rank() == 3) return {img.dim(0), img.dim(1), img.dim(2), true};
  throw ShapeError("expected [H,W] or [H,W,C] image, got " + img.shape().str());
}

Shape make_shape(const Dims& d, int64_t h, int64_t w) {
  return d.has_channel_dim ? Shape{h, w, d.c} : Shape{h, w};
}

}  // namespace

TensorF crop(const TensorF& img, int64_t top, int64_t left, int64_t height, int64_t width) {
  const Dims d = dims_of(img);
  if (top < 0 || left < 0 || height < 1 || width < 1 || top + height > d.h ||
      left + width > d.w)
    throw InputError("crop box out of bounds: top=" + std::to_string(top) +
                     " left=" + std::to_string(left) + " h=" + std::to_string(height) +
                     " w=" + std::to_string(width) + " on " + img.shape().str());
  TensorF out(make_shape(d, height, width));
  const float* src = img.data();
  float* dst = out.mutable_data();
  for (int64_t y = 0; y < height; ++y) {
    const float* row = src + ((top + y) * d.w + left) * d.c;
    std::copy(row, row + width * d.c, dst + y * width * d.c);
  }
  return out;
}

TensorF resize_bilinear(const TensorF& img, int64_t out_h, int64_t out_w) {
  const Dims d = dims_of(img);
  if (out_h < 1 || out_w < 1) throw InputError("resize target must be positive");
  if (out_h == d.h && out_w == d.w) return img;
  TensorF out(make_shape(d, out_h, out_w));
  const float* src = img.data();
  float* dst = out.mutable_data();
  // align-corners=false convention
  const double sy = static_cast<double>(d.h) / out_h;
  const double sx = static_cast<double>(d.w) / out_w;
  for (int64_t y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(d.h - 1));
    const int64_t y0 = static_cast<int64_t>(fy);
    const int64_t y1 = std::min(y0 + 1, d.h - 1);
    const double wy = fy - y0;
    for (int64_t x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(d.w - 1));
      const int64_t x0 = static_cast<int64_t>(fx);
      const int64_t x1 = std::min(x0 + 1, d.w - 1);
      const double wx = fx - x0;
      for (int64_t ch = 0; ch < d.c; ++ch) {
        const double a = src[(y0 * d.w + x0) * d.c + ch];
        const double b = src[(y0 * d.w + x1) * d.c + ch];
        const double c2 = src[(y1 * d.w + x0) * d.c + ch];
        const double e = src[(y1 * d.w + x1) * d.c + ch];
        dst[(y * out_w + x) * d.c + ch] = static_cast<float>(
            (1 - wy) * ((1 - wx) * a + wx * b) + wy * ((1 - wx) * c2 + wx * e));
      }
    }
  }
  return out;
}

TensorF flip_horizontal(const TensorF& img) {
  const Dims d = dims_of(img);
  TensorF out(img.shape());
  const float* src = img.data();
  float* dst = out.mutable_data();
  for (int64_t y = 0; y < d.h; ++y)
    for (int64_t x = 0; x < d.w; ++x)
      for (int64_t ch = 0; ch < d.c; ++ch)
        dst[(y * d.w + x) * d.c + ch] = src[(y * d.w + (d.w - 1 - x)) * d.c + ch];
  return out;
}

TensorF gaussian_blur(const TensorF& img, double sigma) {
  if (sigma <= 0.0) return img;
  const Dims d = dims_of(img);
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(radius + 1);
  double ksum = 0.0;
  for (int i = 0; i <= radius; ++i) {
    kernel[i] = std::exp(-0.5 * i * i / (sigma * sigma));
    ksum += i == 0 ? kernel[i] : 2 * kernel[i];
  }
  for (auto& k : kernel) k /= ksum;

  TensorF tmp(img.shape()), out(img.shape());
  const float* src = img.data();
  float* t = tmp.mutable_data();
  for (int64_t y = 0; y < d.h; ++y)
    for (int64_t x = 0; x < d.w; ++x)
      for (int64_t ch = 0; ch < d.c; ++ch) {
        double acc = kernel[0] * src[(y * d.w + x) * d.c + ch];
        for (int i = 1; i <= radius; ++i) {
          const int64_t xl = std::max<int64_t>(0, x - i);
          const int64_t xr = std::min(d.w - 1, x + i);
          acc += kernel[i] * (src[(y * d.w + xl) * d.c + ch] + src[(y * d.w + xr) * d.c + ch]);
        }
        t[(y * d.w + x) * d.c + ch] = static_cast<float>(acc);
      }
  float* o = out.mutable_data();
  for (int64_t y = 0; y < d.h; ++y)
    for (int64_t x = 0; x < d.w; ++x)
      for (int64_t ch = 0; ch < d.c; ++ch) {
        double acc = kernel[0] * t[(y * d.w + x) * d.c + ch];
        for (int i = 1; i <= radius; ++i) {
          const int64_t yu = std::max<int64_t>(0, y - i);
          const int64_t yd = std::min(d.h - 1, y + i);
          acc += kernel[i] * (t[(yu * d.w + x) * d.c + ch] + t[(yd * d.w + x) * d.c + ch]);
        }
        o[(y * d.w + x) * d.c + ch] = static_cast<float>(acc);
      }
  return out;
}

TensorF rgb_to_gray(const TensorF& img) {
  const Dims d = dims_of(img);
  if (d.c == 1) return img;
  if (d.c != 3) throw ShapeError("rgb_to_gray expects 1 or 3 channels");
  TensorF out(img.shape());
  const float* src = img.data();
  float* dst = out.mutable_data();
  for (int64_t i = 0; i < d.h * d.w; ++i) {
    const float g = 0.299f * src[3 * i] + 0.587f * src[3 * i + 1] + 0.114f * src[3 * i + 2];
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = g;
  }
  return out;
}

TensorF center_crop(const TensorF& img, int64_t size) {
  const Dims d = dims_of(img);
  if (size > d.h || size > d.w)
    throw InputError("center_crop size " + std::to_string(size) + " exceeds image " +
                     img.shape().str());
  return crop(img, (d.h - size) / 2, (d.w - size) / 2, size, size);
}

}  // namespace mcl::io
