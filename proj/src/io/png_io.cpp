#include "mcl/io/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "mcl/core/error.hpp"

namespace mcl::io {

namespace {

struct File {
  std::FILE* f = nullptr;
  File(const std::string& path, const char* mode) : f(std::fopen(path.c_str(), mode)) {
    if (!f) throw IoError("cannot open " + path);
  }
  ~File() {
    if (f) std::fclose(f);
  }
};

}  // namespace

TensorF load_png(const std::string& path) {
  File file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png decode failed: " + path);
  }
  png_init_io(png, file.f);
  png_read_info(png, info);

  png_set_expand(png);           // palette -> rgb, bit depth < 8 -> 8
  png_set_strip_16(png);         // 16 -> 8
  png_set_strip_alpha(png);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const png_uint_32 h = png_get_image_height(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: unsupported channel count " + std::to_string(channels) + " in " + path);
  }

  std::vector<unsigned char> raw(static_cast<size_t>(h) * w * channels);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = raw.data() + static_cast<size_t>(y) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  TensorF out(Shape{static_cast<int64_t>(h), static_cast<int64_t>(w), channels});
  float* p = out.mutable_data();
  for (size_t i = 0; i < raw.size(); ++i) p[i] = raw[i] / 255.f;
  return out;
}

void save_png(const std::string& path, const TensorF& img) {
  int64_t h, w, c;
  if (img.rank() == 2) {
    h = img.dim(0);
    w = img.dim(1);
    c = 1;
  } else if (img.rank() == 3 && (img.dim(2) == 1 || img.dim(2) == 3)) {
    h = img.dim(0);
    w = img.dim(1);
    c = img.dim(2);
  } else {
    throw ShapeError("save_png expects [H,W], [H,W,1] or [H,W,3], got " + img.shape().str());
  }

  std::vector<unsigned char> raw(static_cast<size_t>(h) * w * c);
  const float* p = img.data();
  for (size_t i = 0; i < raw.size(); ++i) {
    const float v = std::fmin(1.f, std::fmax(0.f, p[i]));
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.f));
  }

  File file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png encode failed: " + path);
  }
  png_init_io(png, file.f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(h);
  for (int64_t y = 0; y < h; ++y)
    rows[y] = raw.data() + static_cast<size_t>(y) * w * c;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace mcl::io
