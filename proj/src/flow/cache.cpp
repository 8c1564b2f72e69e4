#include "mcl/flow/cache.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>

#include "mcl/core/error.hpp"

namespace mcl::flow {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'L', 'M'};
constexpr uint32_t kVersion = 1;

struct File {
  std::FILE* f = nullptr;
  explicit File(const std::string& path, const char* mode) : f(std::fopen(path.c_str(), mode)) {
    if (!f) throw IoError("cannot open " + path);
  }
  ~File() {
    if (f) std::fclose(f);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;
};

void put_u32(std::FILE* f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  if (std::fwrite(b, 1, 4, f) != 4) throw IoError("motion cache: short write");
}

uint32_t get_u32(std::FILE* f, const std::string& path) {
  unsigned char b[4];
  if (std::fread(b, 1, 4, f) != 4) throw IoError("motion cache: short read in " + path);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

MotionCacheHeader read_header(std::FILE* f, const std::string& path) {
  char magic[4];
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a motion cache (bad magic): " + path);
  const uint32_t version = get_u32(f, path);
  if (version != kVersion)
    throw IoError("unsupported motion cache version " + std::to_string(version) + " in " + path);
  MotionCacheHeader h;
  h.n = get_u32(f, path);
  h.h = get_u32(f, path);
  h.w = get_u32(f, path);
  return h;
}

constexpr int64_t kHeaderBytes = 4 + 4 * 4;

}  // namespace

void write_motion_cache(const std::string& path, const TensorF& st) {
  if (st.rank() != 3) throw ShapeError("motion cache expects [N,H,W], got " + st.shape().str());
  const std::string tmp = path + ".tmp";
  {
    File out(tmp, "wb");
    if (std::fwrite(kMagic, 1, 4, out.f) != 4) throw IoError("motion cache: short write");
    put_u32(out.f, kVersion);
    put_u32(out.f, static_cast<uint32_t>(st.dim(0)));
    put_u32(out.f, static_cast<uint32_t>(st.dim(1)));
    put_u32(out.f, static_cast<uint32_t>(st.dim(2)));
    const size_t n = static_cast<size_t>(st.numel());
    if (std::fwrite(st.data(), sizeof(float), n, out.f) != n)
      throw IoError("motion cache: short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

MotionCacheHeader read_motion_cache_header(const std::string& path) {
  File in(path, "rb");
  return read_header(in.f, path);
}

TensorF read_motion_cache(const std::string& path) {
  File in(path, "rb");
  const MotionCacheHeader h = read_header(in.f, path);
  TensorF st(Shape{h.n, h.h, h.w});
  const size_t n = static_cast<size_t>(st.numel());
  if (std::fread(st.mutable_data(), sizeof(float), n, in.f) != n)
    throw IoError("motion cache: truncated payload in " + path);
  return st;
}

TensorF read_motion_cache_frames(const std::string& path,
                                 const std::vector<int64_t>& frames) {
  File in(path, "rb");
  const MotionCacheHeader h = read_header(in.f, path);
  const int64_t plane = static_cast<int64_t>(h.h) * h.w;
  TensorF out(Shape{static_cast<int64_t>(frames.size()), h.h, h.w});
  for (size_t i = 0; i < frames.size(); ++i) {
    const int64_t fi = frames[i];
    if (fi < 0 || fi >= static_cast<int64_t>(h.n))
      throw InputError("motion cache: frame " + std::to_string(fi) + " out of range in " + path);
    if (std::fseek(in.f, kHeaderBytes + fi * plane * static_cast<int64_t>(sizeof(float)),
                   SEEK_SET) != 0)
      throw IoError("motion cache: seek failed in " + path);
    if (std::fread(out.mutable_data() + static_cast<int64_t>(i) * plane, sizeof(float),
                   static_cast<size_t>(plane), in.f) != static_cast<size_t>(plane))
      throw IoError("motion cache: truncated frame in " + path);
  }
  return out;
}

}  // namespace mcl::flow
