#pragma once

#include <string>
#include <vector>

#include "mcl/core/tensor.hpp"

namespace mcl::io {

// One dataset entry. Frames live as zero-padded PNGs ("000000.png", ...)
// under frame_dir; the motion cache resolves to <cache_dir>/<video_id>.mclm.
struct VideoRecord {
  std::string video_id;
  std::string frame_dir;
  int64_t n_frames = 0;
  int label = -1;
};

std::vector<VideoRecord> load_manifest(const std::string& path);
void save_manifest(const std::string& path, const std::vector<VideoRecord>& records);

std::string frame_path(const VideoRecord& rec, int64_t index);
std::string cache_path(const std::string& cache_dir, const std::string& video_id);

TensorF load_frame(const VideoRecord& rec, int64_t index);
std::vector<TensorF> load_frames(const VideoRecord& rec, const std::vector<int64_t>& indices);

}  // namespace mcl::io
