#include "mcl/io/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "mcl/core/error.hpp"
#include "mcl/io/png_io.hpp"

namespace mcl::io {

using nlohmann::json;

std::vector<VideoRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("manifest " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_array()) throw IoError("manifest " + path + " must be a JSON array of records");
  std::vector<VideoRecord> out;
  out.reserve(j.size());
  for (const auto& r : j) {
    VideoRecord rec;
    try {
      rec.video_id = r.at("video_id").get<std::string>();
      rec.frame_dir = r.at("frame_dir").get<std::string>();
      rec.n_frames = r.at("n_frames").get<int64_t>();
      rec.label = r.at("label").get<int>();
    } catch (const json::exception& e) {
      throw IoError("manifest " + path + ": bad record: " + e.what());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void save_manifest(const std::string& path, const std::vector<VideoRecord>& records) {
  json j = json::array();
  for (const auto& r : records)
    j.push_back({{"video_id", r.video_id},
                 {"frame_dir", r.frame_dir},
                 {"n_frames", r.n_frames},
                 {"label", r.label}});
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write manifest " + tmp);
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

std::string frame_path(const VideoRecord& rec, int64_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06lld.png", static_cast<long long>(index));
  return rec.frame_dir + "/" + name;
}

std::string cache_path(const std::string& cache_dir, const std::string& video_id) {
  return cache_dir + "/" + video_id + ".mclm";
}

TensorF load_frame(const VideoRecord& rec, int64_t index) {
  if (index < 0 || index >= rec.n_frames)
    throw InputError("frame index " + std::to_string(index) + " out of range for video " +
                     rec.video_id);
  return load_png(frame_path(rec, index));
}

std::vector<TensorF> load_frames(const VideoRecord& rec, const std::vector<int64_t>& indices) {
  std::vector<TensorF> out;
  out.reserve(indices.size());
  for (int64_t i : indices) out.push_back(load_frame(rec, i));
  return out;
}

}  // namespace mcl::io
