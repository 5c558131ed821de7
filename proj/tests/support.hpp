#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "ipcnn/intra_codec.hpp"
#include "ipcnn/media_io.hpp"
#include "ipcnn/nn/model.hpp"

namespace ipcnn::test {

// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ipcnn-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline io::Plane random_plane(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  io::Plane p(w, h);
  for (auto& s : p.samples()) s = static_cast<std::uint8_t>(d(rng));
  return p;
}

// Smooth gradient plus mild noise; closer to natural content than uniform noise.
inline io::Plane textured_plane(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 6.0);
  std::uniform_real_distribution<double> phase(0.0, 6.28);
  const double a = phase(rng), b = phase(rng);
  io::Plane p(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = 128.0 + 60.0 * std::sin(0.11 * x + a) * std::cos(0.07 * y + b) + 0.8 * (x - y) + noise(rng);
      p.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return p;
}

inline codec::RefSamples random_refs(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 255);
  codec::RefSamples r;
  for (auto& v : r.left) v = d(rng);
  for (auto& v : r.top) v = d(rng);
  r.corner = d(rng);
  r.available.fill(true);
  return r;
}

inline void zero_last_layer(nn::IpcnnModel& model) {
  auto& last = model.layers.back().conv;
  std::fill(last.weights.begin(), last.weights.end(), 0.0);
  std::fill(last.bias.begin(), last.bias.end(), 0.0);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace ipcnn::test
