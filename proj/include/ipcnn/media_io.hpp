#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ipcnn::io {

inline constexpr int kBlockSize = 8;

// Single 8-bit luma sample grid, row-major.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, std::uint8_t fill = 0);
  Plane(int width, int height, std::vector<std::uint8_t> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return samples_.empty(); }

  std::uint8_t at(int x, int y) const { return samples_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return samples_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const std::uint8_t> samples() const { return samples_; }
  std::span<std::uint8_t> samples() { return samples_; }

  bool operator==(const Plane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> samples_;
};

struct BlockOrigin {
  int x = 0;
  int y = 0;
  bool operator==(const BlockOrigin&) const = default;
};

enum class LumaFormat { kRawY, kYuv420, kPgm };

std::optional<LumaFormat> parse_format(std::string_view name);
std::string_view format_name(LumaFormat format);

// Reads one luma plane. For raw-y and yuv420 the declared dimensions must be
// consistent with the file size; for pgm the header is authoritative and
// declared dimensions of 0 mean "take from header". Non-aligned dimensions
// are cropped down to a multiple of 8 from the bottom/right.
Plane load_luma(const std::filesystem::path& path, int width, int height, LumaFormat format,
                int frame_index = 0);

// Headerless row-major dump, the inverse of load_luma(kRawY) for aligned planes.
void write_raw_y(const std::filesystem::path& path, const Plane& plane);
void write_pgm(const std::filesystem::path& path, const Plane& plane);

Plane crop_to_blocks(const Plane& plane);

// Raster order, step 8.
std::vector<BlockOrigin> tile_origins(const Plane& plane);

}  // namespace ipcnn::io
