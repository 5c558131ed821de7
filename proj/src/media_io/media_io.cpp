#include "ipcnn/media_io.hpp"

#include <cctype>
#include <string>

#include "ipcnn/binary_io.hpp"
#include "ipcnn/error.hpp"

namespace ipcnn::io {

Plane::Plane(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), samples_(static_cast<std::size_t>(width) * height, fill) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "plane dimensions must be positive");
  }
}

Plane::Plane(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "plane dimensions must be positive");
  }
  if (samples_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kSizeMismatch, "sample count " + std::to_string(samples_.size()) + " != " +
                                              std::to_string(width) + "x" + std::to_string(height));
  }
}

std::optional<LumaFormat> parse_format(std::string_view name) {
  if (name == "raw-y") return LumaFormat::kRawY;
  if (name == "yuv420" || name == "yuv420-first-frame") return LumaFormat::kYuv420;
  if (name == "pgm") return LumaFormat::kPgm;
  return std::nullopt;
}

std::string_view format_name(LumaFormat format) {
  switch (format) {
    case LumaFormat::kRawY: return "raw-y";
    case LumaFormat::kYuv420: return "yuv420";
    case LumaFormat::kPgm: return "pgm";
  }
  return "unknown";
}

Plane crop_to_blocks(const Plane& plane) {
  const int w = plane.width() / kBlockSize * kBlockSize;
  const int h = plane.height() / kBlockSize * kBlockSize;
  if (w == 0 || h == 0) {
    throw Error(ErrorCode::kSizeMismatch, "plane " + std::to_string(plane.width()) + "x" +
                                              std::to_string(plane.height()) + " is smaller than one 8x8 block");
  }
  if (w == plane.width() && h == plane.height()) return plane;
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = plane.at(x, y);
  }
  return out;
}

namespace {

std::string dims(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

Plane slice_plane(const std::vector<std::uint8_t>& bytes, std::size_t offset, int width, int height) {
  const auto n = static_cast<std::size_t>(width) * height;
  return Plane(width, height, std::vector<std::uint8_t>(bytes.begin() + offset, bytes.begin() + offset + n));
}

class PgmHeaderParser {
 public:
  PgmHeaderParser(const std::vector<std::uint8_t>& bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  std::size_t pos() const { return pos_; }

  void expect_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '5') fail("missing P5 magic");
    pos_ = 2;
  }

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected integer field");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) fail("header field too large");
      ++pos_;
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing whitespace after maxval");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::kMalformedPgmHeader, source_ + ": " + why);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

Plane load_pgm(const std::vector<std::uint8_t>& bytes, const std::string& source, int width, int height) {
  PgmHeaderParser parser(bytes, source);
  parser.expect_magic();
  const int w = parser.next_int();
  const int h = parser.next_int();
  const int maxval = parser.next_int();
  if (w <= 0 || h <= 0) parser.fail("non-positive dimensions");
  if (maxval != 255) parser.fail("maxval " + std::to_string(maxval) + " (only 255 supported)");
  parser.end_of_header();
  if ((width != 0 && width != w) || (height != 0 && height != h)) {
    throw Error(ErrorCode::kSizeMismatch, source + ": declared " + dims(width, height) + " but header says " + dims(w, h));
  }
  const auto needed = static_cast<std::size_t>(w) * h;
  if (bytes.size() - parser.pos() < needed) {
    throw Error(ErrorCode::kSizeMismatch, source + ": raster holds " + std::to_string(bytes.size() - parser.pos()) +
                                              " bytes, header needs " + std::to_string(needed));
  }
  return slice_plane(bytes, parser.pos(), w, h);
}

}  // namespace

Plane load_luma(const std::filesystem::path& path, int width, int height, LumaFormat format, int frame_index) {
  const std::string source = path.string();
  const auto bytes = read_file_bytes(path);

  if (format == LumaFormat::kPgm) return crop_to_blocks(load_pgm(bytes, source, width, height));

  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kSizeMismatch, source + ": declared dimensions " + dims(width, height) + " are not positive");
  }
  const auto luma_size = static_cast<std::size_t>(width) * height;
  if (format == LumaFormat::kRawY) {
    if (bytes.size() != luma_size) {
      throw Error(ErrorCode::kSizeMismatch, source + ": " + std::to_string(bytes.size()) + " bytes, expected " +
                                                std::to_string(luma_size) + " for raw-y " + dims(width, height));
    }
    return crop_to_blocks(slice_plane(bytes, 0, width, height));
  }

  const auto chroma_size = static_cast<std::size_t>((width + 1) / 2) * ((height + 1) / 2);
  const auto frame_size = luma_size + 2 * chroma_size;
  if (bytes.empty() || bytes.size() % frame_size != 0) {
    throw Error(ErrorCode::kSizeMismatch, source + ": " + std::to_string(bytes.size()) +
                                              " bytes is not a whole number of yuv420 " + dims(width, height) +
                                              " frames (" + std::to_string(frame_size) + " bytes each)");
  }
  const auto frames = bytes.size() / frame_size;
  if (frame_index < 0 || static_cast<std::size_t>(frame_index) >= frames) {
    throw Error(ErrorCode::kSizeMismatch, source + ": frame " + std::to_string(frame_index) + " requested, file has " +
                                              std::to_string(frames));
  }
  return crop_to_blocks(slice_plane(bytes, frame_size * static_cast<std::size_t>(frame_index), width, height));
}

void write_raw_y(const std::filesystem::path& path, const Plane& plane) {
  const auto s = plane.samples();
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(s.data()), s.size()));
}

void write_pgm(const std::filesystem::path& path, const Plane& plane) {
  std::string out = "P5\n" + std::to_string(plane.width()) + " " + std::to_string(plane.height()) + "\n255\n";
  const auto s = plane.samples();
  out.append(reinterpret_cast<const char*>(s.data()), s.size());
  write_file_atomic(path, out);
}

std::vector<BlockOrigin> tile_origins(const Plane& plane) {
  std::vector<BlockOrigin> origins;
  origins.reserve(static_cast<std::size_t>(plane.width() / kBlockSize) * (plane.height() / kBlockSize));
  for (int y = 0; y + kBlockSize <= plane.height(); y += kBlockSize) {
    for (int x = 0; x + kBlockSize <= plane.width(); x += kBlockSize) origins.push_back({x, y});
  }
  return origins;
}

}  // namespace ipcnn::io
