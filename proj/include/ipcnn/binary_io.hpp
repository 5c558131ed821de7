#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ipcnn {

// Little-endian byte writer. Encoding is explicit so files are portable
// regardless of host byte order.
class ByteWriter {
 public:
  void put_bytes(std::string_view bytes);
  void put_u32(std::uint32_t value);
  void put_u64(std::uint64_t value);
  void put_f32(float value);

  const std::string& bytes() const { return buffer_; }

 private:
  std::string buffer_;
};

// Bounds-checked little-endian reader; any read past the end throws
// ErrorCode::kTruncatedFile naming `source`.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string source)
      : data_(data), source_(std::move(source)) {}

  std::string_view get_bytes(std::size_t count);
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  float get_f32();

  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& source() const { return source_; }

 private:
  void require(std::size_t count) const;

  std::span<const std::uint8_t> data_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Shortest round-trip decimal representation, '.' separator, no locale.
std::string format_real(double value);

}  // namespace ipcnn
