#include "ipcnn/binary_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ipcnn/error.hpp"

namespace ipcnn {

void ByteWriter::put_bytes(std::string_view bytes) { buffer_.append(bytes); }

void ByteWriter::put_u32(std::uint32_t value) {
  for (int i = 0; i < 4; ++i) buffer_.push_back(static_cast<char>((value >> (8 * i)) & 0xFFu));
}

void ByteWriter::put_u64(std::uint64_t value) {
  for (int i = 0; i < 8; ++i) buffer_.push_back(static_cast<char>((value >> (8 * i)) & 0xFFu));
}

void ByteWriter::put_f32(float value) { put_u32(std::bit_cast<std::uint32_t>(value)); }

void ByteReader::require(std::size_t count) const {
  if (count > remaining()) {
    throw Error(ErrorCode::kTruncatedFile, source_ + " ends after " + std::to_string(data_.size()) +
                                               " bytes, needed " + std::to_string(count) + " more at offset " +
                                               std::to_string(pos_));
  }
}

std::string_view ByteReader::get_bytes(std::size_t count) {
  require(count);
  std::string_view out(reinterpret_cast<const char*>(data_.data() + pos_), count);
  pos_ += count;
  return out;
}

std::uint32_t ByteReader::get_u32() {
  require(4);
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return value;
}

std::uint64_t ByteReader::get_u64() {
  require(8);
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return value;
}

float ByteReader::get_f32() { return std::bit_cast<float>(get_u32()); }

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileMissing, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileMissing, path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot rename " + tmp.string() + " to " + path.string());
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

}  // namespace ipcnn
