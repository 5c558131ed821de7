#include "ipcnn/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "ipcnn/binary_io.hpp"
#include "ipcnn/error.hpp"

namespace ipcnn::data {

namespace {

constexpr std::string_view kMagic = "IPDS";

std::string origin_text(BlockOrigin o) { return "(" + std::to_string(o.x) + "," + std::to_string(o.y) + ")"; }

void require_context(const Plane& plane, BlockOrigin pu) {
  if (!has_full_context(pu)) {
    throw Error(ErrorCode::kContextUnavailable, "PU " + origin_text(pu) + " is on the top row or left column");
  }
  if (pu.x % 8 != 0 || pu.y % 8 != 0 || pu.x + 8 > plane.width() || pu.y + 8 > plane.height()) {
    throw Error(ErrorCode::kOutOfBounds, "PU " + origin_text(pu) + " outside " + std::to_string(plane.width()) + "x" +
                                             std::to_string(plane.height()) + " plane");
  }
}

}  // namespace

Quadrant quadrant_of(int x, int y) {
  if (y < 8) return x < 8 ? Quadrant::kTopLeft : Quadrant::kTopRight;
  return x < 8 ? Quadrant::kBottomLeft : Quadrant::kPu;
}

double normalize_sample(int value) { return value / 255.0; }

int denormalize_sample(double value) {
  return static_cast<int>(std::clamp<long>(codec::round_half_away(value * 255.0), 0, 255));
}

bool has_full_context(BlockOrigin pu_origin) { return pu_origin.x >= 8 && pu_origin.y >= 8; }

ContextBlock16 assemble_context(const Plane& recon, const codec::Block8& pu_prediction, BlockOrigin pu_origin) {
  require_context(recon, pu_origin);
  ContextBlock16 ctx;
  ctx.pu_origin = pu_origin;
  ctx.recon_origins = {BlockOrigin{pu_origin.x - 8, pu_origin.y - 8}, BlockOrigin{pu_origin.x, pu_origin.y - 8},
                       BlockOrigin{pu_origin.x - 8, pu_origin.y}};
  const int x0 = pu_origin.x - 8;
  const int y0 = pu_origin.y - 8;
  for (int y = 0; y < kContextSize; ++y) {
    for (int x = 0; x < kContextSize; ++x) {
      const int v = is_pu_quadrant(x, y) ? pu_prediction[(y - 8) * 8 + (x - 8)] : recon.at(x0 + x, y0 + y);
      ctx.values[y * kContextSize + x] = normalize_sample(v);
    }
  }
  return ctx;
}

ContextBlock16 extract_context(const Plane& recon, const std::vector<codec::PuRecord>& records, BlockOrigin pu_origin) {
  require_context(recon, pu_origin);
  // Records from reconstruct_plane are in raster order; fall back to a scan otherwise.
  const std::size_t raster = static_cast<std::size_t>(pu_origin.y / 8) * (recon.width() / 8) + pu_origin.x / 8;
  const codec::PuRecord* record = nullptr;
  if (raster < records.size() && records[raster].origin == pu_origin) {
    record = &records[raster];
  } else {
    auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.origin == pu_origin; });
    if (it != records.end()) record = &*it;
  }
  if (record == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "no PU record for " + origin_text(pu_origin));
  }
  return assemble_context(recon, record->prediction, pu_origin);
}

Grid16 original_window(const Plane& original, BlockOrigin pu_origin) {
  const int x0 = pu_origin.x - 8;
  const int y0 = pu_origin.y - 8;
  if (x0 < 0 || y0 < 0 || x0 + kContextSize > original.width() || y0 + kContextSize > original.height()) {
    throw Error(ErrorCode::kOutOfBounds, "16x16 window for PU " + origin_text(pu_origin) + " leaves the plane");
  }
  Grid16 out{};
  for (int y = 0; y < kContextSize; ++y) {
    for (int x = 0; x < kContextSize; ++x) out[y * kContextSize + x] = normalize_sample(original.at(x0 + x, y0 + y));
  }
  return out;
}

TrainingSample make_training_sample(const ContextBlock16& context, const Plane& original, BlockOrigin pu_origin) {
  TrainingSample s;
  s.input = context.values;
  s.original = original_window(original, pu_origin);
  for (int i = 0; i < kContextArea; ++i) s.target[i] = s.input[i] - s.original[i];
  return s;
}

DatasetRecord to_record(const TrainingSample& sample) {
  DatasetRecord r;
  for (int i = 0; i < kContextArea; ++i) {
    r.input[i] = static_cast<float>(sample.input[i]);
    r.target[i] = static_cast<float>(sample.target[i]);
  }
  return r;
}

std::vector<TrainingSample> build_samples(const Plane& plane, codec::Qp qp) {
  const auto coded = codec::reconstruct_plane(plane, qp);
  std::vector<TrainingSample> samples;
  for (const auto& record : coded.records) {
    if (!has_full_context(record.origin)) continue;
    const auto ctx = extract_context(coded.recon, coded.records, record.origin);
    samples.push_back(make_training_sample(ctx, plane, record.origin));
  }
  return samples;
}

Dataset build_dataset(std::span<const Plane> corpus, codec::Qp qp) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus contains no planes");
  Dataset ds;
  ds.qp = qp.value();
  for (const auto& plane : corpus) {
    for (const auto& sample : build_samples(plane, qp)) ds.records.push_back(to_record(sample));
  }
  return ds;
}

std::string serialize_dataset(const Dataset& dataset) {
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put_u32(Dataset::kVersion);
  w.put_u32(static_cast<std::uint32_t>(dataset.qp));
  w.put_u64(dataset.records.size());
  w.put_u32(kContextSize);
  w.put_u32(kContextSize);
  for (const auto& r : dataset.records) {
    for (float v : r.input) w.put_f32(v);
    for (float v : r.target) w.put_f32(v);
  }
  return w.bytes();
}

Dataset parse_dataset(std::span<const std::uint8_t> bytes, const std::string& source) {
  ByteReader r(bytes, source);
  if (bytes.size() < kMagic.size() || r.get_bytes(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kMagicMismatch, source + " is not an IPDS dataset");
  }
  const auto version = r.get_u32();
  if (version != Dataset::kVersion) {
    throw Error(ErrorCode::kVersionMismatch, source + " has dataset version " + std::to_string(version));
  }
  Dataset ds;
  ds.qp = static_cast<int>(r.get_u32());
  const auto count = r.get_u64();
  const auto height = r.get_u32();
  const auto width = r.get_u32();
  if (height != kContextSize || width != kContextSize) {
    throw Error(ErrorCode::kShapeMismatch, source + " stores " + std::to_string(width) + "x" + std::to_string(height) +
                                               " samples, expected 16x16");
  }
  const std::uint64_t record_bytes = 2ull * kContextArea * 4;
  if (r.remaining() != count * record_bytes) {
    if (r.remaining() < count * record_bytes) {
      throw Error(ErrorCode::kTruncatedFile, source + " declares " + std::to_string(count) + " samples but holds " +
                                                 std::to_string(r.remaining() / record_bytes));
    }
    throw Error(ErrorCode::kSizeMismatch, source + " has trailing bytes after " + std::to_string(count) + " samples");
  }
  ds.records.resize(count);
  for (auto& rec : ds.records) {
    for (float& v : rec.input) v = r.get_f32();
    for (float& v : rec.target) v = r.get_f32();
  }
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  write_file_atomic(path, serialize_dataset(dataset));
}

Dataset read_dataset(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_dataset(bytes, path.string());
}

}  // namespace ipcnn::data
