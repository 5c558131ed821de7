#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ipcnn/intra_codec.hpp"

namespace ipcnn::data {

using codec::BlockOrigin;
using codec::Plane;

inline constexpr int kContextSize = 16;
inline constexpr int kContextArea = kContextSize * kContextSize;

using Grid16 = std::array<double, kContextArea>;

// 16x16 network input, row-major, values in [0,1]. The top-left, top-right
// and bottom-left quadrants are reconstruction blocks; the bottom-right
// quadrant is the codec's best-mode prediction of the PU.
struct ContextBlock16 {
  Grid16 values{};
  BlockOrigin pu_origin;
  // Plane origins of the top-left, top-right and bottom-left quadrants.
  std::array<BlockOrigin, 3> recon_origins;
};

enum class Quadrant { kTopLeft, kTopRight, kBottomLeft, kPu };

Quadrant quadrant_of(int x, int y);
inline bool is_pu_quadrant(int x, int y) { return x >= 8 && y >= 8; }

double normalize_sample(int value);
// Inverse of normalize_sample for values in [0,1]; rounds half away from zero.
int denormalize_sample(double value);

bool has_full_context(BlockOrigin pu_origin);

// PU quadrant comes from the record's prediction, never its reconstruction.
ContextBlock16 extract_context(const Plane& recon, const std::vector<codec::PuRecord>& records, BlockOrigin pu_origin);

// Builds a context from explicit parts; used at inference where the PU prediction
// is not yet part of any record list.
ContextBlock16 assemble_context(const Plane& recon, const codec::Block8& pu_prediction, BlockOrigin pu_origin);

// The 16x16 original window co-located with a context, normalized.
Grid16 original_window(const Plane& original, BlockOrigin pu_origin);

// input = Y, original = X, target = V = Y - X.
struct TrainingSample {
  Grid16 input{};
  Grid16 original{};
  Grid16 target{};
};

TrainingSample make_training_sample(const ContextBlock16& context, const Plane& original, BlockOrigin pu_origin);

// On-disk form: float32 input and target per sample.
struct DatasetRecord {
  std::array<float, kContextArea> input{};
  std::array<float, kContextArea> target{};
  bool operator==(const DatasetRecord&) const = default;
};

struct Dataset {
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8 + 4 + 4;

  int qp = 0;
  std::vector<DatasetRecord> records;

  bool operator==(const Dataset&) const = default;
};

DatasetRecord to_record(const TrainingSample& sample);

// Every PU with full context in every plane, in (plane, raster) order.
Dataset build_dataset(std::span<const Plane> corpus, codec::Qp qp);

// Same traversal as build_dataset, keeping double-precision samples.
std::vector<TrainingSample> build_samples(const Plane& plane, codec::Qp qp);

std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(std::span<const std::uint8_t> bytes, const std::string& source);

void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace ipcnn::data
