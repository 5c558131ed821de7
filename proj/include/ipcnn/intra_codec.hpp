#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ipcnn/media_io.hpp"

namespace ipcnn::codec {

using io::BlockOrigin;
using io::Plane;

inline constexpr int kN = io::kBlockSize;
inline constexpr int kBlockArea = kN * kN;
inline constexpr int kNumModes = 35;
inline constexpr int kNumRefSamples = 4 * kN + 1;
inline constexpr int kBitDepth = 8;
inline constexpr int kMaxSample = (1 << kBitDepth) - 1;

// 8x8 block, row-major. Holds either samples in [0,255] or signed residuals.
using Block8 = std::array<int, kBlockArea>;
using Coefficients = std::array<int, kBlockArea>;

class IntraMode {
 public:
  static constexpr int kPlanar = 0;
  static constexpr int kDc = 1;
  static constexpr int kHorizontal = 10;
  static constexpr int kVertical = 26;

  IntraMode() = default;
  explicit IntraMode(int index);

  int index() const { return index_; }
  bool is_angular() const { return index_ >= 2; }
  bool operator==(const IntraMode&) const = default;

 private:
  int index_ = kPlanar;
};

class Qp {
 public:
  explicit Qp(int value);

  int value() const { return value_; }
  // 2^((QP-4)/6).
  double qstep() const;
  bool operator==(const Qp&) const = default;

 private:
  int value_;
};

// Boundary samples of one 8x8 PU. left[i] = p[-1][i] (top to bottom),
// top[i] = p[i][-1] (left to right), corner = p[-1][-1].
struct RefSamples {
  std::array<int, 2 * kN> left{};
  int corner = 0;
  std::array<int, 2 * kN> top{};
  // Availability before substitution, in scan order (see to_scan).
  std::array<bool, kNumRefSamples> available{};

  // p[x][y] with (x == -1, y in [-1, 2N)) or (y == -1, x in [0, 2N)).
  int at(int x, int y) const;

  // Scan order: p[-1][2N-1] .. p[-1][0], p[-1][-1], p[0][-1] .. p[2N-1][-1].
  std::array<int, kNumRefSamples> to_scan() const;
  static RefSamples from_scan(const std::array<int, kNumRefSamples>& scan);

  bool operator==(const RefSamples&) const = default;
};

// Reconstruction that is being built in coding order. A sample counts as
// available for prediction once the 8x8 block containing it is coded.
class CodingPlane {
 public:
  explicit CodingPlane(int width, int height);

  int width() const { return recon_.width(); }
  int height() const { return recon_.height(); }

  bool is_coded(int px, int py) const;
  void store_block(BlockOrigin origin, const Block8& samples);

  const Plane& recon() const { return recon_; }
  Plane release() && { return std::move(recon_); }

 private:
  Plane recon_;
  int blocks_x_;
  std::vector<bool> coded_;
};

// HEVC reference construction with substitution of unavailable samples.
RefSamples gather_reference_samples(const CodingPlane& recon, BlockOrigin origin);

// [1 2 1]/4 smoothing for Planar and modes 2, 18, 34 at 8x8 (intraHorVerDistThres = 7).
bool uses_filtered_refs(IntraMode mode);
RefSamples filter_reference_samples(const RefSamples& refs, IntraMode mode);

// Prediction from already-filtered reference samples.
Block8 predict_intra(const RefSamples& refs, IntraMode mode);

// HEVC intraPredAngle for angular modes 2..34.
int intra_pred_angle(IntraMode mode);

struct ModeDecision {
  IntraMode mode;
  Block8 prediction{};
  std::int64_t sse = 0;
};

// Exhaustive SSE search over the 35 modes on unfiltered refs; lowest index wins ties.
ModeDecision select_best_mode(const Block8& original, const RefSamples& refs);

std::int64_t sse(const Block8& a, const Block8& b);

// Orthonormal 8x8 type-II DCT, row-major in and out.
std::array<double, kBlockArea> forward_dct(const std::array<double, kBlockArea>& block);
std::array<double, kBlockArea> inverse_dct(const std::array<double, kBlockArea>& coeffs);

// Half-away-from-zero, the single rounding rule used throughout.
long round_half_away(double value);

Coefficients transform_quantize(const Block8& residual, Qp qp);
Block8 dequantize_inverse_transform(const Coefficients& coeffs, Qp qp);

Block8 extract_block(const Plane& plane, BlockOrigin origin);

// Residual coding of `original` against `prediction`; returns the clipped reconstruction.
Block8 code_residual(const Block8& original, const Block8& prediction, Qp qp);

struct PuRecord {
  BlockOrigin origin;
  IntraMode mode;
  Block8 prediction{};
  Block8 reconstruction{};
  std::int64_t sse = 0;
};

struct CodedPlane {
  Plane recon;
  std::vector<PuRecord> records;
};

// Fixed 8x8 PU=CU=TU, raster order, best-SSE mode, no entropy coding.
CodedPlane reconstruct_plane(const Plane& original, Qp qp);

// origin_x,origin_y,mode,sse
std::string pu_records_csv(const std::vector<PuRecord>& records);
void write_pu_records_csv(const std::filesystem::path& path, const std::vector<PuRecord>& records);

}  // namespace ipcnn::codec
