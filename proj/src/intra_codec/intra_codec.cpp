#include "ipcnn/intra_codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "ipcnn/binary_io.hpp"
#include "ipcnn/error.hpp"

namespace ipcnn::codec {

namespace {

constexpr std::array<int, 33> kIntraPredAngle = {32,  26,  21,  17,  13,  9,   5,   2,   0,   -2,  -5,
                                                 -9,  -13, -17, -21, -26, -32, -26, -21, -17, -13, -9,
                                                 -5,  -2,  0,   2,   5,   9,   13,  17,  21,  26,  32};

// 256*32/angle for the negative angles -2 .. -32 (HEVC invAngle, sign dropped).
int inverse_angle(int angle) {
  switch (-angle) {
    case 2: return 4096;
    case 5: return 1638;
    case 9: return 910;
    case 13: return 630;
    case 17: return 482;
    case 21: return 390;
    case 26: return 315;
    case 32: return 256;
  }
  return 0;
}

int clip_sample(int v) { return std::clamp(v, 0, kMaxSample); }

Block8 predict_planar(const RefSamples& r) {
  Block8 out{};
  for (int y = 0; y < kN; ++y) {
    for (int x = 0; x < kN; ++x) {
      out[y * kN + x] = ((kN - 1 - x) * r.at(-1, y) + (x + 1) * r.at(kN, -1) + (kN - 1 - y) * r.at(x, -1) +
                         (y + 1) * r.at(-1, kN) + kN) >>
                        4;
    }
  }
  return out;
}

Block8 predict_dc(const RefSamples& r) {
  int sum = kN;
  for (int i = 0; i < kN; ++i) sum += r.at(i, -1) + r.at(-1, i);
  const int dc = sum >> 4;
  Block8 out;
  out.fill(dc);
  // Luma edge smoothing, applies below 32x32.
  out[0] = (r.at(-1, 0) + 2 * dc + r.at(0, -1) + 2) >> 2;
  for (int x = 1; x < kN; ++x) out[x] = (r.at(x, -1) + 3 * dc + 2) >> 2;
  for (int y = 1; y < kN; ++y) out[y * kN] = (r.at(-1, y) + 3 * dc + 2) >> 2;
  return out;
}

Block8 predict_angular(const RefSamples& r, int mode) {
  const bool vertical = mode >= 18;
  const int angle = kIntraPredAngle[mode - 2];

  // main(i) runs along the prediction direction starting at the corner, side(i) across it.
  auto main_ref = [&](int i) { return vertical ? r.at(i - 1, -1) : r.at(-1, i - 1); };
  auto side_ref = [&](int i) { return vertical ? r.at(-1, i - 1) : r.at(i - 1, -1); };

  std::array<int, 3 * kN + 1> buffer{};
  int* ref = buffer.data() + kN;  // valid indices [-N, 2N]
  for (int x = 0; x <= kN; ++x) ref[x] = main_ref(x);
  if (angle < 0) {
    const int last = (kN * angle) >> 5;
    if (last < -1) {
      const int inv = inverse_angle(angle);
      for (int x = last; x <= -1; ++x) ref[x] = side_ref(((-x) * inv + 128) >> 8);
    }
  } else {
    for (int x = kN + 1; x <= 2 * kN; ++x) ref[x] = main_ref(x);
  }

  Block8 out{};
  for (int k = 0; k < kN; ++k) {
    const int pos = (k + 1) * angle;
    const int idx = pos >> 5;
    const int fact = pos & 31;
    for (int l = 0; l < kN; ++l) {
      const int v = fact != 0 ? ((32 - fact) * ref[l + idx + 1] + fact * ref[l + idx + 2] + 16) >> 5 : ref[l + idx + 1];
      if (vertical) {
        out[k * kN + l] = v;
      } else {
        out[l * kN + k] = v;
      }
    }
  }

  if (mode == IntraMode::kVertical) {
    for (int y = 0; y < kN; ++y) out[y * kN] = clip_sample(r.at(0, -1) + ((r.at(-1, y) - r.corner) >> 1));
  } else if (mode == IntraMode::kHorizontal) {
    for (int x = 0; x < kN; ++x) out[x] = clip_sample(r.at(-1, 0) + ((r.at(x, -1) - r.corner) >> 1));
  }
  return out;
}

std::array<double, kBlockArea> dct_matrix() {
  std::array<double, kBlockArea> m{};
  for (int k = 0; k < kN; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / kN) : std::sqrt(2.0 / kN);
    for (int n = 0; n < kN; ++n) {
      m[k * kN + n] = scale * std::cos(std::numbers::pi * (2 * n + 1) * k / (2.0 * kN));
    }
  }
  return m;
}

const std::array<double, kBlockArea>& basis() {
  static const auto m = dct_matrix();
  return m;
}

}  // namespace

IntraMode::IntraMode(int index) : index_(index) {
  if (index < 0 || index >= kNumModes) {
    throw Error(ErrorCode::kInvalidMode, "intra mode " + std::to_string(index) + " outside [0,34]");
  }
}

Qp::Qp(int value) : value_(value) {
  if (value < 0 || value > 51) throw Error(ErrorCode::kInvalidArgument, "qp " + std::to_string(value) + " outside [0,51]");
}

double Qp::qstep() const { return std::exp2((value_ - 4) / 6.0); }

int RefSamples::at(int x, int y) const {
  if (x == -1 && y == -1) return corner;
  if (x == -1) return left[y];
  return top[x];
}

std::array<int, kNumRefSamples> RefSamples::to_scan() const {
  std::array<int, kNumRefSamples> s{};
  for (int i = 0; i < 2 * kN; ++i) s[i] = left[2 * kN - 1 - i];
  s[2 * kN] = corner;
  for (int i = 0; i < 2 * kN; ++i) s[2 * kN + 1 + i] = top[i];
  return s;
}

RefSamples RefSamples::from_scan(const std::array<int, kNumRefSamples>& s) {
  RefSamples r;
  for (int i = 0; i < 2 * kN; ++i) r.left[2 * kN - 1 - i] = s[i];
  r.corner = s[2 * kN];
  for (int i = 0; i < 2 * kN; ++i) r.top[i] = s[2 * kN + 1 + i];
  r.available.fill(true);
  return r;
}

CodingPlane::CodingPlane(int width, int height)
    : recon_(width, height), blocks_x_(width / kN), coded_(static_cast<std::size_t>(width / kN) * (height / kN), false) {
  if (width % kN != 0 || height % kN != 0) {
    throw Error(ErrorCode::kInvalidArgument, "coding plane dimensions must be multiples of 8");
  }
}

bool CodingPlane::is_coded(int px, int py) const {
  if (px < 0 || py < 0 || px >= width() || py >= height()) return false;
  return coded_[static_cast<std::size_t>(py / kN) * blocks_x_ + px / kN];
}

void CodingPlane::store_block(BlockOrigin origin, const Block8& samples) {
  for (int y = 0; y < kN; ++y) {
    for (int x = 0; x < kN; ++x) {
      recon_.at(origin.x + x, origin.y + y) = static_cast<std::uint8_t>(clip_sample(samples[y * kN + x]));
    }
  }
  coded_[static_cast<std::size_t>(origin.y / kN) * blocks_x_ + origin.x / kN] = true;
}

RefSamples gather_reference_samples(const CodingPlane& recon, BlockOrigin origin) {
  if (origin.x < 0 || origin.y < 0 || origin.x % kN != 0 || origin.y % kN != 0 || origin.x + kN > recon.width() ||
      origin.y + kN > recon.height()) {
    throw Error(ErrorCode::kOutOfBounds, "block origin (" + std::to_string(origin.x) + "," + std::to_string(origin.y) +
                                             ") outside " + std::to_string(recon.width()) + "x" +
                                             std::to_string(recon.height()) + " plane");
  }

  // Sample positions in scan order.
  std::array<int, kNumRefSamples> values{};
  std::array<bool, kNumRefSamples> available{};
  for (int i = 0; i < kNumRefSamples; ++i) {
    int px, py;
    if (i < 2 * kN) {
      px = origin.x - 1;
      py = origin.y + (2 * kN - 1 - i);
    } else if (i == 2 * kN) {
      px = origin.x - 1;
      py = origin.y - 1;
    } else {
      px = origin.x + (i - 2 * kN - 1);
      py = origin.y - 1;
    }
    available[i] = recon.is_coded(px, py);
    values[i] = available[i] ? recon.recon().at(px, py) : 0;
  }

  const auto first = std::find(available.begin(), available.end(), true);
  if (first == available.end()) {
    values.fill(1 << (kBitDepth - 1));
  } else {
    if (!available[0]) values[0] = values[first - available.begin()];
    for (int i = 1; i < kNumRefSamples; ++i) {
      if (!available[i]) values[i] = values[i - 1];
    }
  }

  RefSamples refs = RefSamples::from_scan(values);
  refs.available = available;
  return refs;
}

bool uses_filtered_refs(IntraMode mode) {
  if (mode.index() == IntraMode::kPlanar) return true;
  if (mode.index() == IntraMode::kDc) return false;
  const int dist = std::min(std::abs(mode.index() - IntraMode::kVertical), std::abs(mode.index() - IntraMode::kHorizontal));
  return dist > 7;
}

RefSamples filter_reference_samples(const RefSamples& refs, IntraMode mode) {
  if (!uses_filtered_refs(mode)) return refs;
  const auto s = refs.to_scan();
  auto f = s;
  for (int i = 1; i + 1 < kNumRefSamples; ++i) f[i] = (s[i - 1] + 2 * s[i] + s[i + 1] + 2) >> 2;
  RefSamples out = RefSamples::from_scan(f);
  out.available = refs.available;
  return out;
}

int intra_pred_angle(IntraMode mode) {
  if (!mode.is_angular()) throw Error(ErrorCode::kInvalidMode, "mode " + std::to_string(mode.index()) + " is not angular");
  return kIntraPredAngle[mode.index() - 2];
}

Block8 predict_intra(const RefSamples& refs, IntraMode mode) {
  switch (mode.index()) {
    case IntraMode::kPlanar: return predict_planar(refs);
    case IntraMode::kDc: return predict_dc(refs);
    default: return predict_angular(refs, mode.index());
  }
}

std::int64_t sse(const Block8& a, const Block8& b) {
  std::int64_t total = 0;
  for (int i = 0; i < kBlockArea; ++i) {
    const std::int64_t d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

ModeDecision select_best_mode(const Block8& original, const RefSamples& refs) {
  ModeDecision best;
  best.sse = -1;
  for (int m = 0; m < kNumModes; ++m) {
    const IntraMode mode(m);
    Block8 pred = predict_intra(filter_reference_samples(refs, mode), mode);
    const auto cost = sse(original, pred);
    if (best.sse < 0 || cost < best.sse) {
      best.mode = mode;
      best.prediction = pred;
      best.sse = cost;
    }
  }
  return best;
}

std::array<double, kBlockArea> forward_dct(const std::array<double, kBlockArea>& block) {
  const auto& c = basis();
  std::array<double, kBlockArea> tmp{}, out{};
  // tmp = C * X
  for (int k = 0; k < kN; ++k) {
    for (int j = 0; j < kN; ++j) {
      double acc = 0.0;
      for (int n = 0; n < kN; ++n) acc += c[k * kN + n] * block[n * kN + j];
      tmp[k * kN + j] = acc;
    }
  }
  // out = tmp * C^T
  for (int k = 0; k < kN; ++k) {
    for (int l = 0; l < kN; ++l) {
      double acc = 0.0;
      for (int n = 0; n < kN; ++n) acc += tmp[k * kN + n] * c[l * kN + n];
      out[k * kN + l] = acc;
    }
  }
  return out;
}

std::array<double, kBlockArea> inverse_dct(const std::array<double, kBlockArea>& coeffs) {
  const auto& c = basis();
  std::array<double, kBlockArea> tmp{}, out{};
  // tmp = C^T * Y
  for (int n = 0; n < kN; ++n) {
    for (int j = 0; j < kN; ++j) {
      double acc = 0.0;
      for (int k = 0; k < kN; ++k) acc += c[k * kN + n] * coeffs[k * kN + j];
      tmp[n * kN + j] = acc;
    }
  }
  // out = tmp * C
  for (int n = 0; n < kN; ++n) {
    for (int m = 0; m < kN; ++m) {
      double acc = 0.0;
      for (int l = 0; l < kN; ++l) acc += tmp[n * kN + l] * c[l * kN + m];
      out[n * kN + m] = acc;
    }
  }
  return out;
}

long round_half_away(double value) { return std::lround(value); }

Coefficients transform_quantize(const Block8& residual, Qp qp) {
  std::array<double, kBlockArea> r{};
  std::copy(residual.begin(), residual.end(), r.begin());
  const auto c = forward_dct(r);
  const double step = qp.qstep();
  Coefficients q{};
  for (int i = 0; i < kBlockArea; ++i) q[i] = static_cast<int>(round_half_away(c[i] / step));
  return q;
}

Block8 dequantize_inverse_transform(const Coefficients& coeffs, Qp qp) {
  const double step = qp.qstep();
  std::array<double, kBlockArea> c{};
  for (int i = 0; i < kBlockArea; ++i) c[i] = coeffs[i] * step;
  const auto r = inverse_dct(c);
  Block8 out{};
  for (int i = 0; i < kBlockArea; ++i) out[i] = static_cast<int>(round_half_away(r[i]));
  return out;
}

Block8 extract_block(const Plane& plane, BlockOrigin origin) {
  Block8 out{};
  for (int y = 0; y < kN; ++y) {
    for (int x = 0; x < kN; ++x) out[y * kN + x] = plane.at(origin.x + x, origin.y + y);
  }
  return out;
}

Block8 code_residual(const Block8& original, const Block8& prediction, Qp qp) {
  Block8 residual{};
  for (int i = 0; i < kBlockArea; ++i) residual[i] = original[i] - prediction[i];
  const Block8 decoded = dequantize_inverse_transform(transform_quantize(residual, qp), qp);
  Block8 recon{};
  for (int i = 0; i < kBlockArea; ++i) recon[i] = clip_sample(prediction[i] + decoded[i]);
  return recon;
}

CodedPlane reconstruct_plane(const Plane& original, Qp qp) {
  CodingPlane coding(original.width(), original.height());
  std::vector<PuRecord> records;
  for (const auto origin : io::tile_origins(original)) {
    const Block8 block = extract_block(original, origin);
    const RefSamples refs = gather_reference_samples(coding, origin);
    const ModeDecision decision = select_best_mode(block, refs);
    PuRecord record{origin, decision.mode, decision.prediction, {}, decision.sse};
    record.reconstruction = code_residual(block, decision.prediction, qp);
    coding.store_block(origin, record.reconstruction);
    records.push_back(record);
  }
  return {std::move(coding).release(), std::move(records)};
}

std::string pu_records_csv(const std::vector<PuRecord>& records) {
  std::string out = "origin_x,origin_y,mode,sse\n";
  for (const auto& r : records) {
    out += std::to_string(r.origin.x) + "," + std::to_string(r.origin.y) + "," + std::to_string(r.mode.index()) + "," +
           std::to_string(r.sse) + "\n";
  }
  return out;
}

void write_pu_records_csv(const std::filesystem::path& path, const std::vector<PuRecord>& records) {
  write_file_atomic(path, pu_records_csv(records));
}

}  // namespace ipcnn::codec
