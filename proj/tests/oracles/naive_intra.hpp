#pragma once

// Scalar 8x8 intra prediction written from the HEVC equations with p[x][y]
// indexing, kept apart from the codec so the mode search can be checked
// against something that shares no code with it.

#include <array>
#include <cstdint>
#include <map>
#include <utility>

namespace ipcnn::test::naive {

constexpr int kN = 8;

using Refs = std::map<std::pair<int, int>, int>;  // (x, y) -> sample

inline int angle_of(int mode) {
  static const int angles[17] = {32, 26, 21, 17, 13, 9, 5, 2, 0, -2, -5, -9, -13, -17, -21, -26, -32};
  return mode <= 18 ? angles[mode - 2] : angles[34 - mode];
}

inline int inv_angle_of(int a) {
  switch (a) {
    case -32: return -256;
    case -26: return -315;
    case -21: return -390;
    case -17: return -482;
    case -13: return -630;
    case -9: return -910;
    case -5: return -1638;
    case -2: return -4096;
    default: return 0;
  }
}

inline int clip8(int v) { return v < 0 ? 0 : (v > 255 ? 255 : v); }

inline Refs make_refs(const std::array<int, 16>& left, int corner, const std::array<int, 16>& top) {
  Refs p;
  p[{-1, -1}] = corner;
  for (int i = 0; i < 2 * kN; ++i) {
    p[{-1, i}] = left[i];
    p[{i, -1}] = top[i];
  }
  return p;
}

inline Refs filtered(const Refs& p, int mode) {
  if (!(mode == 0 || mode == 2 || mode == 18 || mode == 34)) return p;
  Refs f = p;
  f[{-1, -1}] = (p.at({-1, 0}) + 2 * p.at({-1, -1}) + p.at({0, -1}) + 2) >> 2;
  for (int y = 0; y < 2 * kN - 1; ++y) f[{-1, y}] = (p.at({-1, y + 1}) + 2 * p.at({-1, y}) + p.at({-1, y - 1}) + 2) >> 2;
  for (int x = 0; x < 2 * kN - 1; ++x) f[{x, -1}] = (p.at({x + 1, -1}) + 2 * p.at({x, -1}) + p.at({x - 1, -1}) + 2) >> 2;
  return f;
}

// Row-major prediction from already filtered refs.
inline std::array<int, 64> predict(const Refs& p, int mode) {
  int pred[kN][kN] = {};  // pred[x][y]
  if (mode == 0) {
    for (int x = 0; x < kN; ++x)
      for (int y = 0; y < kN; ++y)
        pred[x][y] = ((kN - 1 - x) * p.at({-1, y}) + (x + 1) * p.at({kN, -1}) + (kN - 1 - y) * p.at({x, -1}) +
                      (y + 1) * p.at({-1, kN}) + kN) >> 4;
  } else if (mode == 1) {
    int sum = 0;
    for (int i = 0; i < kN; ++i) sum += p.at({i, -1}) + p.at({-1, i});
    const int dc = (sum + kN) >> 4;
    for (int x = 0; x < kN; ++x)
      for (int y = 0; y < kN; ++y) pred[x][y] = dc;
    pred[0][0] = (p.at({-1, 0}) + 2 * dc + p.at({0, -1}) + 2) >> 2;
    for (int x = 1; x < kN; ++x) pred[x][0] = (p.at({x, -1}) + 3 * dc + 2) >> 2;
    for (int y = 1; y < kN; ++y) pred[0][y] = (p.at({-1, y}) + 3 * dc + 2) >> 2;
  } else {
    const int a = angle_of(mode);
    const bool vertical = mode >= 18;
    // main(k) walks the primary reference row, side(k) the other one
    auto main_ref = [&](int k) { return vertical ? p.at({-1 + k, -1}) : p.at({-1, -1 + k}); };
    auto side_ref = [&](int k) { return vertical ? p.at({-1, -1 + k}) : p.at({-1 + k, -1}); };
    std::map<int, int> ref;
    for (int k = 0; k <= kN; ++k) ref[k] = main_ref(k);
    if (a < 0) {
      if (((kN * a) >> 5) < -1) {
        for (int k = (kN * a) >> 5; k < 0; ++k) ref[k] = side_ref((k * inv_angle_of(a) + 128) >> 8);
      }
    } else {
      for (int k = kN + 1; k <= 2 * kN; ++k) ref[k] = main_ref(k);
    }
    for (int x = 0; x < kN; ++x) {
      for (int y = 0; y < kN; ++y) {
        const int along = vertical ? y : x;
        const int across = vertical ? x : y;
        const int idx = ((along + 1) * a) >> 5;
        const int fact = ((along + 1) * a) & 31;
        pred[x][y] = fact ? ((32 - fact) * ref[across + idx + 1] + fact * ref[across + idx + 2] + 16) >> 5
                          : ref[across + idx + 1];
      }
    }
    if (mode == 26) {
      for (int y = 0; y < kN; ++y) pred[0][y] = clip8(p.at({0, -1}) + ((p.at({-1, y}) - p.at({-1, -1})) >> 1));
    }
    if (mode == 10) {
      for (int x = 0; x < kN; ++x) pred[x][0] = clip8(p.at({-1, 0}) + ((p.at({x, -1}) - p.at({-1, -1})) >> 1));
    }
  }
  std::array<int, 64> out{};
  for (int y = 0; y < kN; ++y)
    for (int x = 0; x < kN; ++x) out[y * kN + x] = pred[x][y];
  return out;
}

struct BruteForce {
  int mode = 0;
  std::int64_t sse = 0;
};

// Full sweep of all 35 modes; strict < keeps the lowest index on ties.
inline BruteForce best_mode(const std::array<int, 64>& original, const std::array<int, 16>& left, int corner,
                            const std::array<int, 16>& top) {
  const Refs p = make_refs(left, corner, top);
  BruteForce best{-1, 0};
  for (int mode = 0; mode < 35; ++mode) {
    const auto pred = predict(filtered(p, mode), mode);
    std::int64_t s = 0;
    for (int i = 0; i < 64; ++i) s += static_cast<std::int64_t>(original[i] - pred[i]) * (original[i] - pred[i]);
    if (best.mode < 0 || s < best.sse) best = {mode, s};
  }
  return best;
}

}  // namespace ipcnn::test::naive
