#pragma once

// Deterministic synthetic inputs shared across the test suites. Everything is
// seeded through splitmix64 so reruns are bit-identical.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "vidseg/hashutil.hpp"
#include "vidseg/raster.hpp"

namespace testutil {

inline double unit(uint64_t seed, uint64_t index) {
  return vidseg::unit_from_bits(vidseg::splitmix64(seed * 0x9e3779b97f4a7c15ull + index));
}

inline vidseg::BoundaryMap random_map(int w, int h, uint64_t seed) {
  vidseg::BoundaryMap map = vidseg::BoundaryMap::zeros(w, h);
  for (size_t i = 0; i < map.data.size(); ++i)
    map.data[i] = float(unit(seed, i));
  return map;
}

// Smooth random field: a few random cosine bumps, rescaled to [0,1].
inline vidseg::BoundaryMap smooth_random_map(int w, int h, uint64_t seed) {
  vidseg::BoundaryMap map = vidseg::BoundaryMap::zeros(w, h);
  const int n_bumps = 6;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (int b = 0; b < n_bumps; ++b) {
        const double cx = unit(seed, uint64_t(4 * b)) * w;
        const double cy = unit(seed, uint64_t(4 * b + 1)) * h;
        const double freq = 0.15 + 0.35 * unit(seed, uint64_t(4 * b + 2));
        const double phase = 6.28318 * unit(seed, uint64_t(4 * b + 3));
        v += std::cos(freq * std::hypot(x - cx, y - cy) + phase);
      }
      map.at(x, y) = float(v);
    }
  float lo = map.data[0], hi = map.data[0];
  for (float v : map.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (float& v : map.data) v = (hi > lo) ? (v - lo) / (hi - lo) : 0.f;
  return map;
}

inline vidseg::FrameImage image_from(const std::vector<double>& values, int w, int h) {
  vidseg::FrameImage img = vidseg::FrameImage::zeros(w, h, 1);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = float(values[i]);
  return img;
}

// Random partition grown from k seeds by randomized BFS; every region is
// 4-connected by construction.
inline vidseg::LabelMap random_partition(int w, int h, int k, uint64_t seed) {
  vidseg::LabelMap map = vidseg::LabelMap::filled(w, h, -1);
  std::vector<std::pair<uint64_t, size_t>> frontier;
  uint64_t tick = 0;
  for (int r = 0; r < k; ++r) {
    for (int attempt = 0;; ++attempt) {
      const size_t p =
          size_t(unit(seed, uint64_t(r * 977 + attempt)) * double(w) * h);
      if (p < map.labels.size() && map.labels[p] < 0) {
        map.labels[p] = r;
        frontier.push_back({vidseg::splitmix64(seed ^ tick++), p});
        break;
      }
    }
  }
  while (!frontier.empty()) {
    const size_t pick = size_t(frontier.front().first % frontier.size());
    const auto [key, p] = frontier[pick];
    frontier[pick] = frontier.back();
    frontier.pop_back();
    const int x = int(p % w), y = int(p / w);
    const int nx[4] = {x, x - 1, x + 1, x};
    const int ny[4] = {y - 1, y, y, y + 1};
    for (int n = 0; n < 4; ++n) {
      if (nx[n] < 0 || nx[n] >= w || ny[n] < 0 || ny[n] >= h) continue;
      const size_t q = size_t(ny[n]) * w + nx[n];
      if (map.labels[q] < 0) {
        map.labels[q] = map.labels[p];
        frontier.push_back({vidseg::splitmix64(seed ^ tick++), q});
      }
    }
  }
  return vidseg::relabel_contiguous(map);
}

inline bool same_partition(const vidseg::LabelMap& a, const vidseg::LabelMap& b) {
  if (a.width != b.width || a.height != b.height) return false;
  std::vector<int32_t> fwd, bwd;
  for (size_t i = 0; i < a.labels.size(); ++i) {
    const size_t la = size_t(a.labels[i]), lb = size_t(b.labels[i]);
    if (la >= fwd.size()) fwd.resize(la + 1, -1);
    if (lb >= bwd.size()) bwd.resize(lb + 1, -1);
    if (fwd[la] < 0) fwd[la] = int32_t(lb);
    if (bwd[lb] < 0) bwd[lb] = int32_t(la);
    if (fwd[la] != int32_t(lb) || bwd[lb] != int32_t(la)) return false;
  }
  return true;
}

// The synthetic benchmark video: a textured square translating 2 px/frame
// over a textured background, with exact flow and labels.
struct MovingSquareVideo {
  std::vector<vidseg::FrameImage> frames;
  std::vector<vidseg::FlowField> forward, backward;
  std::vector<vidseg::LabelMap> gt;
};

inline MovingSquareVideo moving_square_video(int w, int h, int n_frames,
                                             int square = 20, int x0 = 8, int y0 = 22,
                                             int step = 2, uint64_t seed = 77) {
  MovingSquareVideo video;
  auto tex = [&](uint64_t salt, int x, int y) {
    return 0.04 * (unit(seed ^ salt, uint64_t(y) * 4096 + uint64_t(x)) - 0.5);
  };
  for (int t = 0; t < n_frames; ++t) {
    const int sx = x0 + step * t;
    vidseg::FrameImage frame = vidseg::FrameImage::zeros(w, h, 1);
    vidseg::LabelMap labels = vidseg::LabelMap::filled(w, h, 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const bool in_square = x >= sx && x < sx + square && y >= y0 && y < y0 + square;
        double v = in_square ? 0.75 + tex(1, x - step * t, y) : 0.25 + tex(2, x, y);
        frame.at(x, y) = float(std::clamp(v, 0.0, 1.0));
        if (in_square) labels.at(x, y) = 1;
      }
    video.frames.push_back(std::move(frame));
    video.gt.push_back(std::move(labels));
  }
  for (int t = 0; t + 1 < n_frames; ++t) {
    vidseg::FlowField fwd = vidseg::FlowField::zeros(w, h, vidseg::FlowDirection::Forward);
    vidseg::FlowField bwd = vidseg::FlowField::zeros(w, h, vidseg::FlowDirection::Backward);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (video.gt[size_t(t)].at(x, y) == 1) fwd.u[size_t(y) * w + x] = float(step);
        if (video.gt[size_t(t) + 1].at(x, y) == 1) bwd.u[size_t(y) * w + x] = float(-step);
      }
    video.forward.push_back(std::move(fwd));
    video.backward.push_back(std::move(bwd));
  }
  return video;
}

}  // namespace testutil
