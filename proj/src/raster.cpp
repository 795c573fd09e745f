#include "vidseg/raster.hpp"

#include <cmath>
#include <queue>

namespace vidseg {

namespace {

bool finite01(float v) { return std::isfinite(v) && v >= 0.f && v <= 1.f; }

std::optional<std::string> check_dims(int w, int h) {
  if (w <= 0 || h <= 0)
    return "dimensions must be positive, got " + std::to_string(w) + "x" +
           std::to_string(h);
  return std::nullopt;
}

}  // namespace

std::optional<std::string> validate(const FrameImage& img) {
  if (auto e = check_dims(img.width, img.height)) return e;
  if (img.channels != 1 && img.channels != 3)
    return "channels must be 1 or 3, got " + std::to_string(img.channels);
  if (img.data.size() != size_t(img.width) * img.height * img.channels)
    return "data length does not match width*height*channels";
  for (float v : img.data)
    if (!finite01(v)) return "value out of [0,1]";
  return std::nullopt;
}

std::optional<std::string> validate(const BoundaryMap& map) {
  if (auto e = check_dims(map.width, map.height)) return e;
  if (map.data.size() != size_t(map.width) * map.height)
    return "data length does not match width*height";
  for (float v : map.data)
    if (!finite01(v)) return "value out of [0,1]";
  return std::nullopt;
}

std::optional<std::string> validate(const FlowField& flow) {
  if (auto e = check_dims(flow.width, flow.height)) return e;
  const size_t n = size_t(flow.width) * flow.height;
  if (flow.u.size() != n || flow.v.size() != n)
    return "u/v length does not match width*height";
  const float bound = float(std::max(flow.width, flow.height));
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(flow.u[i]) || !std::isfinite(flow.v[i]))
      return "non-finite flow value";
    if (std::fabs(flow.u[i]) > bound || std::fabs(flow.v[i]) > bound)
      return "flow magnitude exceeds max(width,height)";
  }
  return std::nullopt;
}

std::optional<std::string> validate(const LabelMap& map) {
  if (auto e = check_dims(map.width, map.height)) return e;
  const size_t n = size_t(map.width) * map.height;
  if (map.labels.size() != n) return "labels length does not match width*height";
  int32_t max_label = -1;
  for (int32_t l : map.labels) {
    if (l < 0) return "negative label";
    max_label = std::max(max_label, l);
  }
  std::vector<char> present(size_t(max_label) + 1, 0);
  for (int32_t l : map.labels) present[size_t(l)] = 1;
  for (int32_t l = 0; l <= max_label; ++l)
    if (!present[size_t(l)])
      return "non-contiguous labels (missing " + std::to_string(l) + ")";

  // Each label's pixel set must form one 4-connected component.
  std::vector<int32_t> seen_component(n, -1);
  std::vector<char> label_seen(size_t(max_label) + 1, 0);
  std::vector<size_t> stack;
  for (size_t start = 0; start < n; ++start) {
    if (seen_component[start] >= 0) continue;
    const int32_t l = map.labels[start];
    if (label_seen[size_t(l)])
      return "label " + std::to_string(l) + " is not 4-connected";
    label_seen[size_t(l)] = 1;
    stack.assign(1, start);
    seen_component[start] = l;
    while (!stack.empty()) {
      const size_t p = stack.back();
      stack.pop_back();
      const int x = int(p % map.width), y = int(p / map.width);
      const int nx[4] = {x, x - 1, x + 1, x};
      const int ny[4] = {y - 1, y, y, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= map.width || ny[k] < 0 || ny[k] >= map.height)
          continue;
        const size_t q = size_t(ny[k]) * map.width + nx[k];
        if (map.labels[q] == l && seen_component[q] < 0) {
          seen_component[q] = l;
          stack.push_back(q);
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> validate(const VideoSegmentation& seg) {
  if (seg.frames.empty()) return "no frames";
  const int w = seg.frames.front().width, h = seg.frames.front().height;
  if (auto e = check_dims(w, h)) return e;
  int32_t max_label = -1;
  for (const LabelMap& f : seg.frames) {
    if (f.width != w || f.height != h) return "frame dimension mismatch";
    if (f.labels.size() != size_t(w) * h)
      return "labels length does not match width*height";
    for (int32_t l : f.labels) {
      if (l < 0) return "negative label";
      max_label = std::max(max_label, l);
    }
  }
  std::vector<char> present(size_t(max_label) + 1, 0);
  for (const LabelMap& f : seg.frames)
    for (int32_t l : f.labels) present[size_t(l)] = 1;
  for (int32_t l = 0; l <= max_label; ++l)
    if (!present[size_t(l)])
      return "non-contiguous global labels (missing " + std::to_string(l) + ")";
  return std::nullopt;
}

LabelMap relabel_contiguous(const LabelMap& m) {
  LabelMap out{m.width, m.height, std::vector<int32_t>(m.labels.size(), 0)};
  int32_t max_label = -1;
  for (int32_t l : m.labels) max_label = std::max(max_label, l);
  std::vector<int32_t> remap(size_t(max_label) + 1, -1);
  int32_t next = 0;
  for (size_t i = 0; i < m.labels.size(); ++i) {
    int32_t& r = remap[size_t(m.labels[i])];
    if (r < 0) r = next++;
    out.labels[i] = r;
  }
  return out;
}

int num_labels(const LabelMap& m) {
  int32_t max_label = -1;
  for (int32_t l : m.labels) max_label = std::max(max_label, l);
  return int(max_label) + 1;
}

std::vector<long> label_areas(const LabelMap& m) {
  std::vector<long> areas(size_t(num_labels(m)), 0);
  for (int32_t l : m.labels) ++areas[size_t(l)];
  return areas;
}

std::vector<uint8_t> label_boundary_mask(const LabelMap& m) {
  std::vector<uint8_t> mask(m.labels.size(), 0);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const int32_t l = m.at(x, y);
      if ((x + 1 < m.width && m.at(x + 1, y) != l) ||
          (x > 0 && m.at(x - 1, y) != l) ||
          (y + 1 < m.height && m.at(x, y + 1) != l) ||
          (y > 0 && m.at(x, y - 1) != l))
        mask[size_t(y) * m.width + x] = 1;
    }
  }
  return mask;
}

std::vector<double> grayscale(const FrameImage& img) {
  const size_t n = size_t(img.width) * img.height;
  std::vector<double> gray(n);
  if (img.channels == 1) {
    for (size_t i = 0; i < n; ++i) gray[i] = img.data[i];
  } else {
    for (size_t i = 0; i < n; ++i) {
      gray[i] = 0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] +
                0.114 * img.data[3 * i + 2];
    }
  }
  return gray;
}

}  // namespace vidseg
