#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vidseg {

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Grayscale or RGB frame, row-major, intensities in [0,1].
struct FrameImage {
  int width = 0, height = 0, channels = 1;
  std::vector<float> data;

  static FrameImage zeros(int w, int h, int c = 1) {
    return FrameImage{w, h, c, std::vector<float>(size_t(w) * h * c, 0.f)};
  }
  float at(int x, int y, int c = 0) const {
    return data[(size_t(y) * width + x) * channels + c];
  }
  float& at(int x, int y, int c = 0) {
    return data[(size_t(y) * width + x) * channels + c];
  }
};

// Per-pixel boundary probability in [0,1]. The common currency of all cues.
struct BoundaryMap {
  int width = 0, height = 0;
  std::vector<float> data;

  static BoundaryMap zeros(int w, int h) {
    return BoundaryMap{w, h, std::vector<float>(size_t(w) * h, 0.f)};
  }
  float at(int x, int y) const { return data[size_t(y) * width + x]; }
  float& at(int x, int y) { return data[size_t(y) * width + x]; }
  bool same_size(const BoundaryMap& o) const {
    return width == o.width && height == o.height;
  }
};

enum class FlowDirection { Forward, Backward };

// Dense displacement field between two adjacent frames, pixels/frame.
struct FlowField {
  int width = 0, height = 0;
  FlowDirection direction = FlowDirection::Forward;
  std::vector<float> u, v;

  static FlowField zeros(int w, int h,
                         FlowDirection dir = FlowDirection::Forward) {
    return FlowField{w, h, dir, std::vector<float>(size_t(w) * h, 0.f),
                     std::vector<float>(size_t(w) * h, 0.f)};
  }
  float u_at(int x, int y) const { return u[size_t(y) * width + x]; }
  float v_at(int x, int y) const { return v[size_t(y) * width + x]; }
};

// Partition of the pixel grid into labeled regions. A valid map has
// contiguous labels 0..K-1 and every region 4-connected.
struct LabelMap {
  int width = 0, height = 0;
  std::vector<int32_t> labels;

  static LabelMap filled(int w, int h, int32_t v = 0) {
    return LabelMap{w, h, std::vector<int32_t>(size_t(w) * h, v)};
  }
  int32_t at(int x, int y) const { return labels[size_t(y) * width + x]; }
  int32_t& at(int x, int y) { return labels[size_t(y) * width + x]; }
};

// Per-frame label maps sharing one global label space. A global label may be
// absent from individual frames but must occur somewhere in the video.
struct VideoSegmentation {
  std::vector<LabelMap> frames;
};

// A boundary cue with its merge weight.
using WeightedCue = std::pair<BoundaryMap, double>;

// Each validate returns the first violated invariant, or nullopt when ok.
std::optional<std::string> validate(const FrameImage& img);
std::optional<std::string> validate(const BoundaryMap& map);
std::optional<std::string> validate(const FlowField& flow);
std::optional<std::string> validate(const LabelMap& map);
std::optional<std::string> validate(const VideoSegmentation& seg);

template <typename T>
void require_valid(const T& value, const std::string& what) {
  if (auto err = validate(value)) throw ValidationError(what + ": " + *err);
}

// Renumbers labels to 0..K-1 in row-major first-occurrence order. Keeps the
// partition itself untouched; idempotent.
LabelMap relabel_contiguous(const LabelMap& m);

int num_labels(const LabelMap& m);  // max label + 1, 0 for empty
std::vector<long> label_areas(const LabelMap& m);

// 1 where any 4-neighbor carries a different label (boundaries live on
// pixels, so both sides of a region border are marked).
std::vector<uint8_t> label_boundary_mask(const LabelMap& m);

// Luma conversion (0.299/0.587/0.114); single-channel images pass through.
std::vector<double> grayscale(const FrameImage& img);

}  // namespace vidseg
