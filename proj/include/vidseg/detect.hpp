#pragma once

#include <vector>

#include "vidseg/raster.hpp"

namespace vidseg {

// Multi-scale oriented Gaussian-derivative boundary detector. Responses are
// normalized so a unit step edge scores 1.0 at every scale.
struct DetectorConfig {
  std::vector<double> scales{1.0, 2.0, 4.0};
  int n_orientations = 8;
  bool nonmax_suppress = true;
};

// Per-pixel max over orientations and scales of the normalized oriented
// gradient magnitude, optionally thinned perpendicular to the local
// orientation. Output in [0,1].
BoundaryMap detect_boundaries(const FrameImage& img, const DetectorConfig& cfg);

// detect_boundaries over the flow magnitude image, normalized by its 99th
// percentile and clamped to [0,1]. Zero flow gives a zero map.
BoundaryMap detect_flow_boundaries(const FlowField& flow, const DetectorConfig& cfg);

}  // namespace vidseg
