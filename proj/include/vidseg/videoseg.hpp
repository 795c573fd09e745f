#pragma once

#include <vector>

#include "vidseg/raster.hpp"

namespace vidseg {

struct PropagationConfig {
  double overlap_threshold = 0.3;  // accepted votes / superpixel area
  bool allow_new_labels = true;
};

// Greedy frame-to-frame matching of superpixels via optical flow. Frame 0
// keeps its labels; each later superpixel adopts the advected global label
// with the strongest vote, one superpixel per label per frame, greedily in
// decreasing vote order (vote ties go to the smaller global label). Regions
// without an acceptable match receive fresh labels. Input partitions are
// preserved exactly; only labels change.
VideoSegmentation propagate_segmentation(const std::vector<LabelMap>& superpixels,
                                         const std::vector<FlowField>& forward_flows,
                                         const PropagationConfig& cfg);

}  // namespace vidseg
