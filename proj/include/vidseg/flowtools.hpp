#pragma once

#include <functional>
#include <vector>

#include "vidseg/raster.hpp"

namespace vidseg {

// Adjacent-frame flow in both directions: forward t -> t+1, backward t+1 -> t.
struct FlowPair {
  FlowField forward;
  FlowField backward;
};

// Sliding temporal window: offsets -window..window, one merge weight each
// (empty weights mean equal). Windows are truncated at sequence ends.
struct SmoothingConfig {
  int window = 1;
  std::vector<double> weights;  // size 2*window+1 when set
};

using CueMerger = std::function<BoundaryMap(const std::vector<WeightedCue>&)>;

// Coarse-to-fine Horn-Schunck style estimator: brightness constancy plus
// quadratic smoothness, solved by warped fixed-point iterations with Jacobi
// sweeps per pyramid level. Deterministic.
FlowField estimate_flow(const FrameImage& a, const FrameImage& b, int levels = 4,
                        int iters = 8);

// Backward warping: out(x) = bilinear sample of src at x + flow(x); samples
// outside the grid give 0. Zero flow reproduces src bit-exactly.
BoundaryMap warp_map(const BoundaryMap& src, const FlowField& flow_to_src);

// Compose t->t+1 with (t+1)->(t+2) into t->t+2 by sampling the second field
// at the first hop's landing point.
FlowField chain_flows(const FlowField& first, const FlowField& second);

// For every frame t, merges the window's flow-warped neighbors of maps[t]
// through `merger` (never pixel-wise averaging). flows[i] connects frames i
// and i+1.
std::vector<BoundaryMap> temporal_smooth(const std::vector<BoundaryMap>& maps,
                                         const std::vector<FlowPair>& flows,
                                         const SmoothingConfig& cfg,
                                         const CueMerger& merger);

}  // namespace vidseg
