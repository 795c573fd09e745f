#include "vidseg/videoseg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace vidseg {

VideoSegmentation propagate_segmentation(const std::vector<LabelMap>& superpixels,
                                         const std::vector<FlowField>& forward_flows,
                                         const PropagationConfig& cfg) {
  if (superpixels.empty())
    throw ValidationError("propagate_segmentation: no frames");
  if (forward_flows.size() + 1 != superpixels.size())
    throw ValidationError("propagate_segmentation: need |frames|-1 forward flows");
  if (!(cfg.overlap_threshold >= 0.0 && cfg.overlap_threshold <= 1.0))
    throw ValidationError("propagate_segmentation: overlap threshold in [0,1]");
  const int w = superpixels.front().width, h = superpixels.front().height;
  for (const LabelMap& f : superpixels) {
    require_valid(f, "propagate_segmentation superpixels");
    if (f.width != w || f.height != h)
      throw ValidationError("propagate_segmentation: frame dimension mismatch");
  }
  for (const FlowField& f : forward_flows)
    if (f.width != w || f.height != h)
      throw ValidationError("propagate_segmentation: flow dimension mismatch");

  VideoSegmentation out;
  out.frames.reserve(superpixels.size());

  // Frame 0 keeps its own labels as the first global labels.
  std::vector<int32_t> prev_global;  // region id -> global label, previous frame
  {
    const LabelMap first = relabel_contiguous(superpixels.front());
    prev_global.resize(size_t(num_labels(first)));
    for (size_t r = 0; r < prev_global.size(); ++r) prev_global[r] = int32_t(r);
    out.frames.push_back(first);
  }
  int32_t next_global = int32_t(prev_global.size());

  for (size_t t = 1; t < superpixels.size(); ++t) {
    const LabelMap& prev_spx = superpixels[t - 1];
    const LabelMap& cur_spx = superpixels[t];
    const FlowField& flow = forward_flows[t - 1];
    const int cur_regions = num_labels(cur_spx);
    const std::vector<long> areas = label_areas(cur_spx);

    // Advect every previous pixel and count votes (region, global label).
    std::map<std::pair<int32_t, int32_t>, long> votes;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const long tx = std::lround(double(x) + flow.u_at(x, y));
        const long ty = std::lround(double(y) + flow.v_at(x, y));
        if (tx < 0 || tx >= w || ty < 0 || ty >= h) continue;
        const int32_t region = cur_spx.at(int(tx), int(ty));
        const int32_t global = prev_global[size_t(prev_spx.at(x, y))];
        ++votes[{region, global}];
      }

    // Decreasing votes; ties by smaller global label, then smaller region.
    std::vector<std::tuple<long, int32_t, int32_t>> candidates;
    candidates.reserve(votes.size());
    for (const auto& [key, count] : votes)
      candidates.push_back({-count, key.second, key.first});
    std::sort(candidates.begin(), candidates.end());

    std::vector<int32_t> assignment(size_t(cur_regions), -1);
    std::set<int32_t> taken;
    for (const auto& [neg_count, global, region] : candidates) {
      if (assignment[size_t(region)] >= 0 || taken.count(global)) continue;
      const double overlap = double(-neg_count) / double(areas[size_t(region)]);
      if (cfg.allow_new_labels && overlap < cfg.overlap_threshold) continue;
      assignment[size_t(region)] = global;
      taken.insert(global);
    }
    for (int32_t r = 0; r < cur_regions; ++r)
      if (assignment[size_t(r)] < 0) assignment[size_t(r)] = next_global++;

    LabelMap frame{w, h, std::vector<int32_t>(cur_spx.labels.size())};
    for (size_t i = 0; i < frame.labels.size(); ++i)
      frame.labels[i] = assignment[size_t(cur_spx.labels[i])];
    out.frames.push_back(std::move(frame));
    prev_global = std::move(assignment);
  }

  // Compact the global label space (first occurrence over frames, row-major).
  std::vector<int32_t> remap(size_t(next_global), -1);
  int32_t compact = 0;
  for (LabelMap& f : out.frames)
    for (int32_t& l : f.labels) {
      if (remap[size_t(l)] < 0) remap[size_t(l)] = compact++;
      l = remap[size_t(l)];
    }
  return out;
}

}  // namespace vidseg
