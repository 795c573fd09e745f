#include "vidseg/proposals.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "vidseg/hashutil.hpp"

namespace vidseg {

namespace {

std::vector<std::vector<int>> regions_of(const LabelMap& m) {
  std::vector<std::vector<int>> regions;
  regions.resize(size_t(num_labels(m)));
  for (size_t i = 0; i < m.labels.size(); ++i)
    regions[size_t(m.labels[i])].push_back(int(i));
  return regions;
}

uint64_t mask_fingerprint(const std::vector<int>& mask) {
  uint64_t h = 0xcbf29ce484222325ull ^ uint64_t(mask.size());
  for (int p : mask) h = splitmix64(h ^ uint64_t(uint32_t(p)));
  return h;
}

struct MaskDedup {
  // Fingerprint buckets keep dedup O(1); collisions fall back to full compare.
  std::map<uint64_t, std::vector<int>> buckets;

  bool insert(ProposalSet& out, std::vector<int> mask, ProposalSource src) {
    const uint64_t fp = mask_fingerprint(mask);
    auto& bucket = buckets[fp];
    for (int idx : bucket)
      if (out.masks[size_t(idx)] == mask) return false;
    bucket.push_back(int(out.masks.size()));
    out.masks.push_back(std::move(mask));
    out.sources.push_back(src);
    return true;
  }
};

}  // namespace

ProposalSet generate_proposals(const Ucm& u, int n_thresholds, int n_seeds,
                               int max_merge_depth) {
  if (n_thresholds < 1) throw ValidationError("generate_proposals: n_thresholds >= 1");
  ProposalSet out{u.base.width, u.base.height, {}, {}};
  MaskDedup dedup;

  // (a) every region of the hierarchy at evenly spaced thresholds in (0,1).
  for (int i = 1; i <= n_thresholds; ++i) {
    const double t = double(i) / double(n_thresholds + 1);
    const LabelMap level = extract_superpixels(u, t);
    for (auto& region : regions_of(level))
      dedup.insert(out, std::move(region), ProposalSource::HierarchyLevel);
  }

  // (b) seeded agglomeration: from each of the largest base regions, grow by
  // repeatedly absorbing the neighbor behind the weakest separating arc.
  const int k = u.num_base_regions();
  const std::vector<std::vector<int>> base_regions = regions_of(u.base);
  std::vector<std::pair<long, int>> order;  // (-area, id)
  for (int r = 0; r < k; ++r) order.push_back({-long(base_regions[size_t(r)].size()), r});
  std::sort(order.begin(), order.end());

  const auto arcs = detail::adjacency_arcs(u.base);
  std::vector<std::vector<std::pair<int, double>>> neighbors;
  neighbors.resize(size_t(k));
  for (const auto& [a, b] : arcs) {
    const double s = u.arc(a, b);
    neighbors[size_t(a)].push_back({b, s});
    neighbors[size_t(b)].push_back({a, s});
  }

  for (int seed_idx = 0; seed_idx < std::min(n_seeds, k); ++seed_idx) {
    const int seed = order[size_t(seed_idx)].second;
    std::set<int> grown{seed};
    // frontier: weakest arc first, ties by smaller region id.
    std::map<int, double> frontier;
    auto absorb = [&](int region) {
      for (const auto& [nb, s] : neighbors[size_t(region)]) {
        if (grown.count(nb)) continue;
        auto it = frontier.find(nb);
        if (it == frontier.end() || s < it->second) frontier[nb] = s;
      }
    };
    absorb(seed);
    std::vector<int> pixels = base_regions[size_t(seed)];
    std::sort(pixels.begin(), pixels.end());
    dedup.insert(out, pixels, ProposalSource::SeededMerge);
    for (int depth = 0; depth < max_merge_depth && !frontier.empty(); ++depth) {
      int pick = -1;
      double best = 0.0;
      for (const auto& [r, s] : frontier)
        if (pick < 0 || s < best || (s == best && r < pick)) {
          pick = r;
          best = s;
        }
      frontier.erase(pick);
      grown.insert(pick);
      absorb(pick);
      pixels.insert(pixels.end(), base_regions[size_t(pick)].begin(),
                    base_regions[size_t(pick)].end());
      std::sort(pixels.begin(), pixels.end());
      dedup.insert(out, pixels, ProposalSource::SeededMerge);
    }
  }
  return out;
}

ProposalSet proposals_from_label_maps(const std::vector<LabelMap>& pages) {
  if (pages.empty()) throw ValidationError("proposals_from_label_maps: no pages");
  ProposalSet out{pages.front().width, pages.front().height, {}, {}};
  MaskDedup dedup;
  for (const LabelMap& page : pages) {
    if (page.width != out.width || page.height != out.height)
      throw ValidationError("proposals_from_label_maps: page dimension mismatch");
    for (auto& region : regions_of(page))
      if (!region.empty())
        dedup.insert(out, std::move(region), ProposalSource::ExternalFile);
  }
  return out;
}

BoundaryMap average_contours(const ProposalSet& p) {
  if (p.masks.empty()) throw ValidationError("average_contours: empty proposal set");
  const int w = p.width, h = p.height;
  std::vector<long> counts(size_t(w) * h, 0);
  std::vector<char> inside(size_t(w) * h, 0);
  for (const auto& mask : p.masks) {
    for (int idx : mask) inside[size_t(idx)] = 1;
    for (int idx : mask) {
      const int x = idx % w, y = idx / w;
      const bool border = x == 0 || x == w - 1 || y == 0 || y == h - 1;
      if (border || !inside[size_t(idx - 1)] || !inside[size_t(idx + 1)] ||
          !inside[size_t(idx - w)] || !inside[size_t(idx + w)])
        ++counts[size_t(idx)];
    }
    for (int idx : mask) inside[size_t(idx)] = 0;
  }
  BoundaryMap out = BoundaryMap::zeros(w, h);
  for (size_t i = 0; i < counts.size(); ++i)
    out.data[i] = float(double(counts[i]) / double(p.masks.size()));
  return out;
}

}  // namespace vidseg
