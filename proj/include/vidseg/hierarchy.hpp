#pragma once

#include <utility>
#include <vector>

#include "vidseg/raster.hpp"

namespace vidseg {

// One greedy agglomeration step: regions a and b become merged_id.
struct MergeEvent {
  int region_a = -1;
  int region_b = -1;
  int merged_id = -1;
  double strength = 0.0;
};

// Ultrametric contour map: a finest over-segmentation plus a monotone merge
// sequence. Thresholding yields a nested family of partitions. Node ids:
// base regions are 0..K-1, merges create K, K+1, ...
struct Ucm {
  LabelMap base;
  std::vector<MergeEvent> merge_tree;  // strengths non-decreasing
  // Per unordered adjacent base-region pair (a<b): the strength at which the
  // two sides ended up in one region. Sorted by key.
  std::vector<std::pair<std::pair<int, int>, double>> arc_strength;

  int num_base_regions() const;
  // Strength of the base arc (a,b); arcs absent from the adjacency are an error.
  double arc(int a, int b) const;
};

// Catchment basins of the regional minima of b under 4-connectivity.
// Flooding is deterministic: the pixel queue is ordered by (value, row-major
// index) and ridge pixels join the basin that reaches them first.
LabelMap watershed_oversegment(const BoundaryMap& b);

// Greedy mean-arc agglomeration of the base regions over boundary map b.
// An arc's strength is the arithmetic mean, over its adjacent pixel pairs, of
// the stronger of the two straddling pixel values. Recorded merge strengths
// are clamped monotone so the result is an ultrametric.
Ucm build_ucm(const BoundaryMap& b, const LabelMap& base);

// Partition after applying every merge with strength < threshold, relabeled
// contiguously.
LabelMap extract_superpixels(const Ucm& u, double threshold);

// The hierarchy level whose region count is closest to target_count (ties go
// to the coarser level).
LabelMap extract_superpixels_count(const Ucm& u, int target_count);

// Pixel value = max strength among base arcs through the pixel, 0 elsewhere.
BoundaryMap ucm_to_boundary_map(const Ucm& u);

// Read-only view of a merge forest for ultrametric distance queries.
class Dendrogram {
 public:
  Dendrogram(int num_base_regions, const std::vector<MergeEvent>& tree);

  int num_nodes() const { return int(parent_.size()); }
  double height(int node) const { return height_[size_t(node)]; }
  // Lowest common ancestor; -1 when the nodes never merge.
  int lca(int a, int b) const;
  // Ultrametric distance: height of the lca, 0 for a==b.
  double distance(int a, int b) const;

 private:
  std::vector<int> parent_, depth_;
  std::vector<double> height_;
  std::vector<std::vector<int>> up_;  // binary lifting table
};

namespace detail {
// Shared by build_ucm and the cue-merge agglomerator: RAG arcs of a base
// partition keyed by (a<b), with per-arc adjacent pixel-pair statistics.
struct ArcAccum {
  double sum = 0.0;  // sum over pixel pairs of max(b[p], b[q])
  long count = 0;
};
std::vector<std::pair<std::pair<int, int>, ArcAccum>> boundary_arcs(
    const BoundaryMap& b, const LabelMap& base);
std::vector<std::pair<int, int>> adjacency_arcs(const LabelMap& base);
}  // namespace detail

}  // namespace vidseg
