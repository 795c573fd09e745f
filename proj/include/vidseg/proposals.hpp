#pragma once

#include <vector>

#include "vidseg/hierarchy.hpp"
#include "vidseg/raster.hpp"

namespace vidseg {

enum class ProposalSource { HierarchyLevel, SeededMerge, ExternalFile };

// Candidate segments over one frame. Masks are stored as sorted pixel index
// lists; each mask is non-empty and 4-connected.
struct ProposalSet {
  int width = 0, height = 0;
  std::vector<std::vector<int>> masks;
  std::vector<ProposalSource> sources;  // aligned with masks
};

// Hierarchy-driven proposal generator: every region of the partitions at
// n_thresholds evenly spaced levels in (0,1), plus breadth-first seeded
// agglomerations from the largest base regions (one proposal per merge step,
// neighbors taken weakest separating arc first). Duplicates removed.
ProposalSet generate_proposals(const Ucm& u, int n_thresholds = 10,
                               int n_seeds = 8, int max_merge_depth = 10);

// Wraps externally supplied label maps: every region of every page becomes
// one proposal. Pages may overlap each other.
ProposalSet proposals_from_label_maps(const std::vector<LabelMap>& pages);

// value(pixel) = fraction of proposals whose contour contains the pixel.
// A contour pixel is a mask pixel with a 4-neighbor outside the mask; the
// image border counts as outside.
BoundaryMap average_contours(const ProposalSet& p);

}  // namespace vidseg
