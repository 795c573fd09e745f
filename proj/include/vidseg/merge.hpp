#pragma once

#include <vector>

#include "vidseg/hierarchy.hpp"
#include "vidseg/raster.hpp"

namespace vidseg {

// Combines boundary-map cues without double edges. Each cue is first turned
// into its own hierarchy (watershed + greedy agglomeration); the hierarchies
// are aligned on the common finest partition and re-agglomerated with arc
// strengths given by the weighted mean, over cues, of each cue's ultrametric
// separating strength.
Ucm merge_cues_ucm(const std::vector<WeightedCue>& cues);

// ucm_to_boundary_map of the aligned hierarchy.
BoundaryMap merge_cues(const std::vector<WeightedCue>& cues);

}  // namespace vidseg
