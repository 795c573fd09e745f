#pragma once

// Independent reference implementations used to pin expected values. These
// stay deliberately naive and separate from the library code paths they check.

#include <cstdint>
#include <vector>

#include "vidseg/globalize.hpp"
#include "vidseg/raster.hpp"

namespace oracle {

// Dense generalized eigensolver for (D-W) v = lambda D v, ascending values.
std::vector<double> dense_generalized_eigenvalues(const vidseg::SparseAffinity& aff);

// Second generalized eigenvector (the first non-constant one).
std::vector<double> dense_fiedler_vector(const vidseg::SparseAffinity& aff);

// Maximum-cardinality bipartite matching between pred and gt boundary pixels
// within distance tol (augmenting paths, exact).
long exact_match_count(const std::vector<uint8_t>& pred,
                       const std::vector<uint8_t>& gt, int w, int h, double tol);

// Plain O(n^2 k^2) oriented-gradient response at one scale: full 2D kernel
// convolution, max over orientations, unit-step normalization.
std::vector<double> brute_oriented_gradient(const std::vector<double>& img, int w,
                                            int h, double sigma, int n_orientations);

// Pixelwise weighted average of cue maps (the naive merge the aligned merge
// must beat).
vidseg::BoundaryMap pixelwise_average(const std::vector<vidseg::WeightedCue>& cues);

// Connected components of {value < threshold} under 4-connectivity.
int count_subthreshold_regions(const vidseg::BoundaryMap& map, double threshold);

}  // namespace oracle
