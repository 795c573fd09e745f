#pragma once

#include <vector>

#include "vidseg/raster.hpp"

namespace vidseg {

struct SpectralConfig {
  int radius = 5;        // connectivity radius on the (downsampled) grid
  double rho = 0.1;      // intervening-contour scaling constant
  int n_eigvecs = 16;    // eigenpairs requested from the Laplacian
  int downsample = 2;    // grid decimation factor
  int n_orientations = 8;
};

struct AffinityEntry {
  int i = 0, j = 0;  // i < j
  double w = 0.0;    // in (0,1]
};

// Sparse symmetric affinity over the pixels of a downsampled grid. The unit
// diagonal is implicit; degrees include it.
struct SparseAffinity {
  int n = 0;
  int grid_w = 0, grid_h = 0;
  std::vector<AffinityEntry> entries;
  std::vector<double> degree;
};

// Intervening-contour affinities: for pixel pairs within the radius,
// w = exp(-max boundary value on the Bresenham segment / rho).
SparseAffinity build_affinity(const BoundaryMap& b, const SpectralConfig& cfg);

struct GeneralizedEigenResult {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // D-normalized, one per value
};

struct EigenSolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// k smallest eigenpairs of (D-W) v = lambda D v via shift-invert Lanczos with
// a deterministic start vector. Every returned pair satisfies
// ||(D-W)v - lambda D v|| <= tol * ||D v||.
GeneralizedEigenResult smallest_laplacian_eigenpairs(const SparseAffinity& aff,
                                                     int k, double tol = 1e-9);

// Spectral boundary globalization: eigenvector oriented-derivative magnitudes
// weighted by 1/sqrt(lambda), summed, upsampled and rescaled to [0,1].
BoundaryMap spectral_boundaries(const BoundaryMap& b, const SpectralConfig& cfg);

}  // namespace vidseg
