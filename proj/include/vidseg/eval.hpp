#pragma once

#include <cstdint>
#include <vector>

#include "vidseg/hierarchy.hpp"
#include "vidseg/raster.hpp"

namespace vidseg {

// One annotation source per annotator; frames share a per-annotator global
// label space (labels are track ids).
struct GroundTruth {
  std::vector<VideoSegmentation> annotators;
};

struct PrSample {
  double scale = 0.0;  // threshold or granularity
  double precision = 0.0, recall = 0.0, f_measure = 0.0;
};

struct PrCurve {
  std::vector<PrSample> samples;
  double ods = 0.0;        // F at the single best scale over the whole input
  double ods_scale = 0.0;  // the scale achieving it
  double oss = 0.0;        // mean F at per-item best scales
  double ap = 0.0;         // area under the precision-recall curve
};

double f_measure(double precision, double recall);

// ceil(0.0075 * image diagonal), the usual boundary matching tolerance.
double default_boundary_tolerance(int width, int height);

// Morphological thinning (Zhang-Suen) of a binary mask down to 1-pixel lines.
std::vector<uint8_t> thin_mask(const std::vector<uint8_t>& mask, int w, int h);

// One-to-one greedy nearest-first matching of boundary pixels within
// distance tol; candidate pairs ordered by (distance, pred index, gt index).
struct BoundaryMatch {
  long total_pred = 0, total_gt = 0;
  long matched_pred = 0, matched_gt = 0;
  std::vector<uint8_t> pred_matched;  // full-size masks of matched pixels
  std::vector<uint8_t> gt_matched;
};
BoundaryMatch match_boundaries(const std::vector<uint8_t>& pred,
                               const std::vector<uint8_t>& gt, int w, int h,
                               double tol);

// Boundary precision-recall of thresholdable per-frame predictions against
// all annotators. A predicted pixel counts as correct when matched for any
// annotator; recall is averaged over annotators. Items for the OSS scale are
// frames.
PrCurve boundary_pr(const std::vector<BoundaryMap>& pred, const GroundTruth& gt,
                    int n_thresholds, double tol);
PrCurve boundary_pr(const std::vector<Ucm>& pred, const GroundTruth& gt,
                    int n_thresholds, double tol);
// Single fixed segmentation (one sample).
PrCurve boundary_pr(const VideoSegmentation& pred, const GroundTruth& gt, double tol);

// Volume precision-recall over granularities: each label's spatio-temporal
// pixel set is a volume; precision = sum_v max_g |v n g| / sum_v |v|, recall
// with roles swapped, both averaged over annotators.
PrCurve volume_pr(const std::vector<VideoSegmentation>& granularities,
                  const GroundTruth& gt, const std::vector<double>& scales = {});

// Corrected under-segmentation error:
// (1/N) sum_g sum_{s: s n g != 0} min(|s n g|, |s \ g|).
double undersegmentation_error(const LabelMap& spx, const LabelMap& gt);

struct SuperpixelCurvePoint {
  int target_count = 0;
  double avg_superpixels = 0.0;
  double boundary_recall = 0.0;
  double boundary_precision = 0.0;
  double undersegmentation = 0.0;
};

// Boundary recall/precision and USE as functions of the superpixel count:
// for each target, each image contributes the hierarchy level whose region
// count is closest to the target.
std::vector<SuperpixelCurvePoint> superpixel_curves(
    const std::vector<Ucm>& hierarchies, const GroundTruth& gt, double tol,
    const std::vector<int>& spx_counts);

}  // namespace vidseg
