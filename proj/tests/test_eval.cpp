#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "vidseg/eval.hpp"

using namespace vidseg;

namespace {

GroundTruth single_annotator(std::vector<LabelMap> frames) {
  GroundTruth gt;
  gt.annotators.push_back({std::move(frames)});
  return gt;
}

// Boundary map that is exactly the (thinned) boundary mask of a label map.
BoundaryMap boundary_map_of(const LabelMap& labels) {
  const auto mask = label_boundary_mask(labels);
  BoundaryMap map = BoundaryMap::zeros(labels.width, labels.height);
  for (size_t i = 0; i < mask.size(); ++i) map.data[i] = mask[i] ? 1.f : 0.f;
  return map;
}

std::vector<uint8_t> line_mask(int w, int h, int col) {
  std::vector<uint8_t> mask(size_t(w) * h, 0);
  for (int y = 0; y < h; ++y) mask[size_t(y) * w + col] = 1;
  return mask;
}

}  // namespace

TEST_CASE("perfect prediction scores P=R=F=1") {
  const LabelMap gt_labels = testutil::random_partition(24, 24, 5, 7);
  const GroundTruth gt = single_annotator({gt_labels, gt_labels});
  const std::vector<BoundaryMap> pred{boundary_map_of(gt_labels),
                                      boundary_map_of(gt_labels)};
  const PrCurve curve = boundary_pr(pred, gt, 5, 2.0);
  CHECK(curve.ods == 1.0);
  CHECK(curve.oss == 1.0);
  for (const PrSample& s : curve.samples) {
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f_measure == 1.0);
  }
}

TEST_CASE("parallel loci: tol 2 matches fully, tol 0 matches nothing") {
  const int w = 16, h = 12;
  const auto pred = line_mask(w, h, 7);
  const auto gt = line_mask(w, h, 8);
  const BoundaryMatch wide = match_boundaries(pred, gt, w, h, 2.0);
  CHECK(wide.matched_pred == wide.total_pred);
  CHECK(wide.matched_gt == wide.total_gt);
  const BoundaryMatch tight = match_boundaries(pred, gt, w, h, 0.0);
  CHECK(tight.matched_pred == 0);
  CHECK(tight.matched_gt == 0);
}

TEST_CASE("greedy matching equals the exact assignment on displaced segments") {
  // Boundary-like inputs: disjoint vertical segments displaced sideways by a
  // pixel, with random dropouts on the predicted side.
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const int w = 24, h = 24;
    std::vector<uint8_t> pred(size_t(w) * h, 0), gt(size_t(w) * h, 0);
    for (int s = 0; s < 5; ++s) {
      const int col = 2 + 4 * s + int(testutil::unit(seed, uint64_t(3 * s)) * 2);
      const int y0 = int(testutil::unit(seed, uint64_t(3 * s + 1)) * 8);
      const int y1 = y0 + 6 + int(testutil::unit(seed, uint64_t(3 * s + 2)) * 10);
      for (int y = y0; y <= std::min(y1, h - 1); ++y) {
        if ((y + s + int(seed)) % 5 != 0) pred[size_t(y) * w + col] = 1;
        gt[size_t(y) * w + col + 1] = 1;
      }
    }
    const double tol = 2.0;
    const BoundaryMatch greedy = match_boundaries(pred, gt, w, h, tol);
    const long exact = oracle::exact_match_count(pred, gt, w, h, tol);
    CAPTURE(seed);
    CHECK(greedy.matched_pred == exact);
  }
}

TEST_CASE("thinning reduces a 2-pixel band to one line and is stable") {
  const int w = 12, h = 10;
  std::vector<uint8_t> band(size_t(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    band[size_t(y) * w + 5] = 1;
    band[size_t(y) * w + 6] = 1;
  }
  const auto thin = thin_mask(band, w, h);
  // Interior rows carry exactly one pixel (line endpoints may erode by one).
  for (int y = 1; y + 1 < h; ++y) {
    int count = 0;
    for (int x = 0; x < w; ++x) count += thin[size_t(y) * w + x];
    CHECK(count == 1);
  }
  CHECK(thin_mask(thin, w, h) == thin);  // already thin
}

TEST_CASE("multiple annotators: recall averages, precision takes any match") {
  const int w = 16, h = 16;
  LabelMap left_split = LabelMap::filled(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 8; x < w; ++x) left_split.at(x, y) = 1;
  LabelMap no_split = LabelMap::filled(w, h, 0);
  GroundTruth gt;
  gt.annotators.push_back({{left_split}});
  gt.annotators.push_back({{no_split}});
  const std::vector<BoundaryMap> pred{boundary_map_of(left_split)};
  const PrCurve curve = boundary_pr(pred, gt, 3, 1.5);
  // Annotator 1 matches fully; annotator 2 has no boundaries (recall 1 by
  // convention); precision is 1 because annotator 1 matched every pixel.
  CHECK(curve.samples[0].precision == 1.0);
  CHECK(curve.samples[0].recall == 1.0);
}

TEST_CASE("volume PR: identical segmentation scores 1") {
  std::vector<LabelMap> frames;
  for (uint64_t s = 0; s < 3; ++s)
    frames.push_back(testutil::random_partition(12, 12, 4, s + 11));
  VideoSegmentation seg{frames};
  const GroundTruth gt = single_annotator(frames);
  const PrCurve curve = volume_pr({seg}, gt);
  CHECK(curve.samples[0].precision == 1.0);
  CHECK(curve.samples[0].recall == 1.0);
  CHECK(curve.ods == 1.0);
}

TEST_CASE("volume PR: one blob against a two-volume ground truth") {
  const int w = 8, h = 8, frames = 2;
  LabelMap gt_frame = LabelMap::filled(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = w / 2; x < w; ++x) gt_frame.at(x, y) = 1;
  VideoSegmentation pred{{LabelMap::filled(w, h, 0), LabelMap::filled(w, h, 0)}};
  const GroundTruth gt = single_annotator({gt_frame, gt_frame});
  const PrCurve curve = volume_pr({pred}, gt);
  // The single predicted volume covers both halves: its best overlap is half
  // the pixels, while each ground-truth volume is fully recovered.
  CHECK(curve.samples[0].precision == 0.5);
  CHECK(curve.samples[0].recall == 1.0);
  (void)frames;
}

TEST_CASE("volume PR rewards temporal consistency") {
  const int w = 8, h = 8;
  LabelMap half = LabelMap::filled(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = w / 2; x < w; ++x) half.at(x, y) = 1;
  LabelMap swapped = half;
  for (int32_t& l : swapped.labels) l = 1 - l;
  const GroundTruth gt = single_annotator({half, half, half, half});
  VideoSegmentation consistent{{half, half, half, half}};
  VideoSegmentation permuted{{half, swapped, half, swapped}};
  const double consistent_recall = volume_pr({consistent}, gt).samples[0].recall;
  const double permuted_recall = volume_pr({permuted}, gt).samples[0].recall;
  CHECK(consistent_recall == 1.0);
  CHECK(permuted_recall < consistent_recall);
}

TEST_CASE("USE: equality and refinement give zero") {
  const LabelMap gt_labels = testutil::random_partition(16, 16, 4, 3);
  CHECK(undersegmentation_error(gt_labels, gt_labels) == 0.0);
  // Refine by splitting on a vertical line: still zero.
  LabelMap refined = gt_labels;
  const int32_t k = int32_t(num_labels(gt_labels));
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 8; ++x) refined.at(x, y) += k;
  refined = relabel_contiguous(refined);
  CHECK(undersegmentation_error(refined, gt_labels) == 0.0);
}

TEST_CASE("USE: one superpixel across a 50/50 split is maximal") {
  LabelMap gt_labels = LabelMap::filled(8, 8, 0);
  for (int y = 0; y < 8; ++y)
    for (int x = 4; x < 8; ++x) gt_labels.at(x, y) = 1;
  const LabelMap spx = LabelMap::filled(8, 8, 0);
  CHECK(undersegmentation_error(spx, gt_labels) == 1.0);
}

TEST_CASE("metrics ignore label permutations") {
  std::vector<LabelMap> frames{testutil::random_partition(12, 12, 5, 77)};
  LabelMap permuted = frames[0];
  const int32_t k = int32_t(num_labels(permuted));
  for (int32_t& l : permuted.labels) l = (l + 1) % k;
  const GroundTruth gt = single_annotator(frames);
  CHECK(undersegmentation_error(permuted, frames[0]) ==
        undersegmentation_error(frames[0], frames[0]));
  const PrCurve a = volume_pr({VideoSegmentation{{frames[0]}}}, gt);
  const PrCurve b = volume_pr({VideoSegmentation{{permuted}}}, gt);
  CHECK(a.samples[0].precision == b.samples[0].precision);
  CHECK(a.samples[0].recall == b.samples[0].recall);
}

TEST_CASE("superpixel curves: extremes behave as expected") {
  // Hierarchy from a map whose strongest level equals the ground truth.
  const int w = 16, h = 16;
  LabelMap gt_labels = LabelMap::filled(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 8; x < w; ++x) gt_labels.at(x, y) = 1;
  BoundaryMap map = BoundaryMap::zeros(w, h);
  for (int y = 0; y < h; ++y) {
    map.at(7, y) = 0.9f;
    map.at(8, y) = 0.9f;
    map.at(3, y) = 0.2f;  // weaker internal split
    map.at(11, y) = 0.2f;
  }
  const Ucm ucm = build_ucm(map, watershed_oversegment(map));
  const GroundTruth gt = single_annotator({gt_labels});
  const auto table = superpixel_curves({ucm}, gt, 1.0, {1, 2, 4});

  // Target 1: single region, no boundary pixels, recall 0, USE maximal.
  CHECK(table[0].avg_superpixels == 1.0);
  CHECK(table[0].boundary_recall == 0.0);
  CHECK(table[0].undersegmentation == 1.0);
  // Target 2: the level equals the ground truth exactly.
  CHECK(table[1].avg_superpixels == 2.0);
  CHECK(table[1].boundary_recall == 1.0);
  CHECK(table[1].boundary_precision == 1.0);
  CHECK(table[1].undersegmentation == 0.0);
  // Target 4: a refinement, recall stays 1, USE stays 0.
  CHECK(table[2].boundary_recall == 1.0);
  CHECK(table[2].undersegmentation == 0.0);
}

TEST_CASE("superpixel recall is non-decreasing in the superpixel count") {
  std::vector<Ucm> hierarchies;
  std::vector<LabelMap> gt_frames;
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    const BoundaryMap map = testutil::smooth_random_map(24, 24, seed);
    hierarchies.push_back(build_ucm(map, watershed_oversegment(map)));
    gt_frames.push_back(testutil::random_partition(24, 24, 4, seed + 100));
  }
  const GroundTruth gt = single_annotator(gt_frames);
  const auto table = superpixel_curves(hierarchies, gt, 2.0, {1, 2, 4, 8, 16, 32});
  for (size_t i = 1; i < table.size(); ++i)
    CHECK(table[i].boundary_recall >= table[i - 1].boundary_recall - 1e-12);
}

TEST_CASE("OSS never drops below ODS on threshold curves") {
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    std::vector<BoundaryMap> pred;
    std::vector<LabelMap> gt_frames;
    for (int f = 0; f < 3; ++f) {
      pred.push_back(testutil::smooth_random_map(20, 20, seed * 10 + uint64_t(f)));
      gt_frames.push_back(testutil::random_partition(20, 20, 4, seed * 20 + uint64_t(f)));
    }
    const PrCurve curve = boundary_pr(pred, single_annotator(gt_frames), 9, 2.0);
    CAPTURE(seed);
    CHECK(curve.oss >= curve.ods - 1e-12);
    CHECK(curve.ap >= 0.0);
    CHECK(curve.ap <= 1.0);
  }
}

TEST_CASE("boundary_pr rejects ground truth without boundaries") {
  const std::vector<BoundaryMap> pred{BoundaryMap::zeros(8, 8)};
  const GroundTruth gt = single_annotator({LabelMap::filled(8, 8, 0)});
  CHECK_THROWS_AS(boundary_pr(pred, gt, 3, 1.0), ValidationError);
}
