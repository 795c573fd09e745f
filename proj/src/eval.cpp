#include "vidseg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace vidseg {

namespace {

void check_gt(const GroundTruth& gt, int w, int h, size_t frames) {
  if (gt.annotators.empty()) throw ValidationError("ground truth: no annotators");
  for (const VideoSegmentation& seg : gt.annotators) {
    if (seg.frames.size() != frames)
      throw ValidationError("ground truth: frame count mismatch");
    for (const LabelMap& f : seg.frames)
      if (f.width != w || f.height != h)
        throw ValidationError("ground truth: dimension mismatch");
  }
}

std::vector<uint8_t> binarize(const BoundaryMap& map, double threshold) {
  std::vector<uint8_t> mask(map.data.size(), 0);
  for (size_t i = 0; i < map.data.size(); ++i)
    if (map.data[i] >= threshold) mask[i] = 1;
  return mask;
}

// Per-frame matching counts at one scale: total/matched predicted pixels plus
// per-annotator ground-truth tallies.
struct FrameCounts {
  long total_pred = 0, matched_pred = 0;
  std::vector<long> total_gt, matched_gt;
};

// Average precision: precision linearly interpolated onto the recall grid
// 0.01..1.00, zero outside the observed recall span, averaged.
double ap_from_samples(std::vector<std::pair<double, double>> rp) {
  std::sort(rp.begin(), rp.end());
  double ap = 0.0;
  for (int g = 1; g <= 100; ++g) {
    const double r = double(g) / 100.0;
    if (r < rp.front().first - 1e-12 || r > rp.back().first + 1e-12) continue;
    double p = rp.back().second;
    for (size_t i = 0; i < rp.size(); ++i) {
      if (r > rp[i].first + 1e-12) continue;
      if (i == 0 || rp[i].first - rp[i - 1].first <= 1e-12) {
        p = rp[i].second;
      } else {
        const double f = (r - rp[i - 1].first) / (rp[i].first - rp[i - 1].first);
        p = rp[i - 1].second + f * (rp[i].second - rp[i - 1].second);
      }
      break;
    }
    ap += p / 100.0;
  }
  return std::clamp(ap, 0.0, 1.0);
}

double frame_f(const FrameCounts& c) {
  const double precision =
      c.total_pred > 0 ? double(c.matched_pred) / double(c.total_pred) : 1.0;
  double recall_sum = 0.0;
  for (size_t a = 0; a < c.total_gt.size(); ++a)
    recall_sum += c.total_gt[a] > 0 ? double(c.matched_gt[a]) / double(c.total_gt[a]) : 1.0;
  const double recall = recall_sum / double(c.total_gt.size());
  return f_measure(precision, recall);
}

FrameCounts count_frame(const std::vector<uint8_t>& pred_mask,
                        const std::vector<std::vector<uint8_t>>& gt_masks, int w,
                        int h, double tol) {
  FrameCounts counts;
  counts.total_gt.resize(gt_masks.size(), 0);
  counts.matched_gt.resize(gt_masks.size(), 0);
  for (uint8_t v : pred_mask) counts.total_pred += v;
  std::vector<uint8_t> matched_any(size_t(w) * h, 0);
  for (size_t a = 0; a < gt_masks.size(); ++a) {
    const BoundaryMatch m = match_boundaries(pred_mask, gt_masks[a], w, h, tol);
    counts.total_gt[a] = m.total_gt;
    counts.matched_gt[a] = m.matched_gt;
    for (size_t i = 0; i < matched_any.size(); ++i)
      if (m.pred_matched[i]) matched_any[i] = 1;
  }
  for (uint8_t v : matched_any) counts.matched_pred += v;
  return counts;
}

// Aggregates the per-frame/per-scale grid into a curve: ODS over the pooled
// counts, OSS from per-frame best scales, AP by trapezoid over recall.
PrCurve finish_curve(const std::vector<std::vector<FrameCounts>>& grid,
                     const std::vector<double>& scales) {
  const size_t n_scales = scales.size();
  const size_t n_frames = grid.size();
  const size_t n_annot = grid.empty() ? 0 : grid[0][0].total_gt.size();

  long gt_anywhere = 0;
  for (const auto& row : grid)
    for (const FrameCounts& c : row)
      for (long t : c.total_gt) gt_anywhere += t;
  if (gt_anywhere == 0)
    throw ValidationError("boundary_pr: no ground-truth boundary pixels");

  PrCurve curve;
  curve.samples.resize(n_scales);
  for (size_t s = 0; s < n_scales; ++s) {
    long total_pred = 0, matched_pred = 0;
    std::vector<long> total_gt(n_annot, 0), matched_gt(n_annot, 0);
    for (size_t f = 0; f < n_frames; ++f) {
      const FrameCounts& c = grid[f][s];
      total_pred += c.total_pred;
      matched_pred += c.matched_pred;
      for (size_t a = 0; a < n_annot; ++a) {
        total_gt[a] += c.total_gt[a];
        matched_gt[a] += c.matched_gt[a];
      }
    }
    const double precision =
        total_pred > 0 ? double(matched_pred) / double(total_pred) : 1.0;
    double recall_sum = 0.0;
    for (size_t a = 0; a < n_annot; ++a)
      recall_sum += total_gt[a] > 0 ? double(matched_gt[a]) / double(total_gt[a]) : 1.0;
    const double recall = recall_sum / double(n_annot);
    curve.samples[s] = {scales[s], precision, recall, f_measure(precision, recall)};
    if (curve.samples[s].f_measure > curve.ods ||
        (s == 0 && curve.samples[s].f_measure >= curve.ods)) {
      curve.ods = curve.samples[s].f_measure;
      curve.ods_scale = scales[s];
    }
  }

  double oss_sum = 0.0;
  for (size_t f = 0; f < n_frames; ++f) {
    double best = 0.0;
    for (size_t s = 0; s < n_scales; ++s) best = std::max(best, frame_f(grid[f][s]));
    oss_sum += best;
  }
  curve.oss = n_frames > 0 ? oss_sum / double(n_frames) : 0.0;

  std::vector<std::pair<double, double>> rp;
  rp.reserve(n_scales);
  for (const PrSample& s : curve.samples) rp.push_back({s.recall, s.precision});
  curve.ap = ap_from_samples(std::move(rp));
  return curve;
}

std::vector<std::vector<std::vector<uint8_t>>> gt_boundary_masks(
    const GroundTruth& gt, size_t frames, bool thin, int w, int h) {
  std::vector<std::vector<std::vector<uint8_t>>> masks(frames);
  for (size_t f = 0; f < frames; ++f) {
    masks[f].reserve(gt.annotators.size());
    for (const VideoSegmentation& seg : gt.annotators) {
      std::vector<uint8_t> m = label_boundary_mask(seg.frames[f]);
      masks[f].push_back(thin ? thin_mask(m, w, h) : std::move(m));
    }
  }
  return masks;
}

std::vector<double> even_thresholds(int n) {
  std::vector<double> t(size_t(n), 0.0);
  for (int i = 1; i <= n; ++i) t[size_t(i - 1)] = double(i) / double(n + 1);
  return t;
}

}  // namespace

double f_measure(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

double default_boundary_tolerance(int width, int height) {
  return std::ceil(0.0075 * std::sqrt(double(width) * width + double(height) * height));
}

std::vector<uint8_t> thin_mask(const std::vector<uint8_t>& mask, int w, int h) {
  std::vector<uint8_t> img(mask);
  auto px = [&](int x, int y) -> int {
    if (x < 0 || x >= w || y < 0 || y >= h) return 0;
    return img[size_t(y) * w + x] ? 1 : 0;
  };
  std::vector<size_t> kill;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      kill.clear();
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          if (!px(x, y)) continue;
          const int p2 = px(x, y - 1), p3 = px(x + 1, y - 1), p4 = px(x + 1, y);
          const int p5 = px(x + 1, y + 1), p6 = px(x, y + 1), p7 = px(x - 1, y + 1);
          const int p8 = px(x - 1, y), p9 = px(x - 1, y - 1);
          const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          if (b < 2 || b > 6) continue;
          const int transitions = (p2 == 0 && p3 == 1) + (p3 == 0 && p4 == 1) +
                                  (p4 == 0 && p5 == 1) + (p5 == 0 && p6 == 1) +
                                  (p6 == 0 && p7 == 1) + (p7 == 0 && p8 == 1) +
                                  (p8 == 0 && p9 == 1) + (p9 == 0 && p2 == 1);
          if (transitions != 1) continue;
          if (pass == 0) {
            if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
          } else {
            if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
          }
          kill.push_back(size_t(y) * w + x);
        }
      if (!kill.empty()) changed = true;
      for (size_t i : kill) img[i] = 0;
    }
  }
  return img;
}

BoundaryMatch match_boundaries(const std::vector<uint8_t>& pred,
                               const std::vector<uint8_t>& gt, int w, int h,
                               double tol) {
  if (tol < 0.0) throw ValidationError("match_boundaries: tol must be >= 0");
  BoundaryMatch out;
  out.pred_matched.assign(size_t(w) * h, 0);
  out.gt_matched.assign(size_t(w) * h, 0);
  for (uint8_t v : pred) out.total_pred += v ? 1 : 0;
  for (uint8_t v : gt) out.total_gt += v ? 1 : 0;
  if (out.total_pred == 0 || out.total_gt == 0) return out;

  const int reach = int(std::floor(tol));
  const double tol2 = tol * tol;
  // (squared distance, pred index, gt index), ascending.
  std::vector<std::tuple<long, long, long>> pairs;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t p = size_t(y) * w + x;
      if (!pred[p]) continue;
      for (int dy = -reach; dy <= reach; ++dy) {
        const int gy = y + dy;
        if (gy < 0 || gy >= h) continue;
        for (int dx = -reach; dx <= reach; ++dx) {
          const int gx = x + dx;
          if (gx < 0 || gx >= w) continue;
          const double d2 = double(dx) * dx + double(dy) * dy;
          if (d2 > tol2) continue;
          const size_t g = size_t(gy) * w + gx;
          if (gt[g]) pairs.push_back({long(d2), long(p), long(g)});
        }
      }
    }
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [d2, p, g] : pairs) {
    if (out.pred_matched[size_t(p)] || out.gt_matched[size_t(g)]) continue;
    out.pred_matched[size_t(p)] = 1;
    out.gt_matched[size_t(g)] = 1;
    ++out.matched_pred;
    ++out.matched_gt;
  }
  return out;
}

PrCurve boundary_pr(const std::vector<BoundaryMap>& pred, const GroundTruth& gt,
                    int n_thresholds, double tol) {
  if (pred.empty()) throw ValidationError("boundary_pr: no frames");
  if (n_thresholds < 1) throw ValidationError("boundary_pr: n_thresholds >= 1");
  const int w = pred.front().width, h = pred.front().height;
  check_gt(gt, w, h, pred.size());

  const std::vector<double> thresholds = even_thresholds(n_thresholds);
  const auto gt_masks = gt_boundary_masks(gt, pred.size(), true, w, h);
  std::vector<std::vector<FrameCounts>> grid(pred.size());
  for (size_t f = 0; f < pred.size(); ++f) {
    grid[f].resize(thresholds.size());
    for (size_t s = 0; s < thresholds.size(); ++s) {
      const std::vector<uint8_t> mask =
          thin_mask(binarize(pred[f], thresholds[s]), w, h);
      grid[f][s] = count_frame(mask, gt_masks[f], w, h, tol);
    }
  }
  return finish_curve(grid, thresholds);
}

PrCurve boundary_pr(const std::vector<Ucm>& pred, const GroundTruth& gt,
                    int n_thresholds, double tol) {
  if (pred.empty()) throw ValidationError("boundary_pr: no frames");
  if (n_thresholds < 1) throw ValidationError("boundary_pr: n_thresholds >= 1");
  const int w = pred.front().base.width, h = pred.front().base.height;
  check_gt(gt, w, h, pred.size());

  const std::vector<double> thresholds = even_thresholds(n_thresholds);
  const auto gt_masks = gt_boundary_masks(gt, pred.size(), true, w, h);
  std::vector<std::vector<FrameCounts>> grid(pred.size());
  for (size_t f = 0; f < pred.size(); ++f) {
    grid[f].resize(thresholds.size());
    for (size_t s = 0; s < thresholds.size(); ++s) {
      const LabelMap level = extract_superpixels(pred[f], thresholds[s]);
      const std::vector<uint8_t> mask =
          thin_mask(label_boundary_mask(level), w, h);
      grid[f][s] = count_frame(mask, gt_masks[f], w, h, tol);
    }
  }
  return finish_curve(grid, thresholds);
}

PrCurve boundary_pr(const VideoSegmentation& pred, const GroundTruth& gt, double tol) {
  if (pred.frames.empty()) throw ValidationError("boundary_pr: no frames");
  const int w = pred.frames.front().width, h = pred.frames.front().height;
  check_gt(gt, w, h, pred.frames.size());
  const auto gt_masks = gt_boundary_masks(gt, pred.frames.size(), true, w, h);
  std::vector<std::vector<FrameCounts>> grid(pred.frames.size());
  for (size_t f = 0; f < pred.frames.size(); ++f) {
    const std::vector<uint8_t> mask =
        thin_mask(label_boundary_mask(pred.frames[f]), w, h);
    grid[f].push_back(count_frame(mask, gt_masks[f], w, h, tol));
  }
  return finish_curve(grid, {0.5});
}

PrCurve volume_pr(const std::vector<VideoSegmentation>& granularities,
                  const GroundTruth& gt, const std::vector<double>& scales) {
  if (granularities.empty()) throw ValidationError("volume_pr: no granularities");
  const size_t frames = granularities.front().frames.size();
  if (frames == 0) throw ValidationError("volume_pr: no frames");
  const int w = granularities.front().frames.front().width;
  const int h = granularities.front().frames.front().height;
  check_gt(gt, w, h, frames);
  for (const VideoSegmentation& seg : granularities)
    if (seg.frames.size() != frames)
      throw ValidationError("volume_pr: frame count mismatch");

  PrCurve curve;
  curve.samples.resize(granularities.size());
  const double total_pixels = double(frames) * w * h;

  for (size_t g_idx = 0; g_idx < granularities.size(); ++g_idx) {
    const VideoSegmentation& seg = granularities[g_idx];
    double precision_sum = 0.0, recall_sum = 0.0;
    for (const VideoSegmentation& annot : gt.annotators) {
      std::map<std::pair<int32_t, int32_t>, double> overlap;
      std::map<int32_t, double> pred_size, gt_size;
      for (size_t f = 0; f < frames; ++f) {
        const LabelMap& pf = seg.frames[f];
        const LabelMap& gf = annot.frames[f];
        for (size_t i = 0; i < pf.labels.size(); ++i) {
          overlap[{pf.labels[i], gf.labels[i]}] += 1.0;
          pred_size[pf.labels[i]] += 1.0;
          gt_size[gf.labels[i]] += 1.0;
        }
      }
      std::map<int32_t, double> best_for_pred, best_for_gt;
      for (const auto& [key, count] : overlap) {
        best_for_pred[key.first] = std::max(best_for_pred[key.first], count);
        best_for_gt[key.second] = std::max(best_for_gt[key.second], count);
      }
      double p_num = 0.0, r_num = 0.0;
      for (const auto& [label, count] : best_for_pred) p_num += count;
      for (const auto& [label, count] : best_for_gt) r_num += count;
      precision_sum += p_num / total_pixels;
      recall_sum += r_num / total_pixels;
    }
    const double precision = precision_sum / double(gt.annotators.size());
    const double recall = recall_sum / double(gt.annotators.size());
    const double scale = scales.empty() ? double(g_idx) : scales[g_idx];
    curve.samples[g_idx] = {scale, precision, recall, f_measure(precision, recall)};
    if (curve.samples[g_idx].f_measure > curve.ods || g_idx == 0) {
      curve.ods = curve.samples[g_idx].f_measure;
      curve.ods_scale = scale;
    }
  }
  // A single video is the only item, so the per-item optimum equals ODS.
  curve.oss = curve.ods;

  std::vector<std::pair<double, double>> rp;
  for (const PrSample& s : curve.samples) rp.push_back({s.recall, s.precision});
  curve.ap = ap_from_samples(std::move(rp));
  return curve;
}

double undersegmentation_error(const LabelMap& spx, const LabelMap& gt) {
  if (spx.width != gt.width || spx.height != gt.height)
    throw ValidationError("undersegmentation_error: dimension mismatch");
  std::map<std::pair<int32_t, int32_t>, long> overlap;
  std::map<int32_t, long> spx_size;
  for (size_t i = 0; i < spx.labels.size(); ++i) {
    overlap[{spx.labels[i], gt.labels[i]}] += 1;
    spx_size[spx.labels[i]] += 1;
  }
  double total = 0.0;
  for (const auto& [key, count] : overlap) {
    const long inside = count;
    const long outside = spx_size[key.first] - count;
    total += double(std::min(inside, outside));
  }
  return total / double(spx.labels.size());
}

std::vector<SuperpixelCurvePoint> superpixel_curves(
    const std::vector<Ucm>& hierarchies, const GroundTruth& gt, double tol,
    const std::vector<int>& spx_counts) {
  if (hierarchies.empty()) throw ValidationError("superpixel_curves: no hierarchies");
  const int w = hierarchies.front().base.width, h = hierarchies.front().base.height;
  check_gt(gt, w, h, hierarchies.size());
  const size_t n_annot = gt.annotators.size();
  const auto gt_masks = gt_boundary_masks(gt, hierarchies.size(), false, w, h);

  std::vector<SuperpixelCurvePoint> table;
  table.reserve(spx_counts.size());
  for (int target : spx_counts) {
    SuperpixelCurvePoint point;
    point.target_count = target;
    long total_pred = 0, matched_pred = 0;
    std::vector<long> total_gt(n_annot, 0), matched_gt(n_annot, 0);
    double use_sum = 0.0, spx_sum = 0.0;
    for (size_t img = 0; img < hierarchies.size(); ++img) {
      const LabelMap level = extract_superpixels_count(hierarchies[img], target);
      spx_sum += num_labels(level);
      const std::vector<uint8_t> mask = label_boundary_mask(level);
      std::vector<uint8_t> matched_any(size_t(w) * h, 0);
      for (size_t a = 0; a < n_annot; ++a) {
        const BoundaryMatch m = match_boundaries(mask, gt_masks[img][a], w, h, tol);
        total_gt[a] += m.total_gt;
        matched_gt[a] += m.matched_gt;
        for (size_t i = 0; i < matched_any.size(); ++i)
          if (m.pred_matched[i]) matched_any[i] = 1;
        use_sum += undersegmentation_error(level, gt.annotators[a].frames[img]);
      }
      for (uint8_t v : mask) total_pred += v;
      for (uint8_t v : matched_any) matched_pred += v;
    }
    point.avg_superpixels = spx_sum / double(hierarchies.size());
    point.boundary_precision =
        total_pred > 0 ? double(matched_pred) / double(total_pred) : 1.0;
    double recall_sum = 0.0;
    for (size_t a = 0; a < n_annot; ++a)
      recall_sum += total_gt[a] > 0 ? double(matched_gt[a]) / double(total_gt[a]) : 1.0;
    point.boundary_recall = recall_sum / double(n_annot);
    point.undersegmentation = use_sum / double(hierarchies.size() * n_annot);
    table.push_back(point);
  }
  return table;
}

}  // namespace vidseg
