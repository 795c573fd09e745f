// Command-line front end: each subcommand wraps one pipeline stage so runs
// can be reproduced or resumed file by file.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "vidseg/detect.hpp"
#include "vidseg/eval.hpp"
#include "vidseg/flowtools.hpp"
#include "vidseg/globalize.hpp"
#include "vidseg/hashutil.hpp"
#include "vidseg/hierarchy.hpp"
#include "vidseg/io.hpp"
#include "vidseg/merge.hpp"
#include "vidseg/pipeline.hpp"
#include "vidseg/proposals.hpp"
#include "vidseg/videoseg.hpp"

namespace fs = std::filesystem;
using namespace vidseg;

namespace {

std::string indexed(const std::string& pattern, int i) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern.c_str(), i);
  return buf;
}

std::vector<std::string> collect_series(const std::string& dir,
                                        const std::string& pattern) {
  std::vector<std::string> files;
  for (int i = 0;; ++i) {
    const fs::path f = fs::path(dir) / indexed(pattern, i);
    if (!fs::exists(f)) break;
    files.push_back(f.string());
  }
  return files;
}

void ensure_out_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boundary-driven video segmentation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  int jobs = 1;
  bool seedless = false;
  app.add_option("--config", config_path, "key=value configuration file")
      ->envname("VIDSEG_CONFIG");
  app.add_option("--jobs", jobs, "worker threads over frames");
  app.add_option("--out", out_path, "output file or directory");
  app.add_flag("--seedless", seedless, "assert that no RNG is consumed");

  // detect
  auto* cmd_detect = app.add_subcommand("detect", "boundary map from a frame");
  std::string detect_in;
  std::vector<double> detect_scales{1.0, 2.0, 4.0};
  int detect_orients = 8;
  bool detect_no_nms = false;
  cmd_detect->add_option("--in", detect_in, "input frame PNG")->required();
  cmd_detect->add_option("--scales", detect_scales, "Gaussian sigmas");
  cmd_detect->add_option("--orientations", detect_orients, "orientation count");
  cmd_detect->add_flag("--no-nms", detect_no_nms, "skip non-maximum suppression");

  // flow
  auto* cmd_flow = app.add_subcommand("flow", "estimate optical flow");
  std::string flow_a, flow_b;
  int flow_levels = 4, flow_iters = 8;
  cmd_flow->add_option("--a", flow_a, "frame t")->required();
  cmd_flow->add_option("--b", flow_b, "frame t+1")->required();
  cmd_flow->add_option("--levels", flow_levels, "pyramid levels");
  cmd_flow->add_option("--iters", flow_iters, "warp iterations per level");

  // spb
  auto* cmd_spb = app.add_subcommand("spb", "spectral boundary globalization");
  std::string spb_in;
  SpectralConfig spb_cfg;
  cmd_spb->add_option("--in", spb_in, "input boundary map")->required();
  cmd_spb->add_option("--radius", spb_cfg.radius, "affinity radius");
  cmd_spb->add_option("--rho", spb_cfg.rho, "contour scaling constant");
  cmd_spb->add_option("--eigvecs", spb_cfg.n_eigvecs, "eigenvector count");
  cmd_spb->add_option("--downsample", spb_cfg.downsample, "grid decimation");

  // proposals
  auto* cmd_props = app.add_subcommand("proposals", "contour-averaged proposal cue");
  std::string props_in;
  int props_thresholds = 10, props_seeds = 8, props_depth = 10;
  cmd_props->add_option("--in", props_in, "input boundary map")->required();
  cmd_props->add_option("--thresholds", props_thresholds, "hierarchy levels");
  cmd_props->add_option("--seeds", props_seeds, "seeded-merge seeds");
  cmd_props->add_option("--depth", props_depth, "max merge depth per seed");

  // merge
  auto* cmd_merge = app.add_subcommand("merge", "align and merge boundary cues");
  std::vector<std::string> merge_in;
  std::vector<double> merge_weights;
  cmd_merge->add_option("--in", merge_in, "input boundary maps")->required();
  cmd_merge->add_option("--weights", merge_weights, "per-cue weights");

  // smooth
  auto* cmd_smooth = app.add_subcommand("smooth", "temporal smoothing of cue maps");
  std::string smooth_maps_dir, smooth_flow_dir, smooth_pattern = "se_%05d.pfm";
  int smooth_window = 1;
  cmd_smooth->add_option("--maps", smooth_maps_dir, "directory of per-frame maps")
      ->required();
  cmd_smooth->add_option("--pattern", smooth_pattern, "map filename pattern");
  cmd_smooth->add_option("--flows", smooth_flow_dir,
                         "directory of flow_fwd/flow_bwd .flo files")
      ->required();
  cmd_smooth->add_option("--window", smooth_window, "half window in frames");

  // ucm
  auto* cmd_ucm = app.add_subcommand("ucm", "hierarchy from a boundary map");
  std::string ucm_in;
  cmd_ucm->add_option("--in", ucm_in, "input boundary map")->required();

  // spx
  auto* cmd_spx = app.add_subcommand("spx", "superpixels from a stored hierarchy");
  std::string spx_tree, spx_base;
  double spx_threshold = 0.3;
  int spx_target = 0;
  cmd_spx->add_option("--tree", spx_tree, "ucm tree file")->required();
  cmd_spx->add_option("--base", spx_base, "ucm base label map")->required();
  cmd_spx->add_option("--threshold", spx_threshold, "ucm threshold");
  cmd_spx->add_option("--target", spx_target, "target region count (overrides)");

  // propagate
  auto* cmd_prop = app.add_subcommand("propagate", "greedy video label propagation");
  std::string prop_spx_dir, prop_flow_dir;
  std::string prop_pattern = "spx_%05d.png";
  PropagationConfig prop_cfg;
  cmd_prop->add_option("--spx", prop_spx_dir, "directory of per-frame label maps")
      ->required();
  cmd_prop->add_option("--pattern", prop_pattern, "label map filename pattern");
  cmd_prop->add_option("--flows", prop_flow_dir, "directory of flow_fwd .flo files")
      ->required();
  cmd_prop->add_option("--overlap", prop_cfg.overlap_threshold, "vote threshold");
  cmd_prop->add_flag("--no-new-labels{false}", prop_cfg.allow_new_labels,
                     "never mint fresh labels");

  // eval
  auto* cmd_eval = app.add_subcommand("eval", "metrics against ground truth");
  std::string eval_gt_dir, eval_pred_dir;
  std::string eval_map_pattern = "boundary_%05d.pfm";
  std::string eval_seg_pattern = "videoseg_%05d.png";
  int eval_thresholds = 25;
  double eval_tol = 0.0;
  bool eval_bpr = false, eval_vpr = false;
  cmd_eval->add_option("--gt", eval_gt_dir, "directory of gt_%05d.png")->required();
  cmd_eval->add_option("--pred", eval_pred_dir, "directory of predictions")->required();
  cmd_eval->add_option("--map-pattern", eval_map_pattern, "boundary map pattern");
  cmd_eval->add_option("--seg-pattern", eval_seg_pattern, "video label pattern");
  cmd_eval->add_option("--thresholds", eval_thresholds, "BPR threshold count");
  cmd_eval->add_option("--tolerance", eval_tol, "matching tolerance (0 = auto)");
  cmd_eval->add_flag("--bpr", eval_bpr, "boundary precision-recall of maps");
  cmd_eval->add_flag("--vpr", eval_vpr, "volume precision-recall of labels");

  // pipeline
  auto* cmd_pipe = app.add_subcommand("pipeline", "full per-video run");
  std::string pipe_video;
  cmd_pipe->add_option("--video", pipe_video, "directory with frame_%05d.png")
      ->required();

  // Global flags remain usable after the subcommand name.
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_detect->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required");
      ensure_out_dir(out_path);
      DetectorConfig cfg{detect_scales, detect_orients, !detect_no_nms};
      save_boundary_map(detect_boundaries(load_frame(detect_in), cfg), out_path);
    } else if (cmd_flow->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required");
      ensure_out_dir(out_path);
      save_flow(estimate_flow(load_frame(flow_a), load_frame(flow_b), flow_levels,
                              flow_iters),
                out_path);
    } else if (cmd_spb->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required");
      ensure_out_dir(out_path);
      save_boundary_map(spectral_boundaries(load_boundary_map(spb_in), spb_cfg),
                        out_path);
    } else if (cmd_props->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required");
      ensure_out_dir(out_path);
      const BoundaryMap map = load_boundary_map(props_in);
      const Ucm ucm = build_ucm(map, watershed_oversegment(map));
      save_boundary_map(
          average_contours(generate_proposals(ucm, props_thresholds, props_seeds,
                                              props_depth)),
          out_path);
    } else if (cmd_merge->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required");
      ensure_out_dir(out_path);
      std::vector<WeightedCue> cues;
      for (size_t i = 0; i < merge_in.size(); ++i) {
        const double w = i < merge_weights.size() ? merge_weights[i] : 1.0;
        cues.push_back({load_boundary_map(merge_in[i]), w});
      }
      save_boundary_map(merge_cues(cues), out_path);
    } else if (cmd_smooth->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required");
      fs::create_directories(out_path);
      std::vector<BoundaryMap> maps;
      for (const std::string& f : collect_series(smooth_maps_dir, smooth_pattern))
        maps.push_back(load_boundary_map(f));
      if (maps.empty()) throw ValidationError("no maps matching pattern");
      std::vector<FlowPair> flows;
      for (int t = 0; t + 1 < int(maps.size()); ++t) {
        FlowPair pair;
        pair.forward =
            load_flow((fs::path(smooth_flow_dir) / indexed("flow_fwd_%05d.flo", t)).string());
        pair.backward =
            load_flow((fs::path(smooth_flow_dir) / indexed("flow_bwd_%05d.flo", t)).string());
        flows.push_back(std::move(pair));
      }
      const SmoothingConfig cfg{smooth_window, {}};
      const auto smoothed = temporal_smooth(
          maps, flows, cfg,
          [](const std::vector<WeightedCue>& cues) { return merge_cues(cues); });
      for (size_t t = 0; t < smoothed.size(); ++t)
        save_boundary_map(smoothed[t],
                          (fs::path(out_path) / indexed("ts_%05d.pfm", int(t))).string());
    } else if (cmd_ucm->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required (directory)");
      fs::create_directories(out_path);
      const BoundaryMap map = load_boundary_map(ucm_in);
      const Ucm ucm = build_ucm(map, watershed_oversegment(map));
      const fs::path dir(out_path);
      save_boundary_map(ucm_to_boundary_map(ucm), (dir / "ucm.pfm").string());
      save_label_map(ucm.base, (dir / "ucm_base.png").string());
      save_ucm_tree(ucm, (dir / "ucm.tree").string());
    } else if (cmd_spx->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required");
      ensure_out_dir(out_path);
      const Ucm ucm = load_ucm(spx_tree, spx_base);
      save_label_map(spx_target > 0 ? extract_superpixels_count(ucm, spx_target)
                                    : extract_superpixels(ucm, spx_threshold),
                     out_path);
    } else if (cmd_prop->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required (directory)");
      fs::create_directories(out_path);
      std::vector<LabelMap> spx;
      for (const std::string& f : collect_series(prop_spx_dir, prop_pattern))
        spx.push_back(load_label_map(f));
      if (spx.empty()) throw ValidationError("no label maps matching pattern");
      std::vector<FlowField> flows;
      for (int t = 0; t + 1 < int(spx.size()); ++t)
        flows.push_back(
            load_flow((fs::path(prop_flow_dir) / indexed("flow_fwd_%05d.flo", t)).string()));
      const VideoSegmentation seg = propagate_segmentation(spx, flows, prop_cfg);
      for (size_t t = 0; t < seg.frames.size(); ++t)
        save_label_map(seg.frames[t],
                       (fs::path(out_path) / indexed("videoseg_%05d.png", int(t))).string());
    } else if (cmd_eval->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required (directory)");
      fs::create_directories(out_path);
      GroundTruth gt;
      gt.annotators.resize(1);
      for (const std::string& f : collect_series(eval_gt_dir, "gt_%05d.png"))
        gt.annotators[0].frames.push_back(load_label_map(f));
      if (gt.annotators[0].frames.empty())
        throw ValidationError("no gt_%05d.png under " + eval_gt_dir);
      const int w = gt.annotators[0].frames.front().width;
      const int h = gt.annotators[0].frames.front().height;
      const double tol = eval_tol > 0.0 ? eval_tol : default_boundary_tolerance(w, h);
      if (!eval_bpr && !eval_vpr) eval_bpr = eval_vpr = true;
      if (eval_bpr) {
        std::vector<BoundaryMap> maps;
        for (const std::string& f : collect_series(eval_pred_dir, eval_map_pattern))
          maps.push_back(load_boundary_map(f));
        if (maps.empty()) throw ValidationError("no boundary maps matching pattern");
        const PrCurve curve = boundary_pr(maps, gt, eval_thresholds, tol);
        write_pr_csv(curve, (fs::path(out_path) / "eval_bpr.csv").string());
        std::printf("BPR ODS %.4f OSS %.4f AP %.4f\n", curve.ods, curve.oss, curve.ap);
      }
      if (eval_vpr) {
        VideoSegmentation seg;
        for (const std::string& f : collect_series(eval_pred_dir, eval_seg_pattern))
          seg.frames.push_back(load_label_map(f));
        if (seg.frames.empty()) throw ValidationError("no label maps matching pattern");
        const PrCurve curve = volume_pr({seg}, gt);
        write_pr_csv(curve, (fs::path(out_path) / "eval_vpr.csv").string());
        std::printf("VPR ODS %.4f OSS %.4f AP %.4f\n", curve.ods, curve.oss, curve.ap);
      }
    } else if (cmd_pipe->parsed()) {
      if (out_path.empty()) throw ValidationError("--out required (directory)");
      PipelineConfig cfg;
      if (!config_path.empty())
        cfg = PipelineConfig::from_config(KeyValueConfig::parse_file(config_path));
      if (jobs > 0) cfg.jobs = jobs;
      const PipelineResult result = run_pipeline(cfg, pipe_video, out_path);
      std::printf("frames %d\n", result.n_frames);
      if (result.bpr)
        std::printf("BPR ODS %.4f OSS %.4f AP %.4f\n", result.bpr->ods,
                    result.bpr->oss, result.bpr->ap);
      if (result.vpr)
        std::printf("VPR ODS %.4f OSS %.4f AP %.4f\n", result.vpr->ods,
                    result.vpr->oss, result.vpr->ap);
      std::printf("manifest %s\n", result.manifest_path.c_str());
    }
    if (seedless && entropy::any_used()) {
      std::fprintf(stderr, "error: --seedless was set but entropy was consumed\n");
      return 3;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
