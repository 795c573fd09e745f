#include "vidseg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "vidseg/flowtools.hpp"
#include "vidseg/hashutil.hpp"
#include "vidseg/hierarchy.hpp"
#include "vidseg/merge.hpp"
#include "vidseg/parallel.hpp"
#include "vidseg/proposals.hpp"

namespace fs = std::filesystem;

namespace vidseg {

namespace {

std::string indexed(const std::string& pattern, int i) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern.c_str(), i);
  return buf;
}

std::string bool_text(bool b) { return b ? "on" : "off"; }

std::string list_text(const std::vector<double>& v) {
  std::ostringstream out;
  out.precision(17);
  for (size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

struct StageClock {
  std::vector<std::pair<std::string, double>> timings;

  template <typename F>
  auto run(const std::string& name, F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        timings.push_back({name, seconds_since(start)});
      } else {
        auto result = fn();
        timings.push_back({name, seconds_since(start)});
        return result;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError("stage " + name + ": " + e.what());
    }
  }

  static double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

// Per-frame cue stage with optional resume from .pfm artifacts.
std::vector<BoundaryMap> frame_stage(int n_frames, int jobs, const fs::path& out,
                                     const std::string& pattern, bool resume,
                                     const std::function<BoundaryMap(int)>& compute) {
  std::vector<BoundaryMap> maps;
  maps.resize(size_t(n_frames));
  parallel_for(n_frames, jobs, [&](int t) {
    const fs::path file = out / indexed(pattern, t);
    if (resume && fs::exists(file)) {
      maps[size_t(t)] = load_boundary_map(file.string());
      return;
    }
    maps[size_t(t)] = compute(t);
    save_boundary_map(maps[size_t(t)], file.string());
  });
  return maps;
}

}  // namespace

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& kv) {
  PipelineConfig cfg;
  cfg.detector.scales = kv.get_double_list("detector.scales", cfg.detector.scales);
  cfg.detector.n_orientations =
      kv.get_int("detector.orientations", cfg.detector.n_orientations);
  cfg.detector.nonmax_suppress = kv.get_bool("detector.nms", cfg.detector.nonmax_suppress);

  cfg.spectral.radius = kv.get_int("spectral.radius", cfg.spectral.radius);
  cfg.spectral.rho = kv.get_double("spectral.rho", cfg.spectral.rho);
  cfg.spectral.n_eigvecs = kv.get_int("spectral.eigvecs", cfg.spectral.n_eigvecs);
  cfg.spectral.downsample = kv.get_int("spectral.downsample", cfg.spectral.downsample);
  cfg.spectral.n_orientations =
      kv.get_int("spectral.orientations", cfg.spectral.n_orientations);

  cfg.use_detector = kv.get_bool("cue.detector", cfg.use_detector);
  cfg.use_spb = kv.get_bool("cue.spb", cfg.use_spb);
  cfg.use_proposals = kv.get_bool("cue.proposals", cfg.use_proposals);
  cfg.use_flow = kv.get_bool("cue.flow", cfg.use_flow);
  cfg.use_flow_spb = kv.get_bool("cue.flow_spb", cfg.use_flow_spb);
  cfg.use_flow_proposals = kv.get_bool("cue.flow_proposals", cfg.use_flow_proposals);
  cfg.use_temporal = kv.get_bool("cue.temporal", cfg.use_temporal);
  cfg.weight_detector = kv.get_double("weight.detector", cfg.weight_detector);
  cfg.weight_spb = kv.get_double("weight.spb", cfg.weight_spb);
  cfg.weight_proposals = kv.get_double("weight.proposals", cfg.weight_proposals);
  cfg.weight_flow = kv.get_double("weight.flow", cfg.weight_flow);
  cfg.weight_flow_spb = kv.get_double("weight.flow_spb", cfg.weight_flow_spb);
  cfg.weight_flow_proposals =
      kv.get_double("weight.flow_proposals", cfg.weight_flow_proposals);
  cfg.weight_temporal = kv.get_double("weight.temporal", cfg.weight_temporal);
  cfg.temporal_window = kv.get_int("temporal.window", cfg.temporal_window);

  cfg.proposal_thresholds = kv.get_int("proposals.thresholds", cfg.proposal_thresholds);
  cfg.proposal_seeds = kv.get_int("proposals.seeds", cfg.proposal_seeds);
  cfg.proposal_depth = kv.get_int("proposals.depth", cfg.proposal_depth);
  cfg.flow_levels = kv.get_int("flow.levels", cfg.flow_levels);
  cfg.flow_iters = kv.get_int("flow.iters", cfg.flow_iters);

  cfg.spx_threshold = kv.get_double("spx.threshold", cfg.spx_threshold);
  cfg.spx_target_count = kv.get_int("spx.target", cfg.spx_target_count);

  cfg.propagation.overlap_threshold =
      kv.get_double("propagate.overlap", cfg.propagation.overlap_threshold);
  cfg.propagation.allow_new_labels =
      kv.get_bool("propagate.allow_new", cfg.propagation.allow_new_labels);

  cfg.eval_thresholds = kv.get_int("eval.thresholds", cfg.eval_thresholds);
  cfg.eval_tolerance = kv.get_double("eval.tolerance", cfg.eval_tolerance);
  cfg.eval_granularities =
      kv.get_double_list("eval.granularities", cfg.eval_granularities);
  {
    std::vector<double> counts(cfg.eval_spx_counts.begin(), cfg.eval_spx_counts.end());
    counts = kv.get_double_list("eval.spx_counts", counts);
    cfg.eval_spx_counts.clear();
    for (double c : counts) cfg.eval_spx_counts.push_back(int(std::lround(c)));
  }

  cfg.jobs = kv.get_int("jobs", cfg.jobs);
  cfg.emit_svg = kv.get_bool("plot.svg", cfg.emit_svg);
  cfg.resume = kv.get_bool("resume", cfg.resume);
  return cfg;
}

std::string PipelineConfig::canonical_text() const {
  std::ostringstream out;
  out.precision(17);
  std::map<std::string, std::string> kv;
  kv["detector.scales"] = list_text(detector.scales);
  kv["detector.orientations"] = std::to_string(detector.n_orientations);
  kv["detector.nms"] = bool_text(detector.nonmax_suppress);
  kv["spectral.radius"] = std::to_string(spectral.radius);
  {
    std::ostringstream v;
    v.precision(17);
    v << spectral.rho;
    kv["spectral.rho"] = v.str();
  }
  kv["spectral.eigvecs"] = std::to_string(spectral.n_eigvecs);
  kv["spectral.downsample"] = std::to_string(spectral.downsample);
  kv["spectral.orientations"] = std::to_string(spectral.n_orientations);
  kv["cue.detector"] = bool_text(use_detector);
  kv["cue.spb"] = bool_text(use_spb);
  kv["cue.proposals"] = bool_text(use_proposals);
  kv["cue.flow"] = bool_text(use_flow);
  kv["cue.flow_spb"] = bool_text(use_flow_spb);
  kv["cue.flow_proposals"] = bool_text(use_flow_proposals);
  kv["cue.temporal"] = bool_text(use_temporal);
  kv["weight.detector"] = list_text({weight_detector});
  kv["weight.spb"] = list_text({weight_spb});
  kv["weight.proposals"] = list_text({weight_proposals});
  kv["weight.flow"] = list_text({weight_flow});
  kv["weight.flow_spb"] = list_text({weight_flow_spb});
  kv["weight.flow_proposals"] = list_text({weight_flow_proposals});
  kv["weight.temporal"] = list_text({weight_temporal});
  kv["temporal.window"] = std::to_string(temporal_window);
  kv["proposals.thresholds"] = std::to_string(proposal_thresholds);
  kv["proposals.seeds"] = std::to_string(proposal_seeds);
  kv["proposals.depth"] = std::to_string(proposal_depth);
  kv["flow.levels"] = std::to_string(flow_levels);
  kv["flow.iters"] = std::to_string(flow_iters);
  kv["spx.threshold"] = list_text({spx_threshold});
  kv["spx.target"] = std::to_string(spx_target_count);
  kv["propagate.overlap"] = list_text({propagation.overlap_threshold});
  kv["propagate.allow_new"] = bool_text(propagation.allow_new_labels);
  kv["eval.thresholds"] = std::to_string(eval_thresholds);
  kv["eval.tolerance"] = list_text({eval_tolerance});
  kv["eval.granularities"] = list_text(eval_granularities);
  {
    std::vector<double> counts(eval_spx_counts.begin(), eval_spx_counts.end());
    kv["eval.spx_counts"] = list_text(counts);
  }
  for (const auto& [key, value] : kv) out << key << "=" << value << "\n";
  return out.str();
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& video_dir,
                            const std::string& out_dir) {
  if (!cfg.use_detector && !cfg.use_spb && !cfg.use_proposals && !cfg.use_flow &&
      !cfg.use_flow_spb && !cfg.use_flow_proposals && !cfg.use_temporal)
    throw ValidationError("empty cue list");

  const fs::path in(video_dir);
  const fs::path out(out_dir);
  fs::create_directories(out);
  StageClock clock;

  // Input discovery: consecutive frame_%05d.png from 0.
  std::vector<std::string> frame_files;
  for (int t = 0;; ++t) {
    const fs::path f = in / indexed("frame_%05d.png", t);
    if (!fs::exists(f)) break;
    frame_files.push_back(f.string());
  }
  if (frame_files.empty())
    throw ValidationError("missing frames: no frame_00000.png under " + video_dir);
  const int n_frames = int(frame_files.size());

  std::vector<FrameImage> frames;

  frames.resize(size_t(n_frames));
  clock.run("load", [&] {
    parallel_for(n_frames, cfg.jobs, [&](int t) {
      frames[size_t(t)] = load_frame(frame_files[size_t(t)]);
      require_valid(frames[size_t(t)], frame_files[size_t(t)]);
    });
  });
  const int w = frames.front().width, h = frames.front().height;
  for (const FrameImage& f : frames)
    if (f.width != w || f.height != h)
      throw ValidationError("frame dimensions are not constant");

  // Flow: provided .flo files win over the built-in estimator.
  std::vector<FlowPair> flows;
  flows.resize(size_t(std::max(0, n_frames - 1)));
  clock.run("flow", [&] {
    parallel_for(n_frames - 1, cfg.jobs, [&](int t) {
      const fs::path fwd = in / indexed("flow_fwd_%05d.flo", t);
      const fs::path bwd = in / indexed("flow_bwd_%05d.flo", t);
      FlowPair& pair = flows[size_t(t)];
      pair.forward = fs::exists(fwd)
                         ? load_flow(fwd.string())
                         : estimate_flow(frames[size_t(t)], frames[size_t(t + 1)],
                                         cfg.flow_levels, cfg.flow_iters);
      pair.backward = fs::exists(bwd)
                          ? load_flow(bwd.string())
                          : estimate_flow(frames[size_t(t + 1)], frames[size_t(t)],
                                          cfg.flow_levels, cfg.flow_iters);
      pair.backward.direction = FlowDirection::Backward;
      if (pair.forward.width != w || pair.forward.height != h ||
          pair.backward.width != w || pair.backward.height != h)
        throw ValidationError("flow dimensions do not match frames");
      save_flow(pair.forward, (out / indexed("flow_fwd_%05d.flo", t)).string());
      save_flow(pair.backward, (out / indexed("flow_bwd_%05d.flo", t)).string());
    });
  });

  const bool need_flow_maps =
      cfg.use_flow || cfg.use_flow_spb || cfg.use_flow_proposals;
  if ((need_flow_maps || cfg.use_temporal) && n_frames < 2)
    throw ValidationError("flow-based cues need at least 2 frames");

  // Local detector cue (or external override).
  std::vector<BoundaryMap> se;
  clock.run("detect", [&] {
    se = frame_stage(n_frames, cfg.jobs, out, "se_%05d.pfm", cfg.resume, [&](int t) {
      for (const char* pattern : {"ext_boundary_%05d.pfm", "ext_boundary_%05d.png"}) {
        const fs::path ext = in / indexed(pattern, t);
        if (fs::exists(ext)) return load_boundary_map(ext.string());
      }
      return detect_boundaries(frames[size_t(t)], cfg.detector);
    });
  });

  std::vector<BoundaryMap> se_flow;
  if (need_flow_maps) {
    clock.run("flow_detect", [&] {
      se_flow =
          frame_stage(n_frames, cfg.jobs, out, "sef_%05d.pfm", cfg.resume, [&](int t) {
            for (const char* pattern :
                 {"ext_flow_boundary_%05d.pfm", "ext_flow_boundary_%05d.png"}) {
              const fs::path ext = in / indexed(pattern, t);
              if (fs::exists(ext)) return load_boundary_map(ext.string());
            }
            // Last frame falls back to the backward field of the final pair.
            const FlowField& field = (t < n_frames - 1) ? flows[size_t(t)].forward
                                                        : flows[size_t(t - 1)].backward;
            return detect_flow_boundaries(field, cfg.detector);
          });
    });
  }

  std::vector<BoundaryMap> spb;
  if (cfg.use_spb) {
    clock.run("spb", [&] {
      spb = frame_stage(n_frames, cfg.jobs, out, "spb_%05d.pfm", cfg.resume,
                        [&](int t) { return spectral_boundaries(se[size_t(t)], cfg.spectral); });
    });
  }
  std::vector<BoundaryMap> spb_flow;
  if (cfg.use_flow_spb) {
    clock.run("flow_spb", [&] {
      spb_flow = frame_stage(n_frames, cfg.jobs, out, "spbf_%05d.pfm", cfg.resume,
                             [&](int t) {
                               return spectral_boundaries(se_flow[size_t(t)], cfg.spectral);
                             });
    });
  }

  auto proposal_cue = [&](const std::vector<BoundaryMap>& source, int t) {
    std::vector<LabelMap> pages;
    char buf[256];
    for (int page = 0;; ++page) {
      std::snprintf(buf, sizeof buf, "ext_proposals_%05d_p%03d.png", t, page);
      const fs::path f = in / buf;
      if (!fs::exists(f)) break;
      pages.push_back(load_label_map(f.string()));
    }
    if (!pages.empty()) return average_contours(proposals_from_label_maps(pages));
    const BoundaryMap& map = source[size_t(t)];
    const Ucm ucm = build_ucm(map, watershed_oversegment(map));
    return average_contours(generate_proposals(ucm, cfg.proposal_thresholds,
                                               cfg.proposal_seeds, cfg.proposal_depth));
  };

  std::vector<BoundaryMap> op;
  if (cfg.use_proposals) {
    clock.run("proposals", [&] {
      op = frame_stage(n_frames, cfg.jobs, out, "op_%05d.pfm", cfg.resume,
                       [&](int t) { return proposal_cue(se, t); });
    });
  }
  std::vector<BoundaryMap> op_flow;
  if (cfg.use_flow_proposals) {
    clock.run("flow_proposals", [&] {
      op_flow = frame_stage(n_frames, cfg.jobs, out, "opf_%05d.pfm", cfg.resume,
                            [&](int t) { return proposal_cue(se_flow, t); });
    });
  }

  std::vector<BoundaryMap> ts;
  if (cfg.use_temporal) {
    clock.run("smooth", [&] {
      const SmoothingConfig smooth_cfg{cfg.temporal_window, {}};
      ts = temporal_smooth(se, flows, smooth_cfg,
                           [](const std::vector<WeightedCue>& cues) {
                             return merge_cues(cues);
                           });
      for (int t = 0; t < n_frames; ++t)
        save_boundary_map(ts[size_t(t)], (out / indexed("ts_%05d.pfm", t)).string());
    });
  }

  std::vector<BoundaryMap> merged;

  merged.resize(size_t(n_frames));
  clock.run("merge", [&] {
    parallel_for(n_frames, cfg.jobs, [&](int t) {
      std::vector<WeightedCue> cues;
      if (cfg.use_detector) cues.push_back({se[size_t(t)], cfg.weight_detector});
      if (cfg.use_spb) cues.push_back({spb[size_t(t)], cfg.weight_spb});
      if (cfg.use_proposals) cues.push_back({op[size_t(t)], cfg.weight_proposals});
      if (cfg.use_flow) cues.push_back({se_flow[size_t(t)], cfg.weight_flow});
      if (cfg.use_flow_spb) cues.push_back({spb_flow[size_t(t)], cfg.weight_flow_spb});
      if (cfg.use_flow_proposals)
        cues.push_back({op_flow[size_t(t)], cfg.weight_flow_proposals});
      if (cfg.use_temporal) cues.push_back({ts[size_t(t)], cfg.weight_temporal});
      merged[size_t(t)] = merge_cues(cues);
      save_boundary_map(merged[size_t(t)],
                        (out / indexed("boundary_%05d.pfm", t)).string());
    });
  });

  std::vector<Ucm> hierarchies;

  hierarchies.resize(size_t(n_frames));
  clock.run("ucm", [&] {
    parallel_for(n_frames, cfg.jobs, [&](int t) {
      const BoundaryMap& map = merged[size_t(t)];
      hierarchies[size_t(t)] = build_ucm(map, watershed_oversegment(map));
      save_boundary_map(ucm_to_boundary_map(hierarchies[size_t(t)]),
                        (out / indexed("ucm_%05d.pfm", t)).string());
      save_label_map(hierarchies[size_t(t)].base,
                     (out / indexed("ucm_%05d_base.png", t)).string());
      save_ucm_tree(hierarchies[size_t(t)], (out / indexed("ucm_%05d.tree", t)).string());
    });
  });

  std::vector<LabelMap> superpixels;

  superpixels.resize(size_t(n_frames));
  clock.run("spx", [&] {
    parallel_for(n_frames, cfg.jobs, [&](int t) {
      superpixels[size_t(t)] =
          cfg.spx_target_count > 0
              ? extract_superpixels_count(hierarchies[size_t(t)], cfg.spx_target_count)
              : extract_superpixels(hierarchies[size_t(t)], cfg.spx_threshold);
      save_label_map(superpixels[size_t(t)], (out / indexed("spx_%05d.png", t)).string());
    });
  });

  VideoSegmentation video;
  clock.run("propagate", [&] {
    std::vector<FlowField> forward;
    forward.reserve(flows.size());
    for (const FlowPair& p : flows) forward.push_back(p.forward);
    video = propagate_segmentation(superpixels, forward, cfg.propagation);
    for (int t = 0; t < n_frames; ++t)
      save_label_map(video.frames[size_t(t)],
                     (out / indexed("videoseg_%05d.png", t)).string());
  });

  // Evaluation only when annotations are shipped with the video.
  PipelineResult result;
  result.n_frames = n_frames;
  bool have_gt = fs::exists(in / indexed("gt_%05d.png", 0));
  if (have_gt) {
    clock.run("eval", [&] {
      GroundTruth gt;
      gt.annotators.resize(1);
      for (int t = 0; t < n_frames; ++t) {
        const fs::path f = in / indexed("gt_%05d.png", t);
        if (!fs::exists(f))
          throw ValidationError("missing gt frame " + f.string());
        gt.annotators[0].frames.push_back(load_label_map(f.string()));
      }
      const double tol = cfg.eval_tolerance > 0.0 ? cfg.eval_tolerance
                                                  : default_boundary_tolerance(w, h);
      result.bpr = boundary_pr(merged, gt, cfg.eval_thresholds, tol);
      write_pr_csv(*result.bpr, (out / "eval_bpr.csv").string());

      std::vector<VideoSegmentation> granularities;
      std::vector<FlowField> forward;
      for (const FlowPair& p : flows) forward.push_back(p.forward);
      for (double g : cfg.eval_granularities) {
        std::vector<LabelMap> level;
        level.resize(size_t(n_frames));
        parallel_for(n_frames, cfg.jobs, [&](int t) {
          level[size_t(t)] = extract_superpixels(hierarchies[size_t(t)], g);
        });
        granularities.push_back(propagate_segmentation(level, forward, cfg.propagation));
      }
      result.vpr = volume_pr(granularities, gt, cfg.eval_granularities);
      write_pr_csv(*result.vpr, (out / "eval_vpr.csv").string());

      const auto spx_table =
          superpixel_curves(hierarchies, gt, tol, cfg.eval_spx_counts);
      write_superpixel_csv(spx_table, (out / "eval_spx.csv").string());

      double use_sum = 0.0;
      for (int t = 0; t < n_frames; ++t)
        use_sum +=
            undersegmentation_error(superpixels[size_t(t)], gt.annotators[0].frames[size_t(t)]);
      result.mean_use = use_sum / n_frames;

      std::ostringstream summary;
      summary.precision(6);
      summary << "BPR ODS " << result.bpr->ods << " (scale " << result.bpr->ods_scale
              << ")\n";
      summary << "BPR OSS " << result.bpr->oss << "\n";
      summary << "BPR AP " << result.bpr->ap << "\n";
      summary << "VPR ODS " << result.vpr->ods << " (scale " << result.vpr->ods_scale
              << ")\n";
      summary << "VPR OSS " << result.vpr->oss << "\n";
      summary << "VPR AP " << result.vpr->ap << "\n";
      summary << "USE " << *result.mean_use << "\n";
      write_text_file((out / "eval_summary.txt").string(), summary.str());

      if (cfg.emit_svg) {
        write_pr_svg({{"bpr", *result.bpr}, {"vpr", *result.vpr}},
                     (out / "pr_curves.svg").string());
      }
    });
  }

  // Manifest: config hash, input hashes, artifact hashes. Fully reproducible
  // runs yield byte-identical manifests; timings go to a separate file.
  clock.run("manifest", [&] {
    std::ostringstream manifest;
    manifest << "manifest 1\n";
    manifest << "config " << hex64(fnv1a64(cfg.canonical_text())) << "\n";
    std::map<std::string, uint64_t> inputs, artifacts;
    for (int t = 0; t < n_frames; ++t)
      inputs[indexed("frame_%05d.png", t)] = hash_file(frame_files[size_t(t)]);
    for (const char* pattern : {"gt_%05d.png", "flow_fwd_%05d.flo", "flow_bwd_%05d.flo"})
      for (int t = 0; t < n_frames; ++t) {
        const fs::path f = in / indexed(pattern, t);
        if (fs::exists(f)) inputs[indexed(pattern, t)] = hash_file(f.string());
      }
    for (const auto& entry : fs::directory_iterator(out)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (name == "manifest.txt" || name == "timings.txt") continue;
      artifacts[name] = hash_file(entry.path().string());
    }
    for (const auto& [name, hash] : inputs)
      manifest << "input " << name << " " << hex64(hash) << "\n";
    for (const auto& [name, hash] : artifacts)
      manifest << "artifact " << name << " " << hex64(hash) << "\n";
    result.manifest_path = (out / "manifest.txt").string();
    write_text_file(result.manifest_path, manifest.str());
  });

  {
    std::ostringstream timings;
    timings.precision(4);
    for (const auto& [name, secs] : clock.timings)
      timings << name << " " << std::fixed << secs << "\n";
    write_text_file((out / "timings.txt").string(), timings.str());
  }
  return result;
}

}  // namespace vidseg
