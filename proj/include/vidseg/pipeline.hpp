#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vidseg/detect.hpp"
#include "vidseg/eval.hpp"
#include "vidseg/globalize.hpp"
#include "vidseg/io.hpp"
#include "vidseg/raster.hpp"
#include "vidseg/videoseg.hpp"

namespace vidseg {

struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full recipe for one video: which cues to compute, their merge weights, and
// the downstream superpixel / propagation / evaluation settings.
struct PipelineConfig {
  DetectorConfig detector;
  SpectralConfig spectral;
  PropagationConfig propagation;

  bool use_detector = true;
  bool use_spb = true;
  bool use_proposals = true;
  bool use_flow = true;
  bool use_flow_spb = false;
  bool use_flow_proposals = false;
  bool use_temporal = true;
  double weight_detector = 1.0, weight_spb = 1.0, weight_proposals = 1.0;
  double weight_flow = 1.0, weight_flow_spb = 1.0, weight_flow_proposals = 1.0;
  double weight_temporal = 1.0;
  int temporal_window = 1;

  int proposal_thresholds = 10, proposal_seeds = 8, proposal_depth = 10;
  int flow_levels = 4, flow_iters = 8;

  double spx_threshold = 0.3;
  int spx_target_count = 0;  // > 0 overrides the threshold

  int eval_thresholds = 25;
  double eval_tolerance = 0.0;  // 0 -> 0.0075 * diagonal
  std::vector<double> eval_granularities{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> eval_spx_counts{2, 4, 8, 16, 32, 64};

  int jobs = 1;
  bool emit_svg = false;
  bool resume = false;  // reuse stage artifacts already present in out/

  static PipelineConfig from_config(const KeyValueConfig& kv);
  // Every effective value, one key=value per line, sorted; hashing this pins
  // the run in the manifest.
  std::string canonical_text() const;
};

struct PipelineResult {
  int n_frames = 0;
  std::optional<PrCurve> bpr;
  std::optional<PrCurve> vpr;
  std::optional<double> mean_use;
  std::string manifest_path;
};

// Runs every stage over frames named frame_%05d.png in video_dir, writing
// artifacts (cue maps, hierarchies, superpixels, propagated labels, eval
// CSVs, manifest) into out_dir. Optional inputs: flow_fwd_%05d.flo,
// flow_bwd_%05d.flo, gt_%05d.png, ext_boundary_%05d.(png|pfm),
// ext_flow_boundary_%05d.(png|pfm), ext_proposals_%05d_p%03d.png.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& video_dir,
                            const std::string& out_dir);

}  // namespace vidseg
