#include <doctest.h>
#include <unistd.h>

#include <filesystem>

#include "helpers.hpp"
#include "vidseg/io.hpp"
#include "vidseg/pipeline.hpp"

using namespace vidseg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("vidseg_pipe_" + tag + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_video(const fs::path& dir, int frames, int w, int h) {
  const auto video = testutil::moving_square_video(w, h, frames, 12, 4, 8);
  char buf[64];
  for (int t = 0; t < frames; ++t) {
    std::snprintf(buf, sizeof buf, "frame_%05d.png", t);
    save_frame(video.frames[size_t(t)], (dir / buf).string());
    std::snprintf(buf, sizeof buf, "gt_%05d.png", t);
    save_label_map(video.gt[size_t(t)], (dir / buf).string());
  }
  for (int t = 0; t + 1 < frames; ++t) {
    std::snprintf(buf, sizeof buf, "flow_fwd_%05d.flo", t);
    save_flow(video.forward[size_t(t)], (dir / buf).string());
    std::snprintf(buf, sizeof buf, "flow_bwd_%05d.flo", t);
    save_flow(video.backward[size_t(t)], (dir / buf).string());
  }
}

PipelineConfig quick_config() {
  PipelineConfig cfg;
  cfg.use_spb = false;  // keep the unit run fast; the acceptance suite
  cfg.use_proposals = false;  // exercises the full recipe
  cfg.use_temporal = false;
  cfg.eval_thresholds = 7;
  cfg.eval_granularities = {0.2, 0.5, 0.8};
  cfg.eval_spx_counts = {2, 8};
  return cfg;
}

}  // namespace

TEST_CASE("config with zero cues is rejected") {
  PipelineConfig cfg;
  cfg.use_detector = cfg.use_spb = cfg.use_proposals = false;
  cfg.use_flow = cfg.use_flow_spb = cfg.use_flow_proposals = false;
  cfg.use_temporal = false;
  CHECK_THROWS_WITH_AS(run_pipeline(cfg, "/tmp/none", "/tmp/none_out"),
                       doctest::Contains("empty cue list"), ValidationError);
}

TEST_CASE("missing frames are reported") {
  TempDir in("empty_video");
  PipelineConfig cfg = quick_config();
  CHECK_THROWS_WITH_AS(run_pipeline(cfg, in.path.string(), (in.path / "out").string()),
                       doctest::Contains("missing frames"), ValidationError);
}

TEST_CASE("small pipeline run produces artifacts and metrics") {
  TempDir in("video");
  write_video(in.path, 3, 48, 48);
  TempDir out("artifacts");
  const PipelineResult result =
      run_pipeline(quick_config(), in.path.string(), out.path.string());
  CHECK(result.n_frames == 3);
  REQUIRE(result.bpr.has_value());
  REQUIRE(result.vpr.has_value());
  CHECK(result.bpr->ods > 0.5);
  CHECK(result.vpr->ods > 0.5);
  for (const char* name :
       {"se_00000.pfm", "sef_00000.pfm", "boundary_00002.pfm", "ucm_00001.tree",
        "ucm_00001_base.png", "spx_00000.png", "videoseg_00002.png", "eval_bpr.csv",
        "eval_vpr.csv", "eval_spx.csv", "eval_summary.txt", "manifest.txt",
        "timings.txt"}) {
    CAPTURE(name);
    CHECK(fs::exists(out.path / name));
  }
}

TEST_CASE("pipeline reruns are bit-identical") {
  TempDir in("video_det");
  write_video(in.path, 2, 40, 40);
  TempDir out_a("a");
  TempDir out_b("b");
  const PipelineConfig cfg = quick_config();
  run_pipeline(cfg, in.path.string(), out_a.path.string());
  run_pipeline(cfg, in.path.string(), out_b.path.string());
  CHECK(read_text_file((out_a.path / "manifest.txt").string()) ==
        read_text_file((out_b.path / "manifest.txt").string()));
}

TEST_CASE("jobs > 1 matches the single-threaded result") {
  TempDir in("video_jobs");
  write_video(in.path, 3, 40, 40);
  TempDir out_a("serial");
  TempDir out_b("parallel");
  PipelineConfig cfg = quick_config();
  cfg.jobs = 1;
  run_pipeline(cfg, in.path.string(), out_a.path.string());
  cfg.jobs = 4;
  run_pipeline(cfg, in.path.string(), out_b.path.string());
  CHECK(read_text_file((out_a.path / "manifest.txt").string()) ==
        read_text_file((out_b.path / "manifest.txt").string()));
}

TEST_CASE("external boundary overrides replace the detector") {
  TempDir in("video_ext");
  write_video(in.path, 2, 32, 32);
  // Hand the pipeline constant override maps; the se_ artifacts must equal them.
  char buf[64];
  BoundaryMap override_map = BoundaryMap::zeros(32, 32);
  for (int y = 0; y < 32; ++y) override_map.at(16, y) = 0.75f;
  for (int t = 0; t < 2; ++t) {
    std::snprintf(buf, sizeof buf, "ext_boundary_%05d.pfm", t);
    save_boundary_map(override_map, (in.path / buf).string());
  }
  TempDir out("ext_out");
  run_pipeline(quick_config(), in.path.string(), out.path.string());
  const BoundaryMap se = load_boundary_map((out.path / "se_00000.pfm").string());
  CHECK(se.data == override_map.data);
}

TEST_CASE("resume reuses stage artifacts on disk") {
  TempDir in("video_resume");
  write_video(in.path, 2, 32, 32);
  TempDir out("resume_out");
  PipelineConfig cfg = quick_config();
  run_pipeline(cfg, in.path.string(), out.path.string());
  const std::string manifest = read_text_file((out.path / "manifest.txt").string());
  // Replace a detector artifact; the resumed run must consume it as-is.
  BoundaryMap planted = BoundaryMap::zeros(32, 32);
  for (int y = 0; y < 32; ++y) planted.at(10, y) = 0.9f;
  save_boundary_map(planted, (out.path / "se_00000.pfm").string());
  cfg.resume = true;
  run_pipeline(cfg, in.path.string(), out.path.string());
  const BoundaryMap kept = load_boundary_map((out.path / "se_00000.pfm").string());
  CHECK(kept.data == planted.data);
  CHECK(read_text_file((out.path / "manifest.txt").string()) != manifest);
}

TEST_CASE("svg plot emission is optional") {
  TempDir in("video_svg");
  write_video(in.path, 2, 32, 32);
  TempDir out("svg_out");
  PipelineConfig cfg = quick_config();
  cfg.emit_svg = true;
  run_pipeline(cfg, in.path.string(), out.path.string());
  const std::string svg = read_text_file((out.path / "pr_curves.svg").string());
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("pipeline config text round-trips through the parser") {
  const PipelineConfig defaults;
  const KeyValueConfig kv = KeyValueConfig::parse_text(defaults.canonical_text());
  const PipelineConfig parsed = PipelineConfig::from_config(kv);
  CHECK(parsed.canonical_text() == defaults.canonical_text());
}
