#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vidseg/eval.hpp"
#include "vidseg/hierarchy.hpp"
#include "vidseg/raster.hpp"

namespace vidseg {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// PNG (8/16-bit gray or RGB), values divided by 255 or 65535.
FrameImage load_frame(const std::string& path);
// 8-bit PNG, values rounded to v*255.
void save_frame(const FrameImage& img, const std::string& path);

// Boundary maps travel as 16-bit gray PNG (quantized) or PFM (bit-exact);
// picked by extension.
BoundaryMap load_boundary_map(const std::string& path);
void save_boundary_map(const BoundaryMap& map, const std::string& path);

// Label maps as 16-bit gray PNG holding raw label values.
LabelMap load_label_map(const std::string& path);
void save_label_map(const LabelMap& map, const std::string& path);

// Middlebury .flo: float magic 202021.25 ("PIEH"), int32 width/height,
// interleaved float32 (u,v), all little-endian. Bit-exact round-trip.
FlowField load_flow(const std::string& path);
void save_flow(const FlowField& flow, const std::string& path);

// Merge tree + base-arc strengths as text; the base partition is stored
// separately as a label map.
void save_ucm_tree(const Ucm& u, const std::string& path);
Ucm load_ucm(const std::string& tree_path, const std::string& base_path);

// Flat key=value configuration files ('#' comments).
struct KeyValueConfig {
  std::map<std::string, std::string> values;

  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_text(const std::string& text);

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
};

void write_pr_csv(const PrCurve& curve, const std::string& path);
void write_superpixel_csv(const std::vector<SuperpixelCurvePoint>& table,
                          const std::string& path);
// Cosmetic PR plot; the CSV is the contract.
void write_pr_svg(const std::vector<std::pair<std::string, PrCurve>>& curves,
                  const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
uint64_t hash_file(const std::string& path);

}  // namespace vidseg
