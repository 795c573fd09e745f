#include "vidseg/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "vidseg/hashutil.hpp"

namespace vidseg {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

// Raw PNG payload: row-major samples, 8 or 16 bits, 1 or 3 channels.
struct PngImage {
  int width = 0, height = 0, channels = 1, bit_depth = 8;
  std::vector<uint16_t> samples;
};

PngImage read_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unreadable PNG: " + path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  PngImage out;
  out.width = int(png_get_image_width(png, info));
  out.height = int(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported channel count " + std::to_string(channels));
  }
  if (out.bit_depth != 8 && out.bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported bit depth " + std::to_string(out.bit_depth));
  }
  out.channels = channels;

  const size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<uint8_t> raw(row_bytes * size_t(out.height));
  std::vector<png_bytep> rows;
  rows.resize(size_t(out.height));
  for (int y = 0; y < out.height; ++y) rows[size_t(y)] = raw.data() + row_bytes * size_t(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const size_t n = size_t(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (out.bit_depth == 8) {
    for (size_t i = 0; i < n; ++i) out.samples[i] = raw[i];
  } else {
    for (size_t i = 0; i < n; ++i)  // PNG 16-bit is big-endian
      out.samples[i] = uint16_t((raw[2 * i] << 8) | raw[2 * i + 1]);
  }
  return out;
}

void write_png(const PngImage& img, const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path);
  }
  png_init_io(png, file.get());
  const int color = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height),
               img.bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const size_t stride = size_t(img.width) * img.channels;
  std::vector<uint8_t> row(stride * (img.bit_depth == 16 ? 2 : 1));
  for (int y = 0; y < img.height; ++y) {
    const uint16_t* src = img.samples.data() + stride * size_t(y);
    if (img.bit_depth == 8) {
      for (size_t i = 0; i < stride; ++i) row[i] = uint8_t(src[i]);
    } else {
      for (size_t i = 0; i < stride; ++i) {
        row[2 * i] = uint8_t(src[i] >> 8);
        row[2 * i + 1] = uint8_t(src[i] & 0xff);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// PFM grayscale, negative scale = little-endian floats, rows bottom-up.
BoundaryMap load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  if (magic != "Pf") throw IoError(path + ": not a grayscale PFM");
  if (w <= 0 || h <= 0) throw IoError(path + ": bad PFM dimensions");
  in.get();  // single whitespace after the header
  BoundaryMap map{w, h, std::vector<float>(size_t(w) * h)};
  std::vector<float> row(size_t(w), 0.f);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size() * 4));
    if (!in) throw IoError(path + ": truncated PFM payload");
    std::memcpy(map.data.data() + size_t(y) * w, row.data(), row.size() * 4);
  }
  return map;
}

void save_pfm(const BoundaryMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "Pf\n" << map.width << " " << map.height << "\n-1.0\n";
  for (int y = map.height - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(map.data.data() + size_t(y) * map.width),
              std::streamsize(size_t(map.width) * 4));
}

constexpr float kFlowMagic = 202021.25f;

}  // namespace

FrameImage load_frame(const std::string& path) {
  const PngImage png = read_png(path);
  FrameImage img{png.width, png.height, png.channels, {}};
  img.data.resize(png.samples.size());
  const float denom = png.bit_depth == 8 ? 255.f : 65535.f;
  for (size_t i = 0; i < png.samples.size(); ++i)
    img.data[i] = float(png.samples[i]) / denom;
  return img;
}

void save_frame(const FrameImage& img, const std::string& path) {
  PngImage png{img.width, img.height, img.channels, 8, {}};
  png.samples.resize(img.data.size());
  for (size_t i = 0; i < img.data.size(); ++i)
    png.samples[i] = uint16_t(std::lround(double(img.data[i]) * 255.0));
  write_png(png, path);
}

BoundaryMap load_boundary_map(const std::string& path) {
  if (ends_with(path, ".pfm")) return load_pfm(path);
  const PngImage png = read_png(path);
  if (png.channels != 1) throw IoError(path + ": boundary map must be grayscale");
  BoundaryMap map{png.width, png.height, {}};
  map.data.resize(png.samples.size());
  const float denom = png.bit_depth == 8 ? 255.f : 65535.f;
  for (size_t i = 0; i < png.samples.size(); ++i)
    map.data[i] = float(png.samples[i]) / denom;
  return map;
}

void save_boundary_map(const BoundaryMap& map, const std::string& path) {
  if (ends_with(path, ".pfm")) {
    save_pfm(map, path);
    return;
  }
  PngImage png{map.width, map.height, 1, 16, {}};
  png.samples.resize(map.data.size());
  for (size_t i = 0; i < map.data.size(); ++i)
    png.samples[i] = uint16_t(std::lround(double(map.data[i]) * 65535.0));
  write_png(png, path);
}

LabelMap load_label_map(const std::string& path) {
  const PngImage png = read_png(path);
  if (png.channels != 1) throw IoError(path + ": label map must be grayscale");
  LabelMap map{png.width, png.height, {}};
  map.labels.resize(png.samples.size());
  for (size_t i = 0; i < png.samples.size(); ++i)
    map.labels[i] = int32_t(png.samples[i]);
  return map;
}

void save_label_map(const LabelMap& map, const std::string& path) {
  PngImage png{map.width, map.height, 1, 16, {}};
  png.samples.resize(map.labels.size());
  for (size_t i = 0; i < map.labels.size(); ++i) {
    if (map.labels[i] < 0 || map.labels[i] > 65535)
      throw IoError(path + ": label out of 16-bit range");
    png.samples[i] = uint16_t(map.labels[i]);
  }
  write_png(png, path);
}

FlowField load_flow(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  float magic = 0.f;
  int32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  if (!in || magic != kFlowMagic) throw IoError(path + ": bad magic");
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || w <= 0 || h <= 0) throw IoError(path + ": bad dimensions");
  FlowField flow = FlowField::zeros(w, h);
  std::vector<float> inter(size_t(w) * h * 2);
  in.read(reinterpret_cast<char*>(inter.data()), std::streamsize(inter.size() * 4));
  if (!in) throw IoError(path + ": truncated payload");
  for (size_t i = 0; i < size_t(w) * h; ++i) {
    flow.u[i] = inter[2 * i];
    flow.v[i] = inter[2 * i + 1];
  }
  return flow;
}

void save_flow(const FlowField& flow, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const float magic = kFlowMagic;
  const int32_t w = flow.width, h = flow.height;
  out.write(reinterpret_cast<const char*>(&magic), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  std::vector<float> inter(size_t(w) * h * 2);
  for (size_t i = 0; i < size_t(w) * h; ++i) {
    inter[2 * i] = flow.u[i];
    inter[2 * i + 1] = flow.v[i];
  }
  out.write(reinterpret_cast<const char*>(inter.data()), std::streamsize(inter.size() * 4));
}

void save_ucm_tree(const Ucm& u, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  out << "ucm-tree 1\n";
  out << "regions " << u.num_base_regions() << "\n";
  out << "merges " << u.merge_tree.size() << "\n";
  for (const MergeEvent& ev : u.merge_tree)
    out << ev.region_a << " " << ev.region_b << " " << ev.merged_id << " "
        << ev.strength << "\n";
  out << "arcs " << u.arc_strength.size() << "\n";
  for (const auto& [key, strength] : u.arc_strength)
    out << key.first << " " << key.second << " " << strength << "\n";
  write_text_file(path, out.str());
}

Ucm load_ucm(const std::string& tree_path, const std::string& base_path) {
  std::istringstream in(read_text_file(tree_path));
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "ucm-tree" || version != 1)
    throw IoError(tree_path + ": not a ucm-tree file");
  Ucm u;
  u.base = load_label_map(base_path);
  size_t n_regions = 0, n_merges = 0, n_arcs = 0;
  in >> tag >> n_regions;
  if (tag != "regions") throw IoError(tree_path + ": missing regions header");
  in >> tag >> n_merges;
  if (tag != "merges") throw IoError(tree_path + ": missing merges header");
  u.merge_tree.resize(n_merges);
  for (MergeEvent& ev : u.merge_tree)
    in >> ev.region_a >> ev.region_b >> ev.merged_id >> ev.strength;
  in >> tag >> n_arcs;
  if (tag != "arcs") throw IoError(tree_path + ": missing arcs header");
  u.arc_strength.resize(n_arcs);
  for (auto& [key, strength] : u.arc_strength)
    in >> key.first >> key.second >> strength;
  if (!in) throw IoError(tree_path + ": truncated tree");
  if (size_t(num_labels(u.base)) != n_regions)
    throw IoError(tree_path + ": base region count mismatch");
  return u;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  return parse_text(read_text_file(path));
}

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw IoError("config line " + std::to_string(line_no) + ": empty key");
    cfg.values[key] = value;
  }
  return cfg;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw IoError("config key '" + key + "': not a number: " + it->second);
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw IoError("config key '" + key + "': not an integer: " + it->second);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string& v = it->second;
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw IoError("config key '" + key + "': not a boolean: " + v);
}

std::vector<double> KeyValueConfig::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<double> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw IoError("config key '" + key + "': bad list entry: " + item);
    }
  }
  if (out.empty()) throw IoError("config key '" + key + "': empty list");
  return out;
}

void write_pr_csv(const PrCurve& curve, const std::string& path) {
  std::ostringstream out;
  out.precision(10);
  out << "scale,precision,recall,f_measure\n";
  for (const PrSample& s : curve.samples)
    out << s.scale << "," << s.precision << "," << s.recall << "," << s.f_measure << "\n";
  write_text_file(path, out.str());
}

void write_superpixel_csv(const std::vector<SuperpixelCurvePoint>& table,
                          const std::string& path) {
  std::ostringstream out;
  out.precision(10);
  out << "target_count,avg_superpixels,boundary_recall,boundary_precision,"
         "undersegmentation_error\n";
  for (const SuperpixelCurvePoint& p : table)
    out << p.target_count << "," << p.avg_superpixels << "," << p.boundary_recall
        << "," << p.boundary_precision << "," << p.undersegmentation << "\n";
  write_text_file(path, out.str());
}

void write_pr_svg(const std::vector<std::pair<std::string, PrCurve>>& curves,
                  const std::string& path) {
  const int size = 480, margin = 50;
  const double span = size - 2.0 * margin;
  auto sx = [&](double r) { return margin + r * span; };
  auto sy = [&](double p) { return size - margin - p * span; };
  static const char* palette[] = {"#c02020", "#2040c0", "#208040", "#806000",
                                  "#602080", "#207080"};
  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << size << "' height='"
      << size << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<rect x='" << margin << "' y='" << margin << "' width='" << span
      << "' height='" << span << "' fill='none' stroke='black'/>\n";
  out << "<text x='" << size / 2 << "' y='" << size - 12
      << "' text-anchor='middle'>recall</text>\n";
  out << "<text x='14' y='" << size / 2 << "' text-anchor='middle' transform='rotate(-90 14 "
      << size / 2 << ")'>precision</text>\n";
  int color = 0;
  for (const auto& [name, curve] : curves) {
    std::vector<std::pair<double, double>> pts;
    for (const PrSample& s : curve.samples) pts.push_back({s.recall, s.precision});
    std::sort(pts.begin(), pts.end());
    out << "<polyline fill='none' stroke='" << palette[color % 6] << "' points='";
    for (const auto& [r, p] : pts) out << sx(r) << "," << sy(p) << " ";
    out << "'/>\n";
    out << "<text x='" << margin + 6 << "' y='" << margin + 16 + 14 * color
        << "' fill='" << palette[color % 6] << "'>" << name << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

uint64_t hash_file(const std::string& path) { return fnv1a64(read_text_file(path)); }

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
  return buf;
}

namespace entropy {
namespace {
bool g_used = false;
}
bool any_used() { return g_used; }
void note_used() { g_used = true; }
}  // namespace entropy

}  // namespace vidseg
