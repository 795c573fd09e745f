#include "vidseg/detect.hpp"

#include <algorithm>
#include <cmath>

#include "gradients.hpp"

namespace vidseg {

namespace {

void check_config(const DetectorConfig& cfg) {
  if (cfg.scales.empty()) throw ValidationError("detector: no scales");
  for (double s : cfg.scales)
    if (!(s > 0.0)) throw ValidationError("detector: sigma must be > 0");
  if (cfg.n_orientations < 4)
    throw ValidationError("detector: need at least 4 orientations");
}

double sample_bilinear_zero(const std::vector<double>& img, int w, int h,
                            double x, double y) {
  if (x < 0.0 || y < 0.0 || x > double(w - 1) || y > double(h - 1)) return 0.0;
  const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = img[size_t(y0) * w + x0] +
                     fx * (img[size_t(y0) * w + x1] - img[size_t(y0) * w + x0]);
  const double bot = img[size_t(y1) * w + x0] +
                     fx * (img[size_t(y1) * w + x1] - img[size_t(y1) * w + x0]);
  return top + fy * (bot - top);
}

BoundaryMap detect_gray(const std::vector<double>& gray, int w, int h,
                        const DetectorConfig& cfg) {
  std::vector<double> response(gray.size(), 0.0);
  std::vector<double> best_gx(gray.size(), 0.0), best_gy(gray.size(), 0.0);
  std::vector<double> gx, gy, oriented;
  for (double sigma : cfg.scales) {
    grad::gaussian_gradients(gray, w, h, sigma, gx, gy);
    grad::oriented_max(gx, gy, cfg.n_orientations, oriented);
    for (size_t i = 0; i < oriented.size(); ++i) {
      if (oriented[i] > response[i]) {
        response[i] = oriented[i];
        best_gx[i] = gx[i];
        best_gy[i] = gy[i];
      }
    }
  }

  if (cfg.nonmax_suppress) {
    std::vector<double> thinned(response.size(), 0.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const size_t i = size_t(y) * w + x;
        const double v = response[i];
        if (v <= 0.0) continue;
        const double len = std::hypot(best_gx[i], best_gy[i]);
        if (len <= 0.0) {
          thinned[i] = v;
          continue;
        }
        const double dx = best_gx[i] / len, dy = best_gy[i] / len;
        const double fwd = sample_bilinear_zero(response, w, h, x + dx, y + dy);
        const double bwd = sample_bilinear_zero(response, w, h, x - dx, y - dy);
        // Tolerance keeps exact plateau ties stable under roundoff.
        if (v >= fwd - 1e-9 && v >= bwd - 1e-9) thinned[i] = v;
      }
    }
    response.swap(thinned);
  }

  BoundaryMap out{w, h, std::vector<float>(response.size())};
  for (size_t i = 0; i < response.size(); ++i)
    out.data[i] = float(std::clamp(response[i], 0.0, 1.0));
  return out;
}

}  // namespace

BoundaryMap detect_boundaries(const FrameImage& img, const DetectorConfig& cfg) {
  if (img.width <= 0 || img.height <= 0 || img.data.empty())
    throw ValidationError("detect_boundaries: empty image");
  require_valid(img, "detect_boundaries input");
  check_config(cfg);
  return detect_gray(grayscale(img), img.width, img.height, cfg);
}

BoundaryMap detect_flow_boundaries(const FlowField& flow, const DetectorConfig& cfg) {
  require_valid(flow, "detect_flow_boundaries input");
  check_config(cfg);
  const size_t n = size_t(flow.width) * flow.height;
  std::vector<double> magnitude(n);
  for (size_t i = 0; i < n; ++i) {
    const double u = flow.u[i], v = flow.v[i];
    magnitude[i] = std::sqrt(u * u + v * v);
  }
  // Nearest-rank 99th percentile keeps the normalization robust to a few
  // fast outlier pixels.
  std::vector<double> sorted(magnitude);
  std::sort(sorted.begin(), sorted.end());
  const size_t rank = std::min(n - 1, size_t(std::ceil(0.99 * double(n))) - 1);
  const double p99 = sorted[rank];
  if (p99 <= 0.0) return BoundaryMap::zeros(flow.width, flow.height);
  for (double& m : magnitude) m = std::min(m / p99, 1.0);
  return detect_gray(magnitude, flow.width, flow.height, cfg);
}

}  // namespace vidseg
