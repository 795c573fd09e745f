#pragma once

// Separable Gaussian / Gaussian-derivative filtering shared by the local
// detector and the spectral stage. Internal header.

#include <cmath>
#include <vector>

namespace vidseg::grad {

// Sampled Gaussian, taps normalized to sum 1. Radius 3*sigma.
inline std::vector<double> gaussian_taps(double sigma, int* radius_out) {
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> taps;
  taps.resize(size_t(2 * radius + 1));
  double sum = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    const double v = std::exp(-0.5 * double(j) * double(j) / (sigma * sigma));
    taps[size_t(j + radius)] = v;
    sum += v;
  }
  for (double& t : taps) t /= sum;
  *radius_out = radius;
  return taps;
}

// Gaussian derivative, scaled so a unit step edge produces peak response 1.0
// on the two pixels adjacent to the step.
inline std::vector<double> gaussian_deriv_taps(double sigma, int* radius_out) {
  int radius = 0;
  std::vector<double> g = gaussian_taps(sigma, &radius);
  std::vector<double> d(g.size());
  double step_peak = 0.0;
  for (int j = -radius; j <= radius; ++j)
    d[size_t(j + radius)] = -(double(j) / (sigma * sigma)) * g[size_t(j + radius)];
  for (int j = 1; j <= radius; ++j)
    step_peak += (double(j) / (sigma * sigma)) * g[size_t(j + radius)];
  for (double& t : d) t /= step_peak;
  *radius_out = radius;
  return d;
}

inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return (i < n) ? i : period - i;
}

// out(i) = sum_j taps[j+r] * in(i-j), mirrored borders.
inline void convolve_rows(const std::vector<double>& in, int w, int h,
                          const std::vector<double>& taps, int radius,
                          std::vector<double>& out) {
  out.resize(in.size());
  for (int y = 0; y < h; ++y) {
    const double* row = in.data() + size_t(y) * w;
    double* orow = out.data() + size_t(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = -radius; j <= radius; ++j)
        acc += taps[size_t(j + radius)] * row[reflect101(x - j, w)];
      orow[x] = acc;
    }
  }
}

inline void convolve_cols(const std::vector<double>& in, int w, int h,
                          const std::vector<double>& taps, int radius,
                          std::vector<double>& out) {
  out.resize(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = -radius; j <= radius; ++j)
        acc += taps[size_t(j + radius)] * in[size_t(reflect101(y - j, h)) * w + x];
      out[size_t(y) * w + x] = acc;
    }
  }
}

// Odd-kernel variants evaluated as paired differences, so constant input
// yields exactly zero.
inline void convolve_rows_odd(const std::vector<double>& in, int w, int h,
                              const std::vector<double>& taps, int radius,
                              std::vector<double>& out) {
  out.resize(in.size());
  for (int y = 0; y < h; ++y) {
    const double* row = in.data() + size_t(y) * w;
    double* orow = out.data() + size_t(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = 1; j <= radius; ++j)
        acc += taps[size_t(j + radius)] *
               (row[reflect101(x - j, w)] - row[reflect101(x + j, w)]);
      orow[x] = acc;
    }
  }
}

inline void convolve_cols_odd(const std::vector<double>& in, int w, int h,
                              const std::vector<double>& taps, int radius,
                              std::vector<double>& out) {
  out.resize(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = 1; j <= radius; ++j)
        acc += taps[size_t(j + radius)] *
               (in[size_t(reflect101(y - j, h)) * w + x] -
                in[size_t(reflect101(y + j, h)) * w + x]);
      out[size_t(y) * w + x] = acc;
    }
  }
}

// Gradient pair at one scale: gx smoothed along y, gy smoothed along x.
inline void gaussian_gradients(const std::vector<double>& img, int w, int h,
                               double sigma, std::vector<double>& gx,
                               std::vector<double>& gy) {
  int gr = 0, dr = 0;
  const std::vector<double> g = gaussian_taps(sigma, &gr);
  const std::vector<double> d = gaussian_deriv_taps(sigma, &dr);
  std::vector<double> tmp;
  convolve_rows_odd(img, w, h, d, dr, tmp);
  convolve_cols(tmp, w, h, g, gr, gx);
  convolve_cols_odd(img, w, h, d, dr, tmp);
  convolve_rows(tmp, w, h, g, gr, gy);
}

// Max over n evenly spaced orientations in [0,pi) of |cos*gx + sin*gy|.
inline void oriented_max(const std::vector<double>& gx,
                         const std::vector<double>& gy, int n_orientations,
                         std::vector<double>& out) {
  out.assign(gx.size(), 0.0);
  for (int k = 0; k < n_orientations; ++k) {
    const double theta = M_PI * double(k) / double(n_orientations);
    const double c = std::cos(theta), s = std::sin(theta);
    for (size_t i = 0; i < gx.size(); ++i)
      out[i] = std::max(out[i], std::fabs(c * gx[i] + s * gy[i]));
  }
}

}  // namespace vidseg::grad
