#include "vidseg/flowtools.hpp"

#include <algorithm>
#include <cmath>

#include "gradients.hpp"

namespace vidseg {

namespace {

struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
  double at(int x, int y) const { return v[size_t(y) * w + x]; }
};

double sample_clamped(const Plane& p, double x, double y) {
  x = std::clamp(x, 0.0, double(p.w - 1));
  y = std::clamp(y, 0.0, double(p.h - 1));
  const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
  const int x1 = std::min(x0 + 1, p.w - 1), y1 = std::min(y0 + 1, p.h - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = p.at(x0, y0) + fx * (p.at(x1, y0) - p.at(x0, y0));
  const double bot = p.at(x0, y1) + fx * (p.at(x1, y1) - p.at(x0, y1));
  return top + fy * (bot - top);
}

Plane blur_decimate(const Plane& p) {
  int gr = 0;
  const std::vector<double> taps = grad::gaussian_taps(1.0, &gr);
  std::vector<double> tmp, smooth;
  grad::convolve_rows(p.v, p.w, p.h, taps, gr, tmp);
  grad::convolve_cols(tmp, p.w, p.h, taps, gr, smooth);
  Plane out{(p.w + 1) / 2, (p.h + 1) / 2, {}};
  out.v.resize(size_t(out.w) * out.h);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.v[size_t(y) * out.w + x] = smooth[size_t(std::min(2 * y, p.h - 1)) * p.w +
                                            std::min(2 * x, p.w - 1)];
  return out;
}

Plane upsample_to(const Plane& p, int w, int h, double gain) {
  Plane out{w, h, std::vector<double>(size_t(w) * h)};
  const double fx = double(p.w) / w, fy = double(p.h) / h;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.v[size_t(y) * w + x] =
          gain * sample_clamped(p, (x + 0.5) * fx - 0.5, (y + 0.5) * fy - 0.5);
  return out;
}

void central_gradients(const Plane& p, Plane& gx, Plane& gy) {
  gx = Plane{p.w, p.h, std::vector<double>(p.v.size())};
  gy = Plane{p.w, p.h, std::vector<double>(p.v.size())};
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < p.w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, p.w - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, p.h - 1);
      gx.v[size_t(y) * p.w + x] = 0.5 * (p.at(xp, y) - p.at(xm, y));
      gy.v[size_t(y) * p.w + x] = 0.5 * (p.at(x, yp) - p.at(x, ym));
    }
}

}  // namespace

FlowField estimate_flow(const FrameImage& a, const FrameImage& b, int levels,
                        int iters) {
  require_valid(a, "estimate_flow frame a");
  require_valid(b, "estimate_flow frame b");
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw ValidationError("estimate_flow: dimension mismatch");
  levels = std::max(1, levels);
  iters = std::max(1, iters);

  std::vector<Plane> pyr_a, pyr_b;
  pyr_a.push_back({a.width, a.height, grayscale(a)});
  pyr_b.push_back({b.width, b.height, grayscale(b)});
  while (int(pyr_a.size()) < levels && pyr_a.back().w >= 16 && pyr_a.back().h >= 16) {
    pyr_a.push_back(blur_decimate(pyr_a.back()));
    pyr_b.push_back(blur_decimate(pyr_b.back()));
  }

  const double alpha2 = 0.05 * 0.05;
  const int inner_sweeps = 20;

  Plane u{pyr_a.back().w, pyr_a.back().h,
          std::vector<double>(size_t(pyr_a.back().w) * pyr_a.back().h, 0.0)};
  Plane v = u;

  for (int level = int(pyr_a.size()) - 1; level >= 0; --level) {
    const Plane& ia = pyr_a[size_t(level)];
    const Plane& ib = pyr_b[size_t(level)];
    if (u.w != ia.w || u.h != ia.h) {
      const double gain = double(ia.w) / u.w;
      u = upsample_to(u, ia.w, ia.h, gain);
      v = upsample_to(v, ia.w, ia.h, gain);
    }

    Plane warped{ia.w, ia.h, std::vector<double>(ia.v.size())};
    Plane gx, gy, gxw, gyw;
    std::vector<double> cterm(ia.v.size());
    for (int outer = 0; outer < iters; ++outer) {
      for (int y = 0; y < ia.h; ++y)
        for (int x = 0; x < ia.w; ++x)
          warped.v[size_t(y) * ia.w + x] =
              sample_clamped(ib, x + u.at(x, y), y + v.at(x, y));
      central_gradients(ia, gx, gy);
      central_gradients(warped, gxw, gyw);
      for (size_t i = 0; i < gx.v.size(); ++i) {
        gx.v[i] = 0.5 * (gx.v[i] + gxw.v[i]);
        gy.v[i] = 0.5 * (gy.v[i] + gyw.v[i]);
      }
      // Linearized residual: Ix*u' + Iy*v' + c == data error for new flow u',v'.
      for (int y = 0; y < ia.h; ++y)
        for (int x = 0; x < ia.w; ++x) {
          const size_t i = size_t(y) * ia.w + x;
          cterm[i] = (warped.at(x, y) - ia.at(x, y)) - gx.v[i] * u.at(x, y) -
                     gy.v[i] * v.at(x, y);
        }
      for (int sweep = 0; sweep < inner_sweeps; ++sweep) {
        Plane un = u, vn = v;
        for (int y = 0; y < ia.h; ++y)
          for (int x = 0; x < ia.w; ++x) {
            const size_t i = size_t(y) * ia.w + x;
            double ubar = 0.0, vbar = 0.0;
            int cnt = 0;
            const int nx[4] = {x, x - 1, x + 1, x};
            const int ny[4] = {y - 1, y, y, y + 1};
            for (int n = 0; n < 4; ++n) {
              if (nx[n] < 0 || nx[n] >= ia.w || ny[n] < 0 || ny[n] >= ia.h) continue;
              ubar += u.at(nx[n], ny[n]);
              vbar += v.at(nx[n], ny[n]);
              ++cnt;
            }
            ubar /= cnt;
            vbar /= cnt;
            const double t = (gx.v[i] * ubar + gy.v[i] * vbar + cterm[i]) /
                             (alpha2 + gx.v[i] * gx.v[i] + gy.v[i] * gy.v[i]);
            un.v[i] = ubar - gx.v[i] * t;
            vn.v[i] = vbar - gy.v[i] * t;
          }
        u = std::move(un);
        v = std::move(vn);
      }
    }
  }

  FlowField out = FlowField::zeros(a.width, a.height, FlowDirection::Forward);
  const float bound = float(std::max(a.width, a.height));
  for (size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] = std::clamp(float(u.v[i]), -bound, bound);
    out.v[i] = std::clamp(float(v.v[i]), -bound, bound);
  }
  return out;
}

BoundaryMap warp_map(const BoundaryMap& src, const FlowField& flow_to_src) {
  require_valid(src, "warp_map source");
  require_valid(flow_to_src, "warp_map flow");
  if (src.width != flow_to_src.width || src.height != flow_to_src.height)
    throw ValidationError("warp_map: dimension mismatch");
  const int w = src.width, h = src.height;
  BoundaryMap out = BoundaryMap::zeros(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double sx = x + double(flow_to_src.u_at(x, y));
      const double sy = y + double(flow_to_src.v_at(x, y));
      if (sx < 0.0 || sy < 0.0 || sx > double(w - 1) || sy > double(h - 1)) continue;
      const int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0, fy = sy - y0;
      const double top =
          src.at(x0, y0) + fx * (double(src.at(x1, y0)) - src.at(x0, y0));
      const double bot =
          src.at(x0, y1) + fx * (double(src.at(x1, y1)) - src.at(x0, y1));
      out.at(x, y) = float(top + fy * (bot - top));
    }
  return out;
}

FlowField chain_flows(const FlowField& first, const FlowField& second) {
  if (first.width != second.width || first.height != second.height)
    throw ValidationError("chain_flows: dimension mismatch");
  const int w = first.width, h = first.height;
  Plane su{w, h, std::vector<double>(first.u.begin(), first.u.end())};
  Plane sv{w, h, std::vector<double>(first.v.begin(), first.v.end())};
  Plane tu{w, h, std::vector<double>(second.u.begin(), second.u.end())};
  Plane tv{w, h, std::vector<double>(second.v.begin(), second.v.end())};
  FlowField out = FlowField::zeros(w, h, first.direction);
  const float bound = float(std::max(w, h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double mx = x + su.at(x, y), my = y + sv.at(x, y);
      const double cu = su.at(x, y) + sample_clamped(tu, mx, my);
      const double cv = sv.at(x, y) + sample_clamped(tv, mx, my);
      out.u[size_t(y) * w + x] = std::clamp(float(cu), -bound, bound);
      out.v[size_t(y) * w + x] = std::clamp(float(cv), -bound, bound);
    }
  return out;
}

std::vector<BoundaryMap> temporal_smooth(const std::vector<BoundaryMap>& maps,
                                         const std::vector<FlowPair>& flows,
                                         const SmoothingConfig& cfg,
                                         const CueMerger& merger) {
  const int t_count = int(maps.size());
  if (t_count == 0) return {};
  if (int(flows.size()) != t_count - 1)
    throw ValidationError("temporal_smooth: need one flow pair per frame gap");
  if (cfg.window < 0) throw ValidationError("temporal_smooth: window must be >= 0");
  const int span = 2 * cfg.window + 1;
  std::vector<double> weights = cfg.weights;
  if (weights.empty()) weights.assign(size_t(span), 1.0);
  if (int(weights.size()) != span)
    throw ValidationError("temporal_smooth: need one weight per window offset");
  for (double w : weights)
    if (!(w > 0.0)) throw ValidationError("temporal_smooth: weights must be > 0");

  std::vector<BoundaryMap> out(maps.size());
  for (int t = 0; t < t_count; ++t) {
    std::vector<WeightedCue> cues;
    for (int offset = -cfg.window; offset <= cfg.window; ++offset) {
      const int s = t + offset;
      if (s < 0 || s >= t_count) continue;  // window truncated at the ends
      const double weight = weights[size_t(offset + cfg.window)];
      if (offset == 0) {
        cues.push_back({maps[size_t(t)], weight});
        continue;
      }
      // Chain single-step flows from t out to the source frame.
      FlowField to_source;
      if (offset > 0) {
        to_source = flows[size_t(t)].forward;
        for (int step = 1; step < offset; ++step)
          to_source = chain_flows(to_source, flows[size_t(t + step)].forward);
      } else {
        to_source = flows[size_t(t - 1)].backward;
        for (int step = 1; step < -offset; ++step)
          to_source = chain_flows(to_source, flows[size_t(t - step - 1)].backward);
      }
      cues.push_back({warp_map(maps[size_t(s)], to_source), weight});
    }
    out[size_t(t)] = merger(cues);
  }
  return out;
}

}  // namespace vidseg
