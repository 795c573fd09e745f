#include "vidseg/globalize.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "gradients.hpp"
#include "vidseg/hashutil.hpp"

namespace vidseg {

namespace {

void check_config(const SpectralConfig& cfg) {
  if (cfg.radius < 1) throw ValidationError("spectral: radius must be >= 1");
  if (cfg.n_eigvecs < 2) throw ValidationError("spectral: need k >= 2");
  if (!(cfg.rho > 0.0)) throw ValidationError("spectral: rho must be > 0");
  if (cfg.downsample < 1) throw ValidationError("spectral: downsample must be >= 1");
}

// Max-pool decimation; max keeps thin contours visible on the coarse grid.
std::vector<double> downsample_max(const BoundaryMap& b, int factor, int* w_out,
                                   int* h_out) {
  const int gw = (b.width + factor - 1) / factor;
  const int gh = (b.height + factor - 1) / factor;
  std::vector<double> grid(size_t(gw) * gh, 0.0);
  for (int y = 0; y < b.height; ++y)
    for (int x = 0; x < b.width; ++x) {
      double& cell = grid[size_t(y / factor) * gw + (x / factor)];
      cell = std::max(cell, double(b.at(x, y)));
    }
  *w_out = gw;
  *h_out = gh;
  return grid;
}

double max_on_segment(const std::vector<double>& grid, int w, int x0, int y0,
                      int x1, int y1) {
  // Bresenham walk, endpoints included.
  int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  double top = 0.0;
  int x = x0, y = y0;
  for (;;) {
    top = std::max(top, grid[size_t(y) * w + x]);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
  return top;
}

}  // namespace

SparseAffinity build_affinity(const BoundaryMap& b, const SpectralConfig& cfg) {
  require_valid(b, "build_affinity input");
  check_config(cfg);

  SparseAffinity aff;
  std::vector<double> grid = downsample_max(b, cfg.downsample, &aff.grid_w, &aff.grid_h);
  aff.n = aff.grid_w * aff.grid_h;
  aff.degree.assign(size_t(aff.n), 1.0);  // unit diagonal

  // Offsets with (dy > 0) or (dy == 0 && dx > 0) enumerate each unordered
  // pair once; the segment is computed for that canonical order, so the
  // matrix is symmetric by construction.
  std::vector<std::pair<int, int>> offsets;
  for (int dy = 0; dy <= cfg.radius; ++dy)
    for (int dx = -cfg.radius; dx <= cfg.radius; ++dx) {
      if (dy == 0 && dx <= 0) continue;
      if (dx * dx + dy * dy > cfg.radius * cfg.radius) continue;
      offsets.push_back({dx, dy});
    }

  for (int y = 0; y < aff.grid_h; ++y) {
    for (int x = 0; x < aff.grid_w; ++x) {
      const int i = y * aff.grid_w + x;
      for (const auto& [dx, dy] : offsets) {
        const int xx = x + dx, yy = y + dy;
        if (xx < 0 || xx >= aff.grid_w || yy >= aff.grid_h) continue;
        const int j = yy * aff.grid_w + xx;
        const double barrier = max_on_segment(grid, aff.grid_w, x, y, xx, yy);
        // Floor keeps the graph numerically connected even for tiny rho.
        const double w = std::max(std::exp(-barrier / cfg.rho), 1e-12);
        aff.entries.push_back({i, j, w});
        aff.degree[size_t(i)] += w;
        aff.degree[size_t(j)] += w;
      }
    }
  }
  return aff;
}

GeneralizedEigenResult smallest_laplacian_eigenpairs(const SparseAffinity& aff,
                                                     int k, double tol) {
  const int n = aff.n;
  if (n <= 0) throw ValidationError("eigensolver: empty affinity");
  k = std::min(k, n);

  // Assemble L = D - W and D.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(aff.entries.size() * 2 + size_t(n));
  for (const AffinityEntry& e : aff.entries) {
    trip.emplace_back(e.i, e.j, -e.w);
    trip.emplace_back(e.j, e.i, -e.w);
  }
  for (int i = 0; i < n; ++i)
    trip.emplace_back(i, i, aff.degree[size_t(i)] - 1.0);  // minus unit diagonal
  Eigen::SparseMatrix<double> laplacian(n, n);
  laplacian.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXd deg(n);
  for (int i = 0; i < n; ++i) deg[i] = aff.degree[size_t(i)];

  // Shift-invert: eigenpairs of C = (L - sigma D)^-1 D are 1/(lambda - sigma),
  // so the smallest lambda dominate. C is self-adjoint in the D inner product.
  const double sigma = -0.02;
  Eigen::SparseMatrix<double> shifted = laplacian;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma * deg[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success)
    throw EigenSolverError("eigensolver: factorization failed");

  auto d_dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.dot(deg.cwiseProduct(b));
  };
  auto deterministic_vector = [&](uint64_t salt) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
      v[i] = 2.0 * unit_from_bits(splitmix64(uint64_t(i) + salt * 0x9e3779b9ull)) - 1.0;
    return v;
  };

  // Lanczos with full reorthogonalization in the D inner product. The basis
  // grows until all k pairs meet the residual bound; at m == n the Krylov
  // space is the whole space, so only numerical trouble can stop us.
  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;
  Eigen::VectorXd v = deterministic_vector(1);
  {
    const double nrm = std::sqrt(d_dot(v, v));
    v /= nrm;
  }
  basis.push_back(v);

  GeneralizedEigenResult result;
  const int chunk = std::max(2 * k + 16, 48);
  int target = std::min(n, chunk);
  uint64_t restart_salt = 2;

  for (;;) {
    while (int(basis.size()) <= target) {
      const Eigen::VectorXd& q = basis.back();
      Eigen::VectorXd w = solver.solve(deg.cwiseProduct(q));
      const double a = d_dot(w, q);
      alpha.push_back(a);
      w -= a * q;
      if (basis.size() >= 2) w -= beta.back() * basis[basis.size() - 2];
      for (int pass = 0; pass < 2; ++pass)
        for (const Eigen::VectorXd& u : basis) w -= d_dot(w, u) * u;
      double b = std::sqrt(std::max(d_dot(w, w), 0.0));
      if (b < 1e-13) {
        // Invariant subspace found; continue with a fresh deterministic
        // direction orthogonal to the current basis.
        if (int(basis.size()) >= n) break;
        w = deterministic_vector(restart_salt++);
        for (int pass = 0; pass < 2; ++pass)
          for (const Eigen::VectorXd& u : basis) w -= d_dot(w, u) * u;
        b = std::sqrt(std::max(d_dot(w, w), 0.0));
        if (b < 1e-13) break;
        beta.push_back(0.0);
        basis.push_back(w / b);
        continue;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }

    const int m = int(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[size_t(i)];
      if (i + 1 < m && beta[size_t(i)] != 0.0) {
        tri(i, i + 1) = beta[size_t(i)];
        tri(i + 1, i) = beta[size_t(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri_eig(tri);

    // Largest theta correspond to the smallest lambda = sigma + 1/theta.
    std::vector<int> order(size_t(m), 0);
    for (int i = 0; i < m; ++i) order[size_t(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return tri_eig.eigenvalues()[a] > tri_eig.eigenvalues()[b];
    });

    result.values.clear();
    result.vectors.clear();
    bool converged = true;
    for (int r = 0; r < k && r < m; ++r) {
      const int idx = order[size_t(r)];
      const double theta = tri_eig.eigenvalues()[idx];
      if (theta <= 0.0) {
        converged = false;
        break;
      }
      const double lambda = sigma + 1.0 / theta;
      Eigen::VectorXd vec = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < m; ++i) vec += tri_eig.eigenvectors()(i, idx) * basis[size_t(i)];
      const double nrm = std::sqrt(d_dot(vec, vec));
      vec /= nrm;
      const Eigen::VectorXd resid = laplacian * vec - lambda * deg.cwiseProduct(vec);
      const double dv_norm = deg.cwiseProduct(vec).norm();
      if (resid.norm() > tol * dv_norm) {
        converged = false;
        break;
      }
      result.values.push_back(lambda);
      result.vectors.emplace_back(vec.data(), vec.data() + n);
    }
    if (converged && int(result.values.size()) == k) break;
    if (target >= n)
      throw EigenSolverError("eigensolver: iteration budget exhausted");
    target = std::min(n, target + chunk);
  }

  // Ascending eigenvalues.
  std::vector<int> order(result.values.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return result.values[size_t(a)] < result.values[size_t(b)]; });
  GeneralizedEigenResult sorted;
  for (int idx : order) {
    sorted.values.push_back(result.values[size_t(idx)]);
    sorted.vectors.push_back(std::move(result.vectors[size_t(idx)]));
  }
  return sorted;
}

BoundaryMap spectral_boundaries(const BoundaryMap& b, const SpectralConfig& cfg) {
  require_valid(b, "spectral_boundaries input");
  check_config(cfg);

  const SparseAffinity aff = build_affinity(b, cfg);
  const int k = std::min(cfg.n_eigvecs, aff.n);
  const GeneralizedEigenResult eig = smallest_laplacian_eigenpairs(aff, k);

  const int gw = aff.grid_w, gh = aff.grid_h;
  std::vector<double> accum(size_t(gw) * gh, 0.0);
  std::vector<double> gx, gy, oriented;
  for (size_t j = 0; j < eig.values.size(); ++j) {
    if (eig.values[j] <= 1e-8) continue;  // constant eigenvector
    grad::gaussian_gradients(eig.vectors[j], gw, gh, 1.0, gx, gy);
    grad::oriented_max(gx, gy, cfg.n_orientations, oriented);
    const double weight = 1.0 / std::sqrt(eig.values[j]);
    for (size_t i = 0; i < accum.size(); ++i) accum[i] += weight * oriented[i];
  }

  // Upsample to full resolution through block centers.
  BoundaryMap out = BoundaryMap::zeros(b.width, b.height);
  const double f = double(cfg.downsample);
  double top = 0.0;
  for (int y = 0; y < b.height; ++y) {
    for (int x = 0; x < b.width; ++x) {
      const double sx = std::clamp((x + 0.5) / f - 0.5, 0.0, double(gw - 1));
      const double sy = std::clamp((y + 0.5) / f - 0.5, 0.0, double(gh - 1));
      const int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
      const int x1 = std::min(x0 + 1, gw - 1), y1 = std::min(y0 + 1, gh - 1);
      const double fx = sx - x0, fy = sy - y0;
      const double t0 = accum[size_t(y0) * gw + x0] +
                        fx * (accum[size_t(y0) * gw + x1] - accum[size_t(y0) * gw + x0]);
      const double t1 = accum[size_t(y1) * gw + x0] +
                        fx * (accum[size_t(y1) * gw + x1] - accum[size_t(y1) * gw + x0]);
      const double v = t0 + fy * (t1 - t0);
      out.at(x, y) = float(v);
      top = std::max(top, v);
    }
  }
  if (top > 0.0)
    for (float& v : out.data) v = float(std::clamp(double(v) / top, 0.0, 1.0));
  else
    std::fill(out.data.begin(), out.data.end(), 0.f);
  return out;
}

}  // namespace vidseg
