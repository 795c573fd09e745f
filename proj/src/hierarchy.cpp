#include "vidseg/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace vidseg {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(size_t(n)) {
    for (int i = 0; i < n; ++i) parent[size_t(i)] = i;
  }
  int find(int x) {
    while (parent[size_t(x)] != x) {
      parent[size_t(x)] = parent[size_t(parent[size_t(x)])];
      x = parent[size_t(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[size_t(find(a))] = find(b); }
};

}  // namespace

int Ucm::num_base_regions() const { return num_labels(base); }

double Ucm::arc(int a, int b) const {
  if (a > b) std::swap(a, b);
  const std::pair<int, int> key{a, b};
  auto it = std::lower_bound(
      arc_strength.begin(), arc_strength.end(), key,
      [](const auto& entry, const std::pair<int, int>& k) { return entry.first < k; });
  if (it == arc_strength.end() || it->first != key)
    throw ValidationError("no arc between regions " + std::to_string(a) + " and " +
                          std::to_string(b));
  return it->second;
}

LabelMap watershed_oversegment(const BoundaryMap& b) {
  require_valid(b, "watershed input");
  const int w = b.width, h = b.height;
  const size_t n = size_t(w) * h;
  std::vector<int32_t> labels(n, -1);

  // Seed one region per regional minimum: an equal-value plateau with no
  // strictly lower 4-neighbor.
  std::vector<char> visited(n, 0);
  std::vector<size_t> plateau, stack;
  int32_t next_label = 0;
  for (size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    const float v = b.data[start];
    plateau.clear();
    stack.assign(1, start);
    visited[start] = 1;
    bool is_minimum = true;
    while (!stack.empty()) {
      const size_t p = stack.back();
      stack.pop_back();
      plateau.push_back(p);
      const int x = int(p % w), y = int(p / w);
      const int nx[4] = {x, x - 1, x + 1, x};
      const int ny[4] = {y - 1, y, y, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
        const size_t q = size_t(ny[k]) * w + nx[k];
        if (b.data[q] < v) is_minimum = false;
        if (b.data[q] == v && !visited[q]) {
          visited[q] = 1;
          stack.push_back(q);
        }
      }
    }
    if (is_minimum) {
      for (size_t p : plateau) labels[p] = next_label;
      ++next_label;
    }
  }

  // Flood in (value, row-major index) order; a pixel is claimed when first
  // pushed, so ridges go to the basin that arrives first.
  using Entry = std::pair<float, int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  for (size_t p = 0; p < n; ++p)
    if (labels[p] >= 0) queue.push({b.data[p], int64_t(p)});
  while (!queue.empty()) {
    const size_t p = size_t(queue.top().second);
    queue.pop();
    const int x = int(p % w), y = int(p / w);
    const int nx[4] = {x, x - 1, x + 1, x};
    const int ny[4] = {y - 1, y, y, y + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
      const size_t q = size_t(ny[k]) * w + nx[k];
      if (labels[q] < 0) {
        labels[q] = labels[p];
        queue.push({b.data[q], int64_t(q)});
      }
    }
  }

  return relabel_contiguous(LabelMap{w, h, std::move(labels)});
}

namespace detail {

std::vector<std::pair<std::pair<int, int>, ArcAccum>> boundary_arcs(
    const BoundaryMap& b, const LabelMap& base) {
  std::map<std::pair<int, int>, ArcAccum> acc;
  const int w = base.width, h = base.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int32_t l = base.at(x, y);
      // Right and down pairs cover every unordered adjacency once.
      if (x + 1 < w && base.at(x + 1, y) != l) {
        const int32_t o = base.at(x + 1, y);
        ArcAccum& a = acc[{std::min(l, o), std::max(l, o)}];
        a.sum += std::max(b.at(x, y), b.at(x + 1, y));
        ++a.count;
      }
      if (y + 1 < h && base.at(x, y + 1) != l) {
        const int32_t o = base.at(x, y + 1);
        ArcAccum& a = acc[{std::min(l, o), std::max(l, o)}];
        a.sum += std::max(b.at(x, y), b.at(x, y + 1));
        ++a.count;
      }
    }
  }
  return {acc.begin(), acc.end()};
}

std::vector<std::pair<int, int>> adjacency_arcs(const LabelMap& base) {
  std::map<std::pair<int, int>, char> seen;
  const int w = base.width, h = base.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int32_t l = base.at(x, y);
      if (x + 1 < w && base.at(x + 1, y) != l) {
        const int32_t o = base.at(x + 1, y);
        seen[{std::min(l, o), std::max(l, o)}] = 1;
      }
      if (y + 1 < h && base.at(x, y + 1) != l) {
        const int32_t o = base.at(x, y + 1);
        seen[{std::min(l, o), std::max(l, o)}] = 1;
      }
    }
  }
  std::vector<std::pair<int, int>> arcs;
  arcs.reserve(seen.size());
  for (const auto& [key, unused] : seen) arcs.push_back(key);
  return arcs;
}

}  // namespace detail

Ucm build_ucm(const BoundaryMap& b, const LabelMap& base) {
  require_valid(b, "build_ucm boundary map");
  require_valid(base, "build_ucm base");
  if (b.width != base.width || b.height != base.height)
    throw ValidationError("build_ucm: base/map dimension mismatch");

  const int k = num_labels(base);
  const int max_nodes = 2 * k - 1;
  auto initial = detail::boundary_arcs(b, base);

  // adj[node] maps neighbor node -> accumulated arc statistics.
  std::vector<std::map<int, detail::ArcAccum>> adj;
  adj.resize(size_t(std::max(max_nodes, k)));
  for (const auto& [key, arc] : initial) {
    adj[size_t(key.first)][key.second] = arc;
    adj[size_t(key.second)][key.first] = arc;
  }

  // Lazy min-heap over (strength, a, b); ties resolved by the smallest id pair.
  using HeapEntry = std::tuple<double, int, int>;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;
  auto mean_of = [](const detail::ArcAccum& a) { return a.sum / double(a.count); };
  for (const auto& [key, arc] : initial) heap.push({mean_of(arc), key.first, key.second});

  std::vector<char> alive(size_t(std::max(max_nodes, k)), 0);
  for (int i = 0; i < k; ++i) alive[size_t(i)] = 1;

  std::vector<MergeEvent> tree;
  tree.reserve(size_t(std::max(0, k - 1)));
  int next_id = k;
  double last_strength = 0.0;

  while (!heap.empty()) {
    auto [strength, a, b_id] = heap.top();
    heap.pop();
    if (!alive[size_t(a)] || !alive[size_t(b_id)]) continue;
    auto it = adj[size_t(a)].find(b_id);
    if (it == adj[size_t(a)].end() || mean_of(it->second) != strength) continue;

    const int m = next_id++;
    const double recorded = std::max(strength, last_strength);
    last_strength = recorded;
    tree.push_back({a, b_id, m, recorded});

    // Fold both adjacency lists into the merged node, combining shared arcs.
    std::map<int, detail::ArcAccum> merged;
    for (int side : {a, b_id}) {
      for (const auto& [nb, arc] : adj[size_t(side)]) {
        if (nb == a || nb == b_id) continue;
        detail::ArcAccum& dst = merged[nb];
        dst.sum += arc.sum;
        dst.count += arc.count;
        adj[size_t(nb)].erase(side);
      }
      adj[size_t(side)].clear();
      alive[size_t(side)] = 0;
    }
    for (const auto& [nb, arc] : merged) {
      adj[size_t(nb)][m] = arc;
      heap.push({mean_of(arc), std::min(nb, m), std::max(nb, m)});
    }
    adj[size_t(m)] = std::move(merged);
    alive[size_t(m)] = 1;
  }

  Ucm ucm{base, std::move(tree), {}};
  Dendrogram dendro(k, ucm.merge_tree);
  ucm.arc_strength.reserve(initial.size());
  for (const auto& [key, unused] : initial)
    ucm.arc_strength.push_back({key, dendro.distance(key.first, key.second)});
  return ucm;
}

LabelMap extract_superpixels(const Ucm& u, double threshold) {
  const int k = u.num_base_regions();
  UnionFind uf(k + int(u.merge_tree.size()));
  for (const MergeEvent& ev : u.merge_tree) {
    if (!(ev.strength < threshold)) break;  // strengths are non-decreasing
    uf.unite(ev.region_a, ev.merged_id);
    uf.unite(ev.region_b, ev.merged_id);
  }
  LabelMap out{u.base.width, u.base.height,
               std::vector<int32_t>(u.base.labels.size(), 0)};
  for (size_t i = 0; i < out.labels.size(); ++i)
    out.labels[i] = uf.find(u.base.labels[i]);
  return relabel_contiguous(out);
}

LabelMap extract_superpixels_count(const Ucm& u, int target_count) {
  const int k = u.num_base_regions();
  const int merges = int(u.merge_tree.size());
  // After m merges the partition has k - m regions.
  int best_m = 0;
  long best_diff = std::labs(long(k) - target_count);
  for (int m = 1; m <= merges; ++m) {
    const long diff = std::labs(long(k - m) - target_count);
    if (diff <= best_diff) {  // ties -> coarser
      best_diff = diff;
      best_m = m;
    }
  }
  UnionFind uf(k + merges);
  for (int m = 0; m < best_m; ++m) {
    const MergeEvent& ev = u.merge_tree[size_t(m)];
    uf.unite(ev.region_a, ev.merged_id);
    uf.unite(ev.region_b, ev.merged_id);
  }
  LabelMap out{u.base.width, u.base.height,
               std::vector<int32_t>(u.base.labels.size(), 0)};
  for (size_t i = 0; i < out.labels.size(); ++i)
    out.labels[i] = uf.find(u.base.labels[i]);
  return relabel_contiguous(out);
}

BoundaryMap ucm_to_boundary_map(const Ucm& u) {
  const int w = u.base.width, h = u.base.height;
  BoundaryMap out = BoundaryMap::zeros(w, h);
  auto bump = [&](int x, int y, double s) {
    float& v = out.at(x, y);
    v = std::max(v, float(s));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int32_t l = u.base.at(x, y);
      if (x + 1 < w && u.base.at(x + 1, y) != l) {
        const double s = u.arc(l, u.base.at(x + 1, y));
        bump(x, y, s);
        bump(x + 1, y, s);
      }
      if (y + 1 < h && u.base.at(x, y + 1) != l) {
        const double s = u.arc(l, u.base.at(x, y + 1));
        bump(x, y, s);
        bump(x, y + 1, s);
      }
    }
  }
  return out;
}

Dendrogram::Dendrogram(int num_base_regions, const std::vector<MergeEvent>& tree) {
  const int n = num_base_regions + int(tree.size());
  parent_.assign(size_t(n), -1);
  height_.assign(size_t(n), 0.0);
  depth_.assign(size_t(n), 0);
  for (const MergeEvent& ev : tree) {
    parent_[size_t(ev.region_a)] = ev.merged_id;
    parent_[size_t(ev.region_b)] = ev.merged_id;
    height_[size_t(ev.merged_id)] = ev.strength;
  }
  // Merged nodes appear after their children, so a reverse sweep fills depths.
  for (int i = n - 1; i >= 0; --i) {
    const int p = parent_[size_t(i)];
    depth_[size_t(i)] = (p < 0) ? 0 : depth_[size_t(p)] + 1;
  }
  int levels = 1;
  while ((1 << levels) < std::max(2, n)) ++levels;
  up_.assign(size_t(levels), std::vector<int>(size_t(n), -1));
  up_[0] = parent_;
  for (int j = 1; j < levels; ++j)
    for (int i = 0; i < n; ++i) {
      const int mid = up_[size_t(j - 1)][size_t(i)];
      up_[size_t(j)][size_t(i)] = (mid < 0) ? -1 : up_[size_t(j - 1)][size_t(mid)];
    }
}

int Dendrogram::lca(int a, int b) const {
  auto raise = [&](int node, int steps) {
    for (int j = 0; steps > 0 && node >= 0; ++j, steps >>= 1)
      if (steps & 1) node = up_[size_t(j)][size_t(node)];
    return node;
  };
  if (depth_[size_t(a)] > depth_[size_t(b)])
    a = raise(a, depth_[size_t(a)] - depth_[size_t(b)]);
  else if (depth_[size_t(b)] > depth_[size_t(a)])
    b = raise(b, depth_[size_t(b)] - depth_[size_t(a)]);
  if (a == b) return a;
  for (int j = int(up_.size()) - 1; j >= 0; --j) {
    const int pa = up_[size_t(j)][size_t(a)];
    const int pb = up_[size_t(j)][size_t(b)];
    if (pa != pb) {
      if (pa < 0 || pb < 0) continue;
      a = pa;
      b = pb;
    }
  }
  return parent_[size_t(a)];  // -1 when a and b live in different trees
}

double Dendrogram::distance(int a, int b) const {
  if (a == b) return 0.0;
  const int node = lca(a, b);
  if (node < 0)
    throw ValidationError("dendrogram distance between disconnected regions");
  return height_[size_t(node)];
}

}  // namespace vidseg
