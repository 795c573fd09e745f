#include "vidseg/merge.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <tuple>

namespace vidseg {

namespace {

// Permutation-invariant weighted mean: contributions are summed in a sorted
// canonical order, and an all-equal list returns the value exactly.
double weighted_mean_canonical(std::vector<std::pair<double, double>> value_weight) {
  std::sort(value_weight.begin(), value_weight.end());
  if (value_weight.front().first == value_weight.back().first)
    return value_weight.front().first;
  double sum = 0.0, wsum = 0.0;
  for (const auto& [v, w] : value_weight) {
    sum += v * w;
    wsum += w;
  }
  return sum / wsum;
}

// Connected components of the pixelwise intersection of all cue partitions.
LabelMap intersection_partition(const std::vector<LabelMap>& bases) {
  const int w = bases.front().width, h = bases.front().height;
  const size_t n = size_t(w) * h;
  auto same_cell = [&](size_t p, size_t q) {
    for (const LabelMap& b : bases)
      if (b.labels[p] != b.labels[q]) return false;
    return true;
  };
  std::vector<int32_t> labels(n, -1);
  std::vector<size_t> stack;
  int32_t next = 0;
  for (size_t start = 0; start < n; ++start) {
    if (labels[start] >= 0) continue;
    labels[start] = next;
    stack.assign(1, start);
    while (!stack.empty()) {
      const size_t p = stack.back();
      stack.pop_back();
      const int x = int(p % w), y = int(p / w);
      const int nx[4] = {x, x - 1, x + 1, x};
      const int ny[4] = {y - 1, y, y, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
        const size_t q = size_t(ny[k]) * w + nx[k];
        if (labels[q] < 0 && same_cell(p, q)) {
          labels[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  return LabelMap{w, h, std::move(labels)};
}

}  // namespace

Ucm merge_cues_ucm(const std::vector<WeightedCue>& cues) {
  if (cues.empty()) throw ValidationError("merge_cues: empty cue list");
  const int w = cues.front().first.width, h = cues.front().first.height;
  for (const auto& [map, weight] : cues) {
    require_valid(map, "merge_cues cue");
    if (map.width != w || map.height != h)
      throw ValidationError("merge_cues: cue dimension mismatch");
    if (!(weight > 0.0)) throw ValidationError("merge_cues: weights must be > 0");
  }
  const int n_cues = int(cues.size());

  // Per cue: own hierarchy and its ultrametric.
  std::vector<LabelMap> bases;
  std::vector<Ucm> hierarchies;
  std::vector<Dendrogram> dendros;
  bases.reserve(size_t(n_cues));
  for (const auto& [map, weight] : cues) {
    bases.push_back(watershed_oversegment(map));
    hierarchies.push_back(build_ucm(map, bases.back()));
    dendros.emplace_back(num_labels(bases.back()), hierarchies.back().merge_tree);
  }

  const LabelMap common = intersection_partition(bases);
  const int k = num_labels(common);
  const int max_nodes = 2 * k - 1;

  // Every common-base region lies inside exactly one region of each cue's
  // base; a merged region is represented per cue by the lowest hierarchy node
  // containing it. The separating strength between two current regions in a
  // cue is the merge strength of their containing nodes, which equals the max
  // ultrametric distance over cross pairs.
  std::vector<std::vector<int>> container(
      size_t(std::max(max_nodes, k)), std::vector<int>(size_t(n_cues), -1));
  {
    std::vector<char> seen(size_t(k), 0);
    for (size_t p = 0; p < common.labels.size(); ++p) {
      const int r = common.labels[p];
      if (seen[size_t(r)]) continue;
      seen[size_t(r)] = 1;
      for (int c = 0; c < n_cues; ++c)
        container[size_t(r)][size_t(c)] = bases[size_t(c)].labels[p];
    }
  }

  auto arc_strength = [&](int ra, int rb) {
    std::vector<std::pair<double, double>> vw;
    vw.reserve(size_t(n_cues));
    for (int c = 0; c < n_cues; ++c) {
      const int na = container[size_t(ra)][size_t(c)];
      const int nb = container[size_t(rb)][size_t(c)];
      vw.push_back({dendros[size_t(c)].distance(na, nb), cues[size_t(c)].second});
    }
    return weighted_mean_canonical(std::move(vw));
  };

  const auto initial_arcs = detail::adjacency_arcs(common);
  std::vector<std::map<int, double>> adj;
  adj.resize(size_t(std::max(max_nodes, k)));
  using HeapEntry = std::tuple<double, int, int>;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;
  for (const auto& [a, b] : initial_arcs) {
    const double s = arc_strength(a, b);
    adj[size_t(a)][b] = s;
    adj[size_t(b)][a] = s;
    heap.push({s, a, b});
  }

  std::vector<char> alive(size_t(std::max(max_nodes, k)), 0);
  for (int i = 0; i < k; ++i) alive[size_t(i)] = 1;

  std::vector<MergeEvent> tree;
  tree.reserve(size_t(std::max(0, k - 1)));
  int next_id = k;
  double last_strength = 0.0;

  while (!heap.empty()) {
    auto [strength, a, b] = heap.top();
    heap.pop();
    if (!alive[size_t(a)] || !alive[size_t(b)]) continue;
    auto it = adj[size_t(a)].find(b);
    if (it == adj[size_t(a)].end() || it->second != strength) continue;

    const int m = next_id++;
    const double recorded = std::max(strength, last_strength);
    last_strength = recorded;
    tree.push_back({a, b, m, recorded});

    for (int c = 0; c < n_cues; ++c) {
      const int na = container[size_t(a)][size_t(c)];
      const int nb = container[size_t(b)][size_t(c)];
      container[size_t(m)][size_t(c)] = (na == nb) ? na : dendros[size_t(c)].lca(na, nb);
    }

    std::map<int, char> neighbor_set;
    for (int side : {a, b}) {
      for (const auto& [nb_region, unused] : adj[size_t(side)])
        if (nb_region != a && nb_region != b) neighbor_set[nb_region] = 1;
      alive[size_t(side)] = 0;
    }
    for (const auto& [nb_region, unused] : neighbor_set) {
      adj[size_t(nb_region)].erase(a);
      adj[size_t(nb_region)].erase(b);
      const double s = arc_strength(m, nb_region);
      adj[size_t(nb_region)][m] = s;
      adj[size_t(m)][nb_region] = s;
      heap.push({s, std::min(m, nb_region), std::max(m, nb_region)});
    }
    adj[size_t(a)].clear();
    adj[size_t(b)].clear();
    alive[size_t(m)] = 1;
  }

  Ucm merged{common, std::move(tree), {}};
  Dendrogram dendro(k, merged.merge_tree);
  merged.arc_strength.reserve(initial_arcs.size());
  for (const auto& [a, b] : initial_arcs)
    merged.arc_strength.push_back({{a, b}, dendro.distance(a, b)});
  return merged;
}

BoundaryMap merge_cues(const std::vector<WeightedCue>& cues) {
  return ucm_to_boundary_map(merge_cues_ucm(cues));
}

}  // namespace vidseg
