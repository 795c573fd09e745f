#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "vidseg/proposals.hpp"

using namespace vidseg;

namespace {

Ucm two_region_ucm(float arc_value) {
  // Left|right split of an 8x6 grid with a single arc.
  BoundaryMap map = BoundaryMap::zeros(8, 6);
  LabelMap base = LabelMap::filled(8, 6, 0);
  for (int y = 0; y < 6; ++y)
    for (int x = 4; x < 8; ++x) base.at(x, y) = 1;
  for (int y = 0; y < 6; ++y) {
    map.at(3, y) = arc_value;
    map.at(4, y) = arc_value;
  }
  return build_ucm(map, base);
}

std::set<std::vector<int>> mask_set(const ProposalSet& p) {
  return {p.masks.begin(), p.masks.end()};
}

}  // namespace

TEST_CASE("single-region hierarchy yields exactly the full frame") {
  const Ucm ucm = build_ucm(BoundaryMap::zeros(5, 4), LabelMap::filled(5, 4, 0));
  const ProposalSet set = generate_proposals(ucm, 10, 8, 10);
  REQUIRE(set.masks.size() == 1);
  CHECK(set.masks[0].size() == 20);
}

TEST_CASE("two-region hierarchy: thresholds produce {A, B, AuB}") {
  const Ucm ucm = two_region_ucm(0.5f);
  const ProposalSet set = generate_proposals(ucm, 3, 0, 0);  // t in {.25,.5,.75}
  CHECK(set.masks.size() == 3);
  std::set<size_t> sizes;
  for (const auto& m : set.masks) sizes.insert(m.size());
  CHECK(sizes == std::set<size_t>{24, 48});  // A and B are 24 px, AuB is 48
}

TEST_CASE("deduplication is idempotent") {
  const Ucm ucm = two_region_ucm(0.5f);
  const ProposalSet once = generate_proposals(ucm, 5, 2, 4);
  const ProposalSet twice = generate_proposals(ucm, 5, 2, 4);
  CHECK(mask_set(once) == mask_set(twice));
  CHECK(once.masks.size() == twice.masks.size());
  // No duplicates inside one run either.
  CHECK(mask_set(once).size() == once.masks.size());
}

TEST_CASE("hierarchy-level proposals are unions of base regions") {
  const BoundaryMap map = testutil::smooth_random_map(24, 24, 41);
  const LabelMap base = watershed_oversegment(map);
  const Ucm ucm = build_ucm(map, base);
  const ProposalSet set = generate_proposals(ucm, 6, 0, 0);
  for (const auto& mask : set.masks) {
    std::vector<char> inside(base.labels.size(), 0);
    for (int p : mask) inside[size_t(p)] = 1;
    // Every base region is fully in or fully out.
    std::vector<int> seen(size_t(num_labels(base)), -1);
    for (size_t p = 0; p < base.labels.size(); ++p) {
      const int32_t r = base.labels[p];
      if (seen[size_t(r)] < 0) seen[size_t(r)] = inside[p];
      CHECK(seen[size_t(r)] == inside[p]);
    }
  }
}

TEST_CASE("seeded merges stay 4-connected and emit one proposal per step") {
  const BoundaryMap map = testutil::smooth_random_map(20, 20, 8);
  const LabelMap base = watershed_oversegment(map);
  const Ucm ucm = build_ucm(map, base);
  const ProposalSet set = generate_proposals(ucm, 1, 3, 5);
  for (size_t i = 0; i < set.masks.size(); ++i) {
    if (set.sources[i] != ProposalSource::SeededMerge) continue;
    // BFS connectivity over the mask.
    const auto& mask = set.masks[i];
    std::set<int> pixels(mask.begin(), mask.end());
    std::vector<int> stack{mask.front()};
    std::set<int> seen{mask.front()};
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int x = p % 20, y = p / 20;
      for (const auto& [dx, dy] : std::vector<std::pair<int, int>>{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || nx >= 20 || ny < 0 || ny >= 20) continue;
        const int q = ny * 20 + nx;
        if (pixels.count(q) && !seen.count(q)) {
          seen.insert(q);
          stack.push_back(q);
        }
      }
    }
    CHECK(seen.size() == mask.size());
  }
}

TEST_CASE("average_contours: one square proposal") {
  ProposalSet set;
  set.width = 8;
  set.height = 8;
  std::vector<int> square;
  for (int y = 2; y <= 5; ++y)
    for (int x = 2; x <= 5; ++x) square.push_back(y * 8 + x);
  set.masks.push_back(square);
  set.sources.push_back(ProposalSource::ExternalFile);
  const BoundaryMap out = average_contours(set);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const bool inside = x >= 2 && x <= 5 && y >= 2 && y <= 5;
      const bool interior = x >= 3 && x <= 4 && y >= 3 && y <= 4;
      const float expected = inside && !interior ? 1.f : 0.f;
      CAPTURE(x);
      CAPTURE(y);
      CHECK(out.at(x, y) == expected);
    }
}

TEST_CASE("average_contours: duplicated proposal changes nothing") {
  ProposalSet set;
  set.width = 6;
  set.height = 4;
  std::vector<int> blob{7, 8, 13, 14};
  set.masks = {blob, blob};
  set.sources = {ProposalSource::ExternalFile, ProposalSource::ExternalFile};
  ProposalSet single = set;
  single.masks.pop_back();
  single.sources.pop_back();
  CHECK(average_contours(set).data == average_contours(single).data);
}

TEST_CASE("average_contours: shared edge scores 1.0, the rest 0.5") {
  // A = columns 0..2 and B = columns 2..5 on a 6x6 grid share column 2.
  // Hand count: column 2 lies on both contours (2/2); every other non-interior
  // pixel lies on exactly one contour (1/2); interiors score 0.
  ProposalSet set;
  set.width = 6;
  set.height = 6;
  std::vector<int> a, b;
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) {
      if (x <= 2) a.push_back(y * 6 + x);
      if (x >= 2) b.push_back(y * 6 + x);
    }
  set.masks = {a, b};
  set.sources = {ProposalSource::ExternalFile, ProposalSource::ExternalFile};
  const BoundaryMap out = average_contours(set);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) {
      const bool a_interior = (x == 1) && y >= 1 && y <= 4;
      const bool b_interior = (x == 3 || x == 4) && y >= 1 && y <= 4;
      float expected = 0.5f;
      if (x == 2) expected = 1.f;
      if (a_interior || b_interior) expected = 0.f;
      CAPTURE(x);
      CAPTURE(y);
      CHECK(out.at(x, y) == expected);
    }
}

TEST_CASE("average_contours is invariant to proposal order") {
  const Ucm ucm = two_region_ucm(0.6f);
  ProposalSet set = generate_proposals(ucm, 4, 2, 3);
  ProposalSet reversed = set;
  std::reverse(reversed.masks.begin(), reversed.masks.end());
  std::reverse(reversed.sources.begin(), reversed.sources.end());
  CHECK(average_contours(set).data == average_contours(reversed).data);
}

TEST_CASE("average_contours range and the all-contours pixel rule") {
  const BoundaryMap map = testutil::smooth_random_map(16, 16, 90);
  const Ucm ucm = build_ucm(map, watershed_oversegment(map));
  const ProposalSet set = generate_proposals(ucm, 5, 3, 4);
  const BoundaryMap out = average_contours(set);
  for (float v : out.data) {
    CHECK(v >= 0.f);
    CHECK(v <= 1.f);
  }
  // value 1.0 exactly where every proposal's contour contains the pixel.
  std::vector<int> counts(out.data.size(), 0);
  for (const auto& mask : set.masks) {
    std::vector<char> inside(out.data.size(), 0);
    for (int p : mask) inside[size_t(p)] = 1;
    for (int p : mask) {
      const int x = p % 16, y = p / 16;
      const bool border = x == 0 || x == 15 || y == 0 || y == 15;
      if (border || !inside[size_t(p - 1)] || !inside[size_t(p + 1)] ||
          !inside[size_t(p - 16)] || !inside[size_t(p + 16)])
        ++counts[size_t(p)];
    }
  }
  for (size_t i = 0; i < out.data.size(); ++i)
    CHECK((out.data[i] == 1.f) == (counts[i] == int(set.masks.size())));
}

TEST_CASE("empty proposal set is rejected") {
  ProposalSet set;
  set.width = 4;
  set.height = 4;
  CHECK_THROWS_AS(average_contours(set), ValidationError);
}

TEST_CASE("external label map pages become proposals") {
  LabelMap page0 = testutil::random_partition(10, 10, 4, 3);
  LabelMap page1 = testutil::random_partition(10, 10, 3, 4);
  const ProposalSet set = proposals_from_label_maps({page0, page1});
  CHECK(set.masks.size() <= 7);
  CHECK(set.masks.size() >= 4);
  size_t total0 = 0;
  for (size_t i = 0; i < set.masks.size(); ++i)
    if (i < size_t(num_labels(page0))) total0 += set.masks[i].size();
  CHECK(mask_set(set).size() == set.masks.size());
}
