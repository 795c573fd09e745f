#include <doctest.h>

#include "helpers.hpp"
#include "vidseg/raster.hpp"

using namespace vidseg;

TEST_CASE("validate accepts an all-zero boundary map") {
  BoundaryMap map = BoundaryMap::zeros(4, 4);
  CHECK(!validate(map).has_value());
}

TEST_CASE("validate rejects out-of-range boundary values") {
  BoundaryMap map = BoundaryMap::zeros(4, 4);
  map.at(2, 1) = 1.5f;
  auto err = validate(map);
  REQUIRE(err.has_value());
  CHECK(err->find("out of [0,1]") != std::string::npos);
}

TEST_CASE("validate rejects non-contiguous labels") {
  LabelMap map = LabelMap::filled(4, 2, 0);
  for (int x = 0; x < 4; ++x) map.at(x, 1) = 2;  // {0,2} skips 1
  auto err = validate(map);
  REQUIRE(err.has_value());
  CHECK(err->find("non-contiguous") != std::string::npos);
}

TEST_CASE("validate rejects disconnected regions") {
  LabelMap map = LabelMap::filled(5, 1, 0);
  map.at(0, 0) = 1;
  map.at(4, 0) = 1;  // label 1 in two pieces
  auto err = validate(map);
  REQUIRE(err.has_value());
  CHECK(err->find("not 4-connected") != std::string::npos);
}

TEST_CASE("validate flags bad flow magnitudes and sizes") {
  FlowField flow = FlowField::zeros(4, 4);
  flow.u[5] = 100.f;
  CHECK(validate(flow).has_value());
  FlowField short_flow = FlowField::zeros(4, 4);
  short_flow.v.pop_back();
  CHECK(validate(short_flow).has_value());
}

TEST_CASE("relabel_contiguous renumbers by first occurrence") {
  LabelMap map = LabelMap::filled(2, 2, 5);
  map.at(0, 1) = 9;
  map.at(1, 1) = 9;
  const LabelMap out = relabel_contiguous(map);
  CHECK(out.at(0, 0) == 0);  // 5 occurs first
  CHECK(out.at(1, 0) == 0);
  CHECK(out.at(0, 1) == 1);
  CHECK(out.at(1, 1) == 1);
}

TEST_CASE("relabel_contiguous keeps an already-contiguous map identical") {
  const LabelMap map = testutil::random_partition(12, 9, 5, 31);
  const LabelMap out = relabel_contiguous(map);
  CHECK(out.labels == map.labels);
}

TEST_CASE("relabel_contiguous on a two-label checkerboard") {
  // 4x4 checkerboard of {3,7}; 3 sits at (0,0) so it becomes 0.
  LabelMap map = LabelMap::filled(4, 4, 0);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) map.at(x, y) = ((x + y) % 2 == 0) ? 3 : 7;
  const LabelMap out = relabel_contiguous(map);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const int32_t expected = ((x + y) % 2 == 0) ? 0 : 1;
      CAPTURE(x);
      CAPTURE(y);
      CHECK(out.at(x, y) == expected);
    }
}

TEST_CASE("relabel_contiguous is idempotent and validates for connected input") {
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    const LabelMap map = testutil::random_partition(16, 16, 7, seed);
    const LabelMap once = relabel_contiguous(map);
    const LabelMap twice = relabel_contiguous(once);
    CHECK(once.labels == twice.labels);
    CHECK(!validate(once).has_value());
  }
}

TEST_CASE("video segmentation validation") {
  VideoSegmentation seg;
  seg.frames.push_back(LabelMap::filled(3, 3, 0));
  seg.frames.push_back(LabelMap::filled(3, 3, 1));
  CHECK(!validate(seg).has_value());  // label 0 in frame 0, label 1 in frame 1
  seg.frames.push_back(LabelMap::filled(3, 3, 3));
  CHECK(validate(seg).has_value());  // label 2 missing everywhere
}

TEST_CASE("grayscale uses luma weights") {
  FrameImage img = FrameImage::zeros(1, 1, 3);
  img.data = {1.f, 0.5f, 0.25f};
  const auto gray = grayscale(img);
  CHECK(gray[0] == doctest::Approx(0.299 * 1.0 + 0.587 * 0.5 + 0.114 * 0.25));
}
