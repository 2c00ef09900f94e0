#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "vesselseg/hierarchy.hpp"
#include "vesselseg/rng.hpp"
#include "vesselseg/scene_gen.hpp"

using namespace vesselseg;

TEST_CASE("default hierarchy is a valid taxonomy") {
  const auto h = default_hierarchy();
  CHECK(h.num_classes(1) == 2);
  CHECK(h.num_classes(2) == 3);
  CHECK(h.num_classes(3) == 4);
  CHECK(h.num_classes(4) == 10);
  CHECK(h.class_id(4, "powder") == kPowder);
  CHECK(h.class_id(3, "solid") == 3);
  CHECK(h.class_id(2, "filled") == 2);
  CHECK(h.class_id(1, "vessel") == 1);
  CHECK(h.class_id(4, "no_such_phase") == -1);
}

TEST_CASE("single collapse steps follow the taxonomy") {
  const auto h = default_hierarchy();
  LabelMap l4(1, 1, 3, 10);
  l4.labels = {kPowder, kSuspension, kFoam};
  auto l3 = collapse_labels(l4, 4, 3, h);
  CHECK(l3.labels[0] == h.class_id(3, "solid"));
  CHECK(l3.labels[1] == h.class_id(3, "liquid"));
  CHECK(l3.labels[2] == h.class_id(3, "solid"));
  CHECK(l3.num_classes == 4);
}

TEST_CASE("collapse composition equals the direct multi-step collapse") {
  const auto h = default_hierarchy();
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    LabelMap l4(1, 8, 8, 10);
    for (auto& l : l4.labels) l = static_cast<uint8_t>(rng.uniform_int(0, 9));
    auto two_steps = collapse_labels(collapse_labels(l4, 4, 3, h), 3, 2, h);
    auto one_call = collapse_labels(l4, 4, 2, h);
    CHECK(two_steps.labels == one_call.labels);
    CHECK(two_steps.num_classes == one_call.num_classes);
  }
}

TEST_CASE("collapse rejects unknown class ids and bad level orders") {
  const auto h = default_hierarchy();
  LabelMap bad(1, 1, 1, 10);
  bad.labels = {200};
  CHECK_THROWS_AS(collapse_labels(bad, 4, 3, h), ShapeError);
  LabelMap ok(1, 1, 1, 4);
  CHECK_THROWS_AS(collapse_labels(ok, 3, 3, h), ShapeError);
  CHECK_THROWS_AS(collapse_labels(ok, 2, 3, h), ShapeError);
}

TEST_CASE("scenes are deterministic per seed") {
  auto a = generate_scene(1234);
  auto b = generate_scene(1234);
  auto c = generate_scene(1235);
  CHECK(a.image.data == b.image.data);
  for (int level = 0; level < 4; ++level) CHECK(a.labels[level].labels == b.labels[level].labels);
  CHECK(a.image.data != c.image.data);
}

TEST_CASE("empty vessels have no filled pixels on any level") {
  // find seeds whose fill fraction is zero and check the label stack
  int found = 0;
  for (uint64_t seed = 0; seed < 200 && found < 5; ++seed) {
    auto spec = make_scene_spec(seed);
    if (spec.fill_frac != 0.0) continue;
    found++;
    CHECK(spec.bands.empty());
    auto sample = render_scene(spec, default_hierarchy());
    for (uint8_t l : sample.labels[1].labels) CHECK(l != 2);       // level 2: no "filled"
    for (uint8_t l : sample.labels[2].labels) CHECK(l <= 1);       // level 3: bg/empty only
    for (uint8_t l : sample.labels[3].labels) CHECK(l <= 1);       // level 4: bg/vessel only
  }
  REQUIRE(found == 5);
}

TEST_CASE("generated label stacks collapse consistently") {
  const auto h = default_hierarchy();
  for (uint64_t seed = 0; seed < 300; ++seed) {
    auto sample = generate_scene(seed, 32, 32);
    CHECK(collapse_labels(sample.labels[3], 4, 3, h).labels == sample.labels[2].labels);
    CHECK(collapse_labels(sample.labels[2], 3, 2, h).labels == sample.labels[1].labels);
    CHECK(collapse_labels(sample.labels[1], 2, 1, h).labels == sample.labels[0].labels);
  }
}

TEST_CASE("content never leaks outside the vessel region") {
  for (uint64_t seed = 500; seed < 560; ++seed) {
    auto sample = generate_scene(seed);
    for (size_t p = 0; p < sample.labels[0].labels.size(); ++p) {
      for (int level = 1; level < 4; ++level) {
        if (sample.labels[level].labels[p] != kBackground) {
          CHECK(sample.labels[0].labels[p] == 1);
        }
      }
    }
  }
}

TEST_CASE("pixel values stay inside the unit byte grid") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto sample = generate_scene(seed);
    for (float v : sample.image.data) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
      const float scaled = v * 255.0f;
      CHECK(std::abs(scaled - std::round(scaled)) < 1e-3f);
    }
  }
}

TEST_CASE("bands tile the filled region exactly") {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    auto spec = make_scene_spec(seed);
    const int interior_rows = spec.bottom_row - spec.wall - spec.top_row + 1;
    const int fill_rows = static_cast<int>(std::lround(spec.fill_frac * interior_rows));
    int total = 0;
    for (const auto& band : spec.bands) {
      CHECK(band.rows >= 1);
      total += band.rows;
    }
    CHECK(total == fill_rows);
    if (spec.fill_frac == 0.0) CHECK(spec.bands.empty());
  }
}

TEST_CASE("every phase shows up often enough across 500 scenes") {
  std::map<int, int> scenes_with_class;
  const int count = 500;
  for (uint64_t seed = 0; seed < count; ++seed) {
    auto sample = generate_scene(seed, 32, 32);
    std::set<uint8_t> present(sample.labels[3].labels.begin(), sample.labels[3].labels.end());
    for (uint8_t cls : present) scenes_with_class[cls]++;
  }
  for (int cls = 0; cls < 10; ++cls) {
    INFO("class ", cls, " appears in ", scenes_with_class[cls], " of ", count, " scenes");
    CHECK(scenes_with_class[cls] >= count * 2 / 100);
  }
}
