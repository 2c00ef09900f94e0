#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "vesselseg/dataset.hpp"
#include "vesselseg/png_io.hpp"
#include "vesselseg/rng.hpp"

using namespace vesselseg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("vesselseg_data_" + std::to_string(Rng(::getpid()).next_u64() % 1000000));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("empty directory loads as an empty dataset") {
  TempDir dir;
  LoadReport report;
  auto ds = load_dataset(dir.str(), &report);
  CHECK(ds.size() == 0);
  CHECK(report.rejected.empty());
}

TEST_CASE("exported datasets load back identically") {
  TempDir dir;
  auto ds = generate_dataset(6, 42, 32, 32);
  export_dataset(ds, dir.str());

  LoadReport report;
  auto loaded = load_dataset(dir.str(), &report);
  CHECK(report.rejected.empty());
  CHECK(report.warnings.empty());
  REQUIRE(loaded.size() == ds.size());
  CHECK(loaded.hierarchy == ds.hierarchy);
  CHECK(loaded.ids == ds.ids);
  for (int i = 0; i < ds.size(); ++i) {
    CHECK(loaded.samples[i].image.data == ds.samples[i].image.data);
    for (int level = 0; level < 4; ++level) {
      CHECK(loaded.samples[i].labels[level].labels == ds.samples[i].labels[level].labels);
      CHECK(loaded.samples[i].labels[level].num_classes == ds.samples[i].labels[level].num_classes);
    }
  }
}

TEST_CASE("a missing level directory leaves that level absent") {
  TempDir dir;
  auto ds = generate_dataset(3, 7, 32, 32);
  export_dataset(ds, dir.str());
  fs::remove_all(dir.path / "labels" / "level4");

  LoadReport report;
  auto loaded = load_dataset(dir.str(), &report);
  CHECK(loaded.size() == 3);
  CHECK(loaded.has_level[0]);
  CHECK(loaded.has_level[1]);
  CHECK(loaded.has_level[2]);
  CHECK_FALSE(loaded.has_level[3]);
  CHECK(report.rejected.empty());
}

TEST_CASE("extent mismatches reject the sample with a report entry") {
  TempDir dir;
  auto ds = generate_dataset(3, 11, 32, 32);
  export_dataset(ds, dir.str());

  // shrink one level-2 label file
  ImageU8 small;
  small.h = 16;
  small.w = 16;
  small.channels = 1;
  small.data.assign(16 * 16, 0);
  write_png((dir.path / "labels" / "level2" / (ds.ids[1] + ".png")).string(), small);

  LoadReport report;
  auto loaded = load_dataset(dir.str(), &report);
  CHECK(loaded.size() == 2);
  REQUIRE(report.rejected.size() == 1);
  CHECK(report.rejected[0].id == ds.ids[1]);
  CHECK(report.rejected[0].message.find("extent") != std::string::npos);
}

TEST_CASE("out-of-range label values reject the sample with a report entry") {
  TempDir dir;
  auto ds = generate_dataset(2, 19, 32, 32);
  export_dataset(ds, dir.str());

  ImageU8 bad;
  bad.h = 32;
  bad.w = 32;
  bad.channels = 1;
  bad.data.assign(32 * 32, 250);  // far beyond any level cardinality
  write_png((dir.path / "labels" / "level1" / (ds.ids[0] + ".png")).string(), bad);

  LoadReport report;
  auto loaded = load_dataset(dir.str(), &report);
  CHECK(loaded.size() == 1);
  REQUIRE(report.rejected.size() == 1);
  CHECK(report.rejected[0].id == ds.ids[0]);
  CHECK(report.rejected[0].message.find("out of range") != std::string::npos);
}

TEST_CASE("cross-level disagreements are soft warnings") {
  TempDir dir;
  auto ds = generate_dataset(2, 23, 32, 32);
  export_dataset(ds, dir.str());

  // flip every level-1 pixel to vessel; collapse of level 2 will disagree on
  // the background
  ImageU8 all_vessel;
  all_vessel.h = 32;
  all_vessel.w = 32;
  all_vessel.channels = 1;
  all_vessel.data.assign(32 * 32, 1);
  write_png((dir.path / "labels" / "level1" / (ds.ids[0] + ".png")).string(), all_vessel);

  LoadReport report;
  auto loaded = load_dataset(dir.str(), &report);
  CHECK(loaded.size() == 2);
  CHECK(report.rejected.empty());
  bool warned = false;
  for (const auto& w : report.warnings) {
    if (w.id == ds.ids[0] && w.message.find("disagree") != std::string::npos) warned = true;
  }
  CHECK(warned);
}

TEST_CASE("generate_dataset is deterministic and seeds scenes independently") {
  auto a = generate_dataset(4, 100, 32, 32);
  auto b = generate_dataset(4, 100, 32, 32);
  for (int i = 0; i < 4; ++i) CHECK(a.samples[i].image.data == b.samples[i].image.data);

  // overlapping ranges produce the same scene for the same seed
  auto c = generate_dataset(2, 102, 32, 32);
  CHECK(c.samples[0].image.data == a.samples[2].image.data);
  CHECK(c.ids[0] == a.ids[2]);
}
