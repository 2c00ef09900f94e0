#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "vesselseg/checkpoint.hpp"
#include "vesselseg/rng.hpp"
#include "vesselseg/valve.hpp"

using namespace vesselseg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("vesselseg_ckpt_" + std::to_string(Rng(::getpid()).next_u64() % 1000000));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

NetworkSpec content_spec() {
  NetworkSpec spec;
  spec.num_classes = 4;
  spec.seg_channels = 2;
  return spec;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("checkpoint round trip reproduces logits bit for bit") {
  TempDir dir;
  auto net = build_network(content_spec(), 77);
  CheckpointMeta meta{.seed = 77, .steps = 1234, .final_loss = 0.25};
  save_checkpoint(net, meta, dir.file("net.vnet"));

  auto loaded = load_checkpoint(dir.file("net.vnet"));
  CHECK(loaded.meta == meta);
  CHECK(loaded.net.spec == net.spec);

  Rng rng(1);
  Tensor<float> img(1, 3, 16, 16);
  for (auto& v : img.data) v = rng.next_float();
  LabelMap map(1, 16, 16, 2);
  for (auto& l : map.labels) l = static_cast<uint8_t>(rng.uniform_int(0, 1));
  auto seg = encode_segmap<float>(map, 2);

  auto a = forward(net, img, &seg);
  auto b = forward(loaded.net, img, &seg);
  CHECK(a.data == b.data);
}

TEST_CASE("save load save is byte-identical") {
  TempDir dir;
  auto net = build_network(content_spec(), 5);
  CheckpointMeta meta{.seed = 5, .steps = 42, .final_loss = 1.0 / 3.0};
  save_checkpoint(net, meta, dir.file("a.vnet"));
  auto loaded = load_checkpoint(dir.file("a.vnet"));
  save_checkpoint(loaded.net, loaded.meta, dir.file("b.vnet"));
  CHECK(slurp(dir.file("a.vnet")) == slurp(dir.file("b.vnet")));
}

TEST_CASE("corrupted magic is rejected as not a checkpoint") {
  TempDir dir;
  auto net = build_network(content_spec(), 5);
  save_checkpoint(net, {}, dir.file("net.vnet"));
  auto bytes = slurp(dir.file("net.vnet"));
  bytes[0] = 'X';
  spit(dir.file("bad.vnet"), bytes);
  try {
    load_checkpoint(dir.file("bad.vnet"));
    FAIL("expected a checkpoint error");
  } catch (const CheckpointError& e) {
    CHECK(e.code() == CheckpointErrorCode::kBadMagic);
    CHECK(std::string(e.what()).find("not a checkpoint") != std::string::npos);
  }
}

TEST_CASE("unknown version is rejected") {
  TempDir dir;
  auto net = build_network(content_spec(), 5);
  save_checkpoint(net, {}, dir.file("net.vnet"));
  auto bytes = slurp(dir.file("net.vnet"));
  bytes[4] = 9;  // version field follows the 4-byte magic
  spit(dir.file("bad.vnet"), bytes);
  try {
    load_checkpoint(dir.file("bad.vnet"));
    FAIL("expected a checkpoint error");
  } catch (const CheckpointError& e) {
    CHECK(e.code() == CheckpointErrorCode::kBadVersion);
  }
}

TEST_CASE("architecture mismatch is a shape error") {
  TempDir dir;
  auto net = build_network(content_spec(), 5);
  save_checkpoint(net, {}, dir.file("net.vnet"));
  NetworkSpec expected = content_spec();
  expected.num_classes = 5;
  try {
    load_checkpoint(dir.file("net.vnet"), expected);
    FAIL("expected a checkpoint error");
  } catch (const CheckpointError& e) {
    CHECK(e.code() == CheckpointErrorCode::kShapeMismatch);
  }
  CHECK_NOTHROW(load_checkpoint(dir.file("net.vnet"), content_spec()));
}

TEST_CASE("truncated files are reported as truncated") {
  TempDir dir;
  auto net = build_network(content_spec(), 5);
  save_checkpoint(net, {}, dir.file("net.vnet"));
  auto bytes = slurp(dir.file("net.vnet"));
  spit(dir.file("cut.vnet"), bytes.substr(0, bytes.size() - 257));
  try {
    load_checkpoint(dir.file("cut.vnet"));
    FAIL("expected a checkpoint error");
  } catch (const CheckpointError& e) {
    CHECK(e.code() == CheckpointErrorCode::kTruncated);
  }
}

TEST_CASE("metadata survives exactly, including awkward doubles") {
  TempDir dir;
  auto net = build_network(content_spec(), 5);
  CheckpointMeta meta{.seed = 0xDEADBEEFULL, .steps = 6000, .final_loss = 0.1234567890123456789};
  save_checkpoint(net, meta, dir.file("net.vnet"));
  auto loaded = load_checkpoint(dir.file("net.vnet"));
  CHECK(loaded.meta.seed == meta.seed);
  CHECK(loaded.meta.steps == meta.steps);
  CHECK(loaded.meta.final_loss == meta.final_loss);
}

TEST_CASE("load counter ticks only on successful loads") {
  TempDir dir;
  auto net = build_network(content_spec(), 5);
  save_checkpoint(net, {}, dir.file("net.vnet"));
  const auto before = checkpoint_load_count();
  (void)load_checkpoint(dir.file("net.vnet"));
  CHECK(checkpoint_load_count() == before + 1);
  CHECK_THROWS(load_checkpoint(dir.file("missing.vnet")));
  CHECK(checkpoint_load_count() == before + 1);
}
