#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vesselseg/hierarchy.hpp"
#include "vesselseg/scene_gen.hpp"

namespace vesselseg {

struct Dataset {
  HierarchySpec hierarchy;
  std::vector<std::string> ids;
  std::vector<Sample> samples;            // parallel to ids
  std::array<bool, 4> has_level{true, true, true, true};

  int size() const { return static_cast<int>(samples.size()); }
};

struct LoadIssue {
  std::string id;
  std::string message;
};

struct LoadReport {
  std::vector<LoadIssue> rejected;   // samples dropped from the dataset
  std::vector<LoadIssue> warnings;   // kept, but something looked off
};

Dataset generate_dataset(int count, uint64_t base_seed, int height = 64, int width = 64);

// Writes images/<id>.png, labels/level{1..4}/<id>.png and hierarchy.json.
void export_dataset(const Dataset& dataset, const std::string& dir);

// Reads the same layout back. Absent level directories leave that level out;
// samples with bad extents or label values are dropped and reported; collapse
// inconsistencies between the levels present are reported as warnings.
Dataset load_dataset(const std::string& dir, LoadReport* report = nullptr);

}  // namespace vesselseg
