#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vesselseg/tensor.hpp"

namespace vesselseg {

// Four nested annotation levels. Level 1 separates vessel from background,
// level 2 splits the vessel into empty and filled, level 3 splits contents
// into liquid and solid phases, level 4 names the concrete material phase.
struct HierarchySpec {
  // classes[k] lists the class names of level k+1; index in the list is the
  // on-disk label value
  std::array<std::vector<std::string>, 4> classes;
  // collapse[k] maps a level-(k+2) label to its level-(k+1) label
  std::array<std::vector<uint8_t>, 3> collapse;

  int num_classes(int level) const;
  const std::vector<std::string>& level_classes(int level) const;
  int class_id(int level, const std::string& name) const;  // -1 when absent
  void validate() const;

  bool operator==(const HierarchySpec&) const = default;
};

// Level-4 class ids in the default taxonomy.
enum Phase : uint8_t {
  kBackground = 0,
  kVesselEmpty = 1,
  kLiquid = 2,
  kLiquidPhaseTwo = 3,
  kSuspension = 4,
  kFoam = 5,
  kSolid = 6,
  kPowder = 7,
  kGranular = 8,
  kBulk = 9,
};

HierarchySpec default_hierarchy();

LabelMap collapse_labels(const LabelMap& map, int from_level, int to_level,
                         const HierarchySpec& hierarchy);

}  // namespace vesselseg
