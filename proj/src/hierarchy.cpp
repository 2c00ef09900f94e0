#include "vesselseg/hierarchy.hpp"

#include <string>

namespace vesselseg {

int HierarchySpec::num_classes(int level) const {
  require(level >= 1 && level <= 4, "hierarchy level must be in 1..4");
  return static_cast<int>(classes[level - 1].size());
}

const std::vector<std::string>& HierarchySpec::level_classes(int level) const {
  require(level >= 1 && level <= 4, "hierarchy level must be in 1..4");
  return classes[level - 1];
}

int HierarchySpec::class_id(int level, const std::string& name) const {
  const auto& list = level_classes(level);
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void HierarchySpec::validate() const {
  for (int level = 1; level <= 4; ++level) {
    require(num_classes(level) >= 2, "hierarchy level has fewer than 2 classes");
  }
  for (int k = 0; k < 3; ++k) {
    // collapse[k] must be total on level k+2 and land inside level k+1
    require(collapse[k].size() == classes[k + 1].size(),
            "collapse map does not cover its source level");
    for (uint8_t target : collapse[k]) {
      require(target < classes[k].size(), "collapse map target out of range");
    }
  }
}

HierarchySpec default_hierarchy() {
  HierarchySpec h;
  h.classes[0] = {"background", "vessel"};
  h.classes[1] = {"background", "empty", "filled"};
  h.classes[2] = {"background", "empty", "liquid", "solid"};
  h.classes[3] = {"background", "vessel",   "liquid", "liquid_phase_two", "suspension",
                  "foam",       "solid",    "powder", "granular",         "bulk"};
  h.collapse[0] = {0, 1, 1};            // empty, filled -> vessel
  h.collapse[1] = {0, 1, 2, 2};         // liquid, solid -> filled
  h.collapse[2] = {0, 1, 2, 2, 2, 3, 3, 3, 3, 3};
  h.validate();
  return h;
}

LabelMap collapse_labels(const LabelMap& map, int from_level, int to_level,
                         const HierarchySpec& hierarchy) {
  hierarchy.validate();
  require(from_level > to_level, "collapse must go from a finer to a coarser level");
  require(to_level >= 1 && from_level <= 4, "hierarchy level must be in 1..4");
  require(map.num_classes == hierarchy.num_classes(from_level),
          "label map class count does not match its level");

  LabelMap out = map;
  for (int level = from_level; level > to_level; --level) {
    const auto& step = hierarchy.collapse[level - 2];
    for (auto& label : out.labels) {
      require(label < step.size(), "label map contains an unknown class id");
      label = step[label];
    }
  }
  out.num_classes = hierarchy.num_classes(to_level);
  return out;
}

}  // namespace vesselseg
