#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vesselseg/hierarchy.hpp"
#include "vesselseg/tensor.hpp"

namespace vesselseg {

using Color = std::array<float, 3>;

struct BandSpec {
  uint8_t phase = kLiquid;  // level-4 class id
  int rows = 0;             // thickness in interior rows
  Color base{};
  Color accent{};
};

struct DistractorSpec {
  int y0 = 0, x0 = 0, y1 = 0, x1 = 0;  // half-open box
  uint8_t style = kLiquid;             // which phase texture it imitates
  bool ellipse = false;
  Color base{};
  Color accent{};
};

// Everything needed to render one scene; make_scene_spec draws it from a seed
// and render_scene is a pure function of it.
struct SceneSpec {
  uint64_t seed = 0;
  int height = 64;
  int width = 64;

  Color bg_top{};
  Color bg_bottom{};
  float bg_tilt = 0.0f;
  float bg_noise = 0.02f;
  std::vector<DistractorSpec> distractors;

  bool rounded = false;  // rounded rectangle silhouette, else trapezoid
  int top_row = 0, bottom_row = 0;
  int center_col = 0;
  int top_half_width = 0, bottom_half_width = 0;
  int corner_radius = 0;
  int wall = 1;
  Color glass_tint{};
  float glass_alpha = 0.75f;  // how much background shows through the vessel

  double fill_frac = 0.0;
  std::vector<BandSpec> bands;  // bottom band first; rows sum to the filled rows
};

struct Sample {
  Tensor<float> image;               // [1,3,H,W] in [0,1], quantized to the byte grid
  std::array<LabelMap, 4> labels;    // levels 1..4
};

SceneSpec make_scene_spec(uint64_t seed, int height = 64, int width = 64);
Sample render_scene(const SceneSpec& spec, const HierarchySpec& hierarchy);
Sample generate_scene(uint64_t seed, int height = 64, int width = 64);

}  // namespace vesselseg
