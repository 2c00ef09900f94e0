#include "vesselseg/scene_gen.hpp"

#include <algorithm>
#include <cmath>

#include "vesselseg/rng.hpp"

namespace vesselseg {

namespace {

float clamp01(float v) { return std::min(1.0f, std::max(0.0f, v)); }

Color scaled(const Color& c, float k) {
  return {clamp01(c[0] * k), clamp01(c[1] * k), clamp01(c[2] * k)};
}

Color lerp(const Color& a, const Color& b, float t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

float unit(uint64_t key, int a, int b) {
  return static_cast<float>(hash_unit(hash_mix(key, static_cast<uint64_t>(a) + 0x9177), b));
}

void phase_palette(uint8_t phase, Rng& rng, Color& base, Color& accent) {
  auto r = [&] { return static_cast<float>(rng.next_double()); };
  switch (phase) {
    case kLiquid:
      base = {0.08f + 0.15f * r(), 0.30f + 0.30f * r(), 0.55f + 0.35f * r()};
      accent = scaled(base, 0.55f);
      break;
    case kLiquidPhaseTwo:
      base = {0.62f + 0.28f * r(), 0.32f + 0.22f * r(), 0.04f + 0.12f * r()};
      accent = scaled(base, 0.60f);
      break;
    case kSuspension:
      base = {0.32f + 0.16f * r(), 0.38f + 0.16f * r(), 0.24f + 0.12f * r()};
      accent = scaled(base, 1.45f);
      break;
    case kFoam:
      base = {0.82f + 0.13f * r(), 0.80f + 0.13f * r(), 0.72f + 0.14f * r()};
      accent = scaled(base, 0.62f);
      break;
    case kSolid:
      base = {0.38f + 0.16f * r(), 0.40f + 0.15f * r(), 0.45f + 0.16f * r()};
      accent = scaled(base, 0.60f);
      break;
    case kPowder:
      base = {0.74f + 0.15f * r(), 0.64f + 0.15f * r(), 0.48f + 0.15f * r()};
      accent = scaled(base, 0.82f);
      break;
    case kGranular:
      base = {0.48f + 0.17f * r(), 0.33f + 0.12f * r(), 0.18f + 0.12f * r()};
      accent = scaled(base, 0.50f);
      break;
    default:  // kBulk
      base = {0.20f + 0.12f * r(), 0.20f + 0.12f * r(), 0.22f + 0.12f * r()};
      accent = scaled(base, 1.90f);
      break;
  }
}

// One texel of a material texture. The box coordinates orient gradients and
// keep patterns stable when the region moves.
Color phase_texel(uint8_t phase, const Color& base, const Color& accent, uint64_t key, int x, int y,
                  int y0, int box_h) {
  const float t = box_h > 1 ? static_cast<float>(y - y0) / static_cast<float>(box_h - 1) : 0.0f;
  Color c = base;
  switch (phase) {
    case kLiquid: {
      c = lerp(base, accent, 0.25f + 0.45f * t);
      const float n = (unit(key, x, y) - 0.5f) * 0.02f;
      c = {c[0] + n, c[1] + n, c[2] + n};
      if (y == y0) c = scaled(c, 0.82f);  // meniscus shadow
      break;
    }
    case kLiquidPhaseTwo: {
      c = lerp(base, accent, 0.2f + 0.5f * t * t);
      const float band = ((y / 2) % 2) ? 0.02f : -0.01f;
      c = {clamp01(c[0] + band), clamp01(c[1] + band), clamp01(c[2] + band)};
      if (y == y0) c = scaled(c, 0.85f);
      break;
    }
    case kSuspension: {
      const float streak = unit(key, x, 0);
      const float n = (unit(key, x, y) - 0.5f) * 0.06f;
      c = lerp(base, accent, 0.15f + 0.35f * t + 0.35f * streak);
      c = {c[0] + n, c[1] + n, c[2] + n};
      break;
    }
    case kFoam: {
      const float cell = unit(key, x / 3, y / 3);
      const float n = unit(key, x, y);
      c = lerp(base, accent, (cell > 0.55f ? 0.55f : 0.08f) + 0.25f * n);
      break;
    }
    case kSolid: {
      const float facet = unit(key, x / 5, (y - y0) / 6);
      c = lerp(base, accent, std::floor(facet * 4.0f) / 4.0f);
      const float n = (unit(key, x, y) - 0.5f) * 0.02f;
      c = {c[0] + n, c[1] + n, c[2] + n};
      break;
    }
    case kPowder: {
      const float n = (unit(key, x, y) - 0.5f) * 0.10f;
      c = lerp(base, accent, 0.5f);
      c = {c[0] + n, c[1] + n, c[2] + n};
      break;
    }
    case kGranular: {
      const float grain = unit(key, x / 2, y / 2);
      c = lerp(base, accent, grain);
      break;
    }
    default: {  // kBulk
      const bool seam = (x % 5 == 0) || ((y - y0) % 5 == 0);
      const float chunk = unit(key, x / 5, (y - y0) / 5);
      c = seam ? scaled(base, 0.45f) : lerp(base, accent, 0.2f + 0.5f * chunk);
      break;
    }
  }
  return {clamp01(c[0]), clamp01(c[1]), clamp01(c[2])};
}

// density order, bottom of the vessel first; foam floats on top
int stack_rank(uint8_t phase) {
  switch (phase) {
    case kBulk: return 0;
    case kGranular: return 1;
    case kPowder: return 2;
    case kSolid: return 3;
    case kSuspension: return 4;
    case kLiquidPhaseTwo: return 5;
    case kLiquid: return 6;
    default: return 7;  // kFoam
  }
}

int half_width_at(const SceneSpec& s, int y) {
  if (!s.rounded) {
    const double t = s.bottom_row == s.top_row
                         ? 0.0
                         : static_cast<double>(y - s.top_row) / (s.bottom_row - s.top_row);
    return static_cast<int>(
        std::lround(s.top_half_width + t * (s.bottom_half_width - s.top_half_width)));
  }
  const int r = s.corner_radius;
  const int dy = y - (s.bottom_row - r);
  if (dy <= 0) return s.top_half_width;
  return s.top_half_width - r +
         static_cast<int>(std::floor(std::sqrt(std::max(0.0, static_cast<double>(r) * r - static_cast<double>(dy) * dy))));
}

}  // namespace

SceneSpec make_scene_spec(uint64_t seed, int height, int width) {
  require(height >= 32 && width >= 32, "scene extent must be at least 32");
  require(height % 8 == 0 && width % 8 == 0, "scene extent must be divisible by 8");
  SceneSpec s;
  s.seed = seed;
  s.height = height;
  s.width = width;
  Rng rng(hash_mix(seed, 0x5CE7E));

  auto color_in = [&](float lo, float hi) {
    return Color{static_cast<float>(rng.uniform(lo, hi)), static_cast<float>(rng.uniform(lo, hi)),
                 static_cast<float>(rng.uniform(lo, hi))};
  };
  s.bg_top = color_in(0.52f, 0.78f);
  s.bg_bottom = color_in(0.26f, 0.50f);
  s.bg_tilt = static_cast<float>(rng.uniform(-0.25, 0.25));
  s.bg_noise = static_cast<float>(rng.uniform(0.01, 0.04));

  const int vheight = rng.uniform_int(height * 55 / 100, height * 85 / 100);
  s.top_row = rng.uniform_int(1, height - vheight - 2);
  s.bottom_row = s.top_row + vheight - 1;
  s.center_col = width / 2 + rng.uniform_int(-width / 10, width / 10);
  const int max_half = std::min(s.center_col - 1, width - 2 - s.center_col);

  s.rounded = rng.chance(0.5);
  s.bottom_half_width = std::min(max_half, rng.uniform_int(width * 18 / 100, width * 32 / 100));
  if (s.rounded) {
    s.top_half_width = s.bottom_half_width;
    s.corner_radius = rng.uniform_int(2, std::min(s.bottom_half_width - 2, vheight / 3));
  } else {
    s.top_half_width =
        std::min(max_half, std::max(width / 8, s.bottom_half_width + rng.uniform_int(-width / 16,
                                                                                     width / 8)));
    s.corner_radius = 0;
  }
  s.wall = rng.uniform_int(1, 2);
  s.glass_tint = {0.62f + 0.1f * static_cast<float>(rng.next_double()),
                  0.70f + 0.1f * static_cast<float>(rng.next_double()),
                  0.74f + 0.1f * static_cast<float>(rng.next_double())};
  s.glass_alpha = static_cast<float>(rng.uniform(0.68, 0.82));

  const int n_distract = rng.uniform_int(1, 4);
  for (int i = 0; i < n_distract; ++i) {
    DistractorSpec d;
    const int dh = rng.uniform_int(6, 16);
    const int dw = rng.uniform_int(6, 16);
    d.y0 = rng.uniform_int(0, height - dh - 1);
    d.x0 = rng.uniform_int(0, width - dw - 1);
    d.y1 = d.y0 + dh;
    d.x1 = d.x0 + dw;
    d.style = static_cast<uint8_t>(rng.uniform_int(kLiquid, kBulk));
    d.ellipse = rng.chance(0.5);
    phase_palette(d.style, rng, d.base, d.accent);
    s.distractors.push_back(d);
  }

  s.fill_frac = rng.chance(0.12) ? 0.0 : rng.uniform(0.25, 0.95);
  const int interior_rows = s.bottom_row - s.wall - s.top_row + 1;
  const int fill_rows = static_cast<int>(std::lround(s.fill_frac * interior_rows));
  if (fill_rows > 0) {
    int want = 1;
    const double roll = rng.next_double();
    if (roll > 0.5) want = 2;
    if (roll > 0.8) want = 3;
    const int n_bands = std::min(want, fill_rows);

    uint8_t pool[] = {kLiquid, kLiquidPhaseTwo, kSuspension, kFoam,
                      kSolid,  kPowder,         kGranular,   kBulk};
    for (int i = 7; i > 0; --i) std::swap(pool[i], pool[rng.uniform_int(0, i)]);
    std::vector<uint8_t> phases(pool, pool + n_bands);
    std::sort(phases.begin(), phases.end(),
              [](uint8_t a, uint8_t b) { return stack_rank(a) < stack_rank(b); });

    int rows_left = fill_rows;
    for (int i = 0; i < n_bands; ++i) {
      const int remaining = n_bands - i;
      int rows = rows_left;
      if (remaining > 1) {
        const int hi = rows_left - (remaining - 1);
        rows = std::clamp(static_cast<int>(std::lround(static_cast<double>(rows_left) / remaining *
                                                       rng.uniform(0.6, 1.4))),
                          1, hi);
      }
      BandSpec band;
      band.phase = phases[i];
      band.rows = rows;
      phase_palette(band.phase, rng, band.base, band.accent);
      s.bands.push_back(band);
      rows_left -= rows;
    }
  }
  return s;
}

Sample render_scene(const SceneSpec& s, const HierarchySpec& hierarchy) {
  require(s.height % 8 == 0 && s.width % 8 == 0, "scene extent must be divisible by 8");
  const int h = s.height, w = s.width;

  int fill_rows = 0;
  for (const auto& band : s.bands) {
    require(band.rows >= 1, "band thickness must be positive");
    fill_rows += band.rows;
  }
  const int content_bottom = s.bottom_row - s.wall;
  const int fill_top = content_bottom - fill_rows + 1;

  Sample sample;
  sample.image = Tensor<float>(1, 3, h, w);
  LabelMap level4(1, h, w, hierarchy.num_classes(4));

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // background gradient with a diagonal tilt and fine noise
      const float ty = clamp01((static_cast<float>(y) + s.bg_tilt * (x - w / 2)) / (h - 1));
      Color c = lerp(s.bg_top, s.bg_bottom, ty);
      const float n = (unit(s.seed, x, y + h) - 0.5f) * 2.0f * s.bg_noise;
      c = {clamp01(c[0] + n), clamp01(c[1] + n), clamp01(c[2] + n)};

      for (std::size_t i = 0; i < s.distractors.size(); ++i) {
        const auto& d = s.distractors[i];
        if (y < d.y0 || y >= d.y1 || x < d.x0 || x >= d.x1) continue;
        if (d.ellipse) {
          const float cy = 0.5f * (d.y0 + d.y1 - 1), cx = 0.5f * (d.x0 + d.x1 - 1);
          const float ry = 0.5f * (d.y1 - d.y0), rx = 0.5f * (d.x1 - d.x0);
          const float dy = (y - cy) / ry, dx = (x - cx) / rx;
          if (dy * dy + dx * dx > 1.0f) continue;
        }
        c = phase_texel(d.style, d.base, d.accent, hash_mix(s.seed, 0xD0 + i), x, y, d.y0,
                        d.y1 - d.y0);
      }

      uint8_t label = kBackground;
      const int half = half_width_at(s, y);
      const bool in_silhouette =
          y >= s.top_row && y <= s.bottom_row && std::abs(x - s.center_col) <= half;
      if (in_silhouette) {
        label = kVesselEmpty;
        const bool in_interior =
            y <= content_bottom && std::abs(x - s.center_col) <= half - s.wall;
        if (in_interior && y >= fill_top) {
          // walk the band stack from the bottom row upward
          int rows_up = content_bottom - y;
          for (std::size_t b = 0; b < s.bands.size(); ++b) {
            if (rows_up < s.bands[b].rows) {
              const auto& band = s.bands[b];
              int y0 = content_bottom + 1;  // top row of band b
              for (std::size_t k = 0; k <= b; ++k) y0 -= s.bands[k].rows;
              Color t = phase_texel(band.phase, band.base, band.accent,
                                    hash_mix(s.seed, 0xB0 + b), x, y, y0, band.rows);
              c = lerp(t, s.glass_tint, 0.08f);
              label = band.phase;
              break;
            }
            rows_up -= s.bands[b].rows;
          }
        } else if (in_interior) {
          c = lerp(c, s.glass_tint, 1.0f - s.glass_alpha);  // see-through headspace
        } else {
          c = lerp(c, s.glass_tint, 0.55f);  // wall
        }
        const int highlight = s.center_col - half / 2;
        if (x == highlight || x == highlight + 1) {
          c = {clamp01(c[0] + 0.07f), clamp01(c[1] + 0.07f), clamp01(c[2] + 0.07f)};
        }
      }

      for (int ch = 0; ch < 3; ++ch) {
        // byte-grid quantization so png export and re-import are lossless
        const float q = std::round(clamp01(c[ch]) * 255.0f) / 255.0f;
        sample.image.at(0, ch, y, x) = q;
      }
      level4.at(0, y, x) = label;
    }
  }

  sample.labels[3] = level4;
  sample.labels[2] = collapse_labels(level4, 4, 3, hierarchy);
  sample.labels[1] = collapse_labels(level4, 4, 2, hierarchy);
  sample.labels[0] = collapse_labels(level4, 4, 1, hierarchy);
  return sample;
}

Sample generate_scene(uint64_t seed, int height, int width) {
  const HierarchySpec hierarchy = default_hierarchy();
  return render_scene(make_scene_spec(seed, height, width), hierarchy);
}

}  // namespace vesselseg
