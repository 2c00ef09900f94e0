#include "vesselseg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "vesselseg/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vesselseg {

namespace {

std::string pad_id(uint64_t value) {
  std::string s = std::to_string(value);
  while (s.size() < 6) s.insert(s.begin(), '0');
  return s;
}

json hierarchy_to_json(const HierarchySpec& h) {
  json out;
  for (int level = 1; level <= 4; ++level) {
    out["levels"].push_back({{"level", level}, {"classes", h.level_classes(level)}});
  }
  out["collapse"]["2_to_1"] = h.collapse[0];
  out["collapse"]["3_to_2"] = h.collapse[1];
  out["collapse"]["4_to_3"] = h.collapse[2];
  return out;
}

HierarchySpec hierarchy_from_json(const json& j) {
  HierarchySpec h;
  if (!j.contains("levels") || !j["levels"].is_array() || j["levels"].size() != 4) {
    throw std::runtime_error("hierarchy manifest must list exactly 4 levels");
  }
  for (const auto& entry : j["levels"]) {
    const int level = entry.at("level").get<int>();
    if (level < 1 || level > 4) throw std::runtime_error("hierarchy manifest level out of range");
    h.classes[level - 1] = entry.at("classes").get<std::vector<std::string>>();
  }
  h.collapse[0] = j.at("collapse").at("2_to_1").get<std::vector<uint8_t>>();
  h.collapse[1] = j.at("collapse").at("3_to_2").get<std::vector<uint8_t>>();
  h.collapse[2] = j.at("collapse").at("4_to_3").get<std::vector<uint8_t>>();
  h.validate();
  return h;
}

ImageU8 image_to_u8(const Tensor<float>& img) {
  ImageU8 out;
  out.h = img.h;
  out.w = img.w;
  out.channels = 3;
  out.data.resize(static_cast<size_t>(img.h) * img.w * 3);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const float v = std::min(1.0f, std::max(0.0f, img.at(0, c, y, x)));
        out.at(y, x, c) = static_cast<uint8_t>(std::lround(v * 255.0f));
      }
    }
  }
  return out;
}

Tensor<float> image_from_u8(const ImageU8& img) {
  Tensor<float> out(1, 3, img.h, img.w);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      for (int c = 0; c < 3; ++c) out.at(0, c, y, x) = static_cast<float>(img.at(y, x, c)) / 255.0f;
    }
  }
  return out;
}

ImageU8 labels_to_u8(const LabelMap& map) {
  ImageU8 out;
  out.h = map.h;
  out.w = map.w;
  out.channels = 1;
  out.data.assign(map.labels.begin(), map.labels.end());
  return out;
}

}  // namespace

Dataset generate_dataset(int count, uint64_t base_seed, int height, int width) {
  require(count >= 0, "dataset size must be non-negative");
  Dataset ds;
  ds.hierarchy = default_hierarchy();
  ds.ids.reserve(count);
  ds.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    const uint64_t seed = base_seed + static_cast<uint64_t>(i);
    ds.ids.push_back(pad_id(seed));
    ds.samples.push_back(generate_scene(seed, height, width));
  }
  return ds;
}

void export_dataset(const Dataset& dataset, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root / "images");
  for (int level = 1; level <= 4; ++level) {
    if (dataset.has_level[level - 1]) {
      fs::create_directories(root / "labels" / ("level" + std::to_string(level)));
    }
  }
  {
    std::ofstream out(root / "hierarchy.json");
    if (!out) throw std::runtime_error("cannot write hierarchy manifest in '" + dir + "'");
    out << hierarchy_to_json(dataset.hierarchy).dump(2) << '\n';
  }
  for (int i = 0; i < dataset.size(); ++i) {
    const auto& id = dataset.ids[i];
    const auto& sample = dataset.samples[i];
    write_png((root / "images" / (id + ".png")).string(), image_to_u8(sample.image));
    for (int level = 1; level <= 4; ++level) {
      if (!dataset.has_level[level - 1]) continue;
      write_png((root / "labels" / ("level" + std::to_string(level)) / (id + ".png")).string(),
                labels_to_u8(sample.labels[level - 1]));
    }
  }
}

Dataset load_dataset(const std::string& dir, LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  const fs::path root(dir);

  Dataset ds;
  if (fs::exists(root / "hierarchy.json")) {
    std::ifstream in(root / "hierarchy.json");
    json j;
    try {
      in >> j;
      ds.hierarchy = hierarchy_from_json(j);
    } catch (const std::exception& e) {
      throw std::runtime_error("bad hierarchy manifest in '" + dir + "': " + e.what());
    }
  } else {
    ds.hierarchy = default_hierarchy();
    rep.warnings.push_back({"", "no hierarchy.json, assuming the default taxonomy"});
  }

  for (int level = 1; level <= 4; ++level) {
    ds.has_level[level - 1] = fs::is_directory(root / "labels" / ("level" + std::to_string(level)));
  }

  std::vector<std::string> ids;
  if (fs::is_directory(root / "images")) {
    for (const auto& entry : fs::directory_iterator(root / "images")) {
      if (entry.path().extension() == ".png") ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());

  for (const auto& id : ids) {
    Sample sample;
    try {
      sample.image = image_from_u8(read_png_rgb((root / "images" / (id + ".png")).string()));
    } catch (const PngError& e) {
      rep.rejected.push_back({id, e.what()});
      continue;
    }

    bool ok = true;
    for (int level = 1; level <= 4 && ok; ++level) {
      if (!ds.has_level[level - 1]) continue;
      const fs::path path = root / "labels" / ("level" + std::to_string(level)) / (id + ".png");
      ImageU8 raw;
      try {
        raw = read_png_gray(path.string());
      } catch (const PngError& e) {
        rep.rejected.push_back({id, e.what()});
        ok = false;
        break;
      }
      if (raw.h != sample.image.h || raw.w != sample.image.w) {
        rep.rejected.push_back({id, "level " + std::to_string(level) +
                                        " label extent does not match the image"});
        ok = false;
        break;
      }
      const int cardinality = ds.hierarchy.num_classes(level);
      LabelMap map(1, raw.h, raw.w, cardinality);
      for (size_t p = 0; p < raw.data.size(); ++p) {
        if (raw.data[p] >= cardinality) {
          rep.rejected.push_back({id, "level " + std::to_string(level) + " label value " +
                                          std::to_string(raw.data[p]) + " is out of range"});
          ok = false;
          break;
        }
        map.labels[p] = raw.data[p];
      }
      if (ok) sample.labels[level - 1] = std::move(map);
    }
    if (!ok) continue;

    // cross-level agreement is advisory for ingested data
    for (int fine = 4; fine >= 2; --fine) {
      const int coarse = fine - 1;
      if (!ds.has_level[fine - 1] || !ds.has_level[coarse - 1]) continue;
      const LabelMap derived = collapse_labels(sample.labels[fine - 1], fine, coarse, ds.hierarchy);
      size_t bad = 0;
      for (size_t p = 0; p < derived.labels.size(); ++p) {
        if (derived.labels[p] != sample.labels[coarse - 1].labels[p]) bad++;
      }
      if (bad > 0) {
        rep.warnings.push_back({id, "levels " + std::to_string(fine) + " and " +
                                        std::to_string(coarse) + " disagree at " +
                                        std::to_string(bad) + " pixels"});
      }
    }

    ds.ids.push_back(id);
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

}  // namespace vesselseg
