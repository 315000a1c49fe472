// Copyright 2026 The axps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axps/categories.hpp"
#include "axps/condition.hpp"
#include "axps/label_io.hpp"
#include "axps/label_map.hpp"
#include "axps/oracle.hpp"

namespace axps {

struct DatasetScene {
  std::string scene_id;
  ConditionTag condition;
  PanopticLabelMap gt;
  PanopticLabelMap pred;
};

inline std::string scene_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04zu", index);
  return buf;
}

/// `n` scenes from `base`, scene i seeded with mix(base.seed, i).
inline std::vector<DatasetScene> synth_dataset(std::size_t n, const oracle::SynthSpec& base,
                                               const CategoryTable& cats = CategoryTable::cityscapes()) {
  std::vector<DatasetScene> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto spec = base;
    spec.seed = oracle::mix_seed(base.seed) ^ oracle::mix_seed(i + 1);
    auto scene = oracle::generate_scene(spec, cats);
    out.push_back({scene_name(i), scene.tag, std::move(scene.gt), std::move(scene.pred)});
  }
  return out;
}

/// Lays out <root>/gt, <root>/pred, manifest.json and categories.json.
inline void write_dataset(const std::filesystem::path& root, const std::vector<DatasetScene>& scenes,
                          const CategoryTable& cats) {
  std::vector<SceneManifest> manifest;
  for (const auto& s : scenes) {
    save_label_map(s.gt, root / "gt" / (s.scene_id + ".png"));
    save_label_map(s.pred, root / "pred" / (s.scene_id + ".png"));
    manifest.push_back({s.scene_id, s.condition, s.scene_id + ".png", Split::test});
  }
  std::filesystem::create_directories(root / "gt");
  std::filesystem::create_directories(root / "pred");
  write_file(root / "manifest.json", dump_manifest(manifest));
  write_file(root / "categories.json", cats.to_json().dump(1) + "\n");
}

}  // namespace axps
