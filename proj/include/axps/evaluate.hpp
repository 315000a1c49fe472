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

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "axps/archive.hpp"
#include "axps/categories.hpp"
#include "axps/error.hpp"
#include "axps/label_io.hpp"
#include "axps/matching.hpp"
#include "axps/metrics.hpp"

namespace axps {

struct SceneFault {
  std::string scene_id;
  std::string reason;

  friend bool operator==(const SceneFault&, const SceneFault&) = default;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must not throw.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Width and height from a PNG IHDR without decoding pixels.
inline std::pair<std::uint32_t, std::uint32_t> png_dimensions(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 24 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(Errc::malformed_png, "png: missing PNG signature");
  }
  auto be32 = [&](std::size_t at) {
    return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
           (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
  };
  return {be32(16), be32(20)};
}

// Withheld ground truth: a root directory plus the manifest that indexes it.
class GroundTruth {
 public:
  GroundTruth(std::filesystem::path root, std::vector<SceneManifest> scenes, CategoryTable cats)
      : root_(std::move(root)), scenes_(std::move(scenes)), cats_(std::move(cats)) {}

  const std::vector<SceneManifest>& scenes() const noexcept { return scenes_; }
  const CategoryTable& categories() const noexcept { return cats_; }
  const std::filesystem::path& root() const noexcept { return root_; }

  std::filesystem::path png_path(const SceneManifest& scene) const { return root_ / scene.gt_path; }

  DecodedLabelMap load(const SceneManifest& scene) const { return load_label_map(png_path(scene), cats_); }

  std::pair<std::uint32_t, std::uint32_t> dimensions(const SceneManifest& scene) const {
    return png_dimensions(read_file_bytes(png_path(scene)));
  }

 private:
  std::filesystem::path root_;
  std::vector<SceneManifest> scenes_;
  CategoryTable cats_;
};

/// Upload-format checks: one decodable prediction per manifest scene, no
/// extras, dimensions equal to the ground truth, categories in the taxonomy.
/// With `reveal_gt` false, faults never quote ground-truth properties. A
/// GroundTruth with an empty root skips the dimension check.
inline std::vector<SceneFault> validate_submission(const SubmissionArchive& archive, const GroundTruth& gt,
                                                   unsigned threads = 1, bool reveal_gt = true) {
  std::vector<SceneFault> faults;
  for (const auto& [scene, reason] : archive.layout_faults()) faults.push_back({scene, reason});

  std::set<std::string> expected;
  for (const auto& s : gt.scenes()) expected.insert(s.scene_id);
  for (const auto& id : archive.scene_ids()) {
    if (!expected.count(id)) faults.push_back({id, "unexpected prediction (scene not in manifest)"});
  }

  const auto& scenes = gt.scenes();
  std::vector<std::optional<SceneFault>> per_scene(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    const auto& scene = scenes[i];
    try {
      if (!archive.has_png(scene.scene_id)) {
        per_scene[i] = SceneFault{scene.scene_id, "missing prediction"};
        return;
      }
      if (!archive.has_sidecar(scene.scene_id)) {
        per_scene[i] = SceneFault{scene.scene_id, "missing segments sidecar"};
        return;
      }
      const auto files = archive.read(scene.scene_id);
      const auto decoded = decode_label_map(files.png, files.segments_json, gt.categories());
      if (gt.root().empty()) return;
      std::pair<std::uint32_t, std::uint32_t> expected_dims;
      try {
        expected_dims = gt.dimensions(scene);
      } catch (const Error&) {
        per_scene[i] = SceneFault{scene.scene_id, "ground truth unavailable"};
        return;
      }
      if (expected_dims != std::pair(decoded.map.width, decoded.map.height)) {
        std::string reason = "dimension mismatch: prediction is " + std::to_string(decoded.map.width) + "x" +
                             std::to_string(decoded.map.height);
        if (reveal_gt) {
          reason += ", ground truth is " + std::to_string(expected_dims.first) + "x" +
                    std::to_string(expected_dims.second);
        }
        per_scene[i] = SceneFault{scene.scene_id, reason};
      }
    } catch (const std::exception& e) {
      per_scene[i] = SceneFault{scene.scene_id, e.what()};
    }
  });
  for (auto& f : per_scene) {
    if (f) faults.push_back(std::move(*f));
  }
  return faults;
}

struct Evaluation {
  std::optional<ScoreReport> report;
  PoolMap pools;
  std::vector<SceneFault> faults;
  std::vector<SceneFault> warnings;
};

/// Decodes, matches and pools every manifest scene, then assembles the
/// report. Any scene fault suppresses the report. The result does not depend
/// on the thread count.
inline Evaluation evaluate(const GroundTruth& gt, const SubmissionArchive& predictions, const WeightConfig& weights,
                           unsigned threads = 1) {
  const auto& scenes = gt.scenes();
  struct Outcome {
    std::optional<ClassScoreTable> classes;
    std::optional<SceneFault> fault;
    std::vector<std::string> warnings;
  };
  std::vector<Outcome> outcomes(scenes.size());

  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    const auto& scene = scenes[i];
    auto& out = outcomes[i];
    try {
      auto truth = gt.load(scene);
      for (auto& w : truth.warnings) out.warnings.push_back("ground truth: " + w);
      if (!predictions.has_png(scene.scene_id)) {
        out.fault = SceneFault{scene.scene_id, "missing prediction"};
        return;
      }
      const auto files = predictions.read(scene.scene_id);
      auto pred = decode_label_map(files.png, files.segments_json, gt.categories());
      for (auto& w : pred.warnings) out.warnings.push_back("prediction: " + w);
      out.classes = tally(match(truth.map, pred.map, gt.categories()));
    } catch (const std::exception& e) {
      out.fault = SceneFault{scene.scene_id, e.what()};
    }
  });

  Evaluation result;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    auto& out = outcomes[i];
    for (auto& w : out.warnings) result.warnings.push_back({scenes[i].scene_id, std::move(w)});
    if (out.fault) {
      result.faults.push_back(std::move(*out.fault));
      continue;
    }
    ConditionPool scene;
    scene.classes = std::move(*out.classes);
    scene.n_scenes = 1;
    result.pools[scenes[i].condition] += scene;
  }
  std::set<std::string> expected;
  for (const auto& s : scenes) expected.insert(s.scene_id);
  for (const auto& id : predictions.scene_ids()) {
    if (!expected.count(id)) result.faults.push_back({id, "unexpected prediction (scene not in manifest)"});
  }
  if (!result.faults.empty()) return result;
  if (scenes.empty()) {
    result.faults.push_back({"", "manifest lists no scenes"});
    return result;
  }
  try {
    result.report = build_report(result.pools, weights);
  } catch (const Error& e) {
    result.faults.push_back({"", e.what()});
  }
  return result;
}

}  // namespace axps
