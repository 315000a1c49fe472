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
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "axps/categories.hpp"
#include "axps/error.hpp"

namespace axps {

struct SegmentInfo {
  SegmentId id = 0;
  CategoryId category_id = 0;
  std::uint64_t area = 0;

  friend bool operator==(const SegmentInfo&, const SegmentInfo&) = default;
};

// Dense panoptic labeling: a row-major grid of segment ids and the metadata of
// every non-void segment present in it. `segments` is kept sorted by id.
struct PanopticLabelMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  SegmentId void_id = 0;
  std::vector<SegmentId> ids;
  std::vector<SegmentInfo> segments;

  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width) * height; }

  SegmentId at(std::uint32_t x, std::uint32_t y) const { return ids[static_cast<std::size_t>(y) * width + x]; }

  const SegmentInfo* find(SegmentId id) const noexcept {
    auto it = std::lower_bound(segments.begin(), segments.end(), id,
                               [](const SegmentInfo& s, SegmentId v) { return s.id < v; });
    return (it != segments.end() && it->id == id) ? &*it : nullptr;
  }

  std::uint64_t void_pixels() const noexcept {
    return static_cast<std::uint64_t>(std::count(ids.begin(), ids.end(), void_id));
  }

  friend bool operator==(const PanopticLabelMap&, const PanopticLabelMap&) = default;
};

namespace detail {

// Pixel count per id. Consecutive pixels usually share an id, so the last
// lookup is cached.
inline std::unordered_map<SegmentId, std::uint64_t> count_ids(const std::vector<SegmentId>& ids) {
  std::unordered_map<SegmentId, std::uint64_t> counts;
  std::size_t i = 0;
  while (i < ids.size()) {
    const SegmentId id = ids[i];
    std::size_t j = i + 1;
    while (j < ids.size() && ids[j] == id) ++j;
    counts[id] += j - i;
    i = j;
  }
  return counts;
}

}  // namespace detail

/// Builds a map from a raw grid, listing exactly the ids present in it with
/// pixel-derived areas. Every present non-void id must have a category.
inline PanopticLabelMap make_label_map(std::uint32_t width, std::uint32_t height, std::vector<SegmentId> ids,
                                       const std::map<SegmentId, CategoryId>& category_of,
                                       SegmentId void_id = 0) {
  if (ids.size() != static_cast<std::size_t>(width) * height) {
    throw Error(Errc::dimension_mismatch, "label map: grid size does not match width x height");
  }
  PanopticLabelMap map;
  map.width = width;
  map.height = height;
  map.void_id = void_id;
  map.ids = std::move(ids);
  for (const auto& [id, count] : detail::count_ids(map.ids)) {
    if (id == void_id) continue;
    auto it = category_of.find(id);
    if (it == category_of.end()) {
      throw Error(Errc::segment_mismatch, "label map: no category for segment " + std::to_string(id));
    }
    map.segments.push_back({id, it->second, count});
  }
  std::sort(map.segments.begin(), map.segments.end(),
            [](const SegmentInfo& a, const SegmentInfo& b) { return a.id < b.id; });
  return map;
}

/// Throws unless every structural invariant of `map` holds against `cats`.
inline void check_invariants(const PanopticLabelMap& map, const CategoryTable& cats) {
  if (map.ids.size() != map.pixel_count()) {
    throw Error(Errc::dimension_mismatch, "label map: grid size does not match width x height");
  }
  if (map.void_id != cats.void_id()) {
    throw Error(Errc::invalid_argument, "label map: void id differs from the category table");
  }
  auto counts = detail::count_ids(map.ids);
  SegmentId previous = 0;
  for (std::size_t i = 0; i < map.segments.size(); ++i) {
    const auto& seg = map.segments[i];
    if (i > 0 && seg.id <= previous) {
      throw Error(Errc::segment_mismatch, "label map: segments not strictly sorted by id");
    }
    previous = seg.id;
    if (seg.id == 0 || seg.id == map.void_id) {
      throw Error(Errc::segment_mismatch, "label map: segment uses a reserved id");
    }
    if (!cats.contains(seg.category_id)) {
      throw Error(Errc::unknown_category, "label map: unknown category " + std::to_string(seg.category_id));
    }
    auto it = counts.find(seg.id);
    if (it == counts.end() || it->second != seg.area || seg.area == 0) {
      throw Error(Errc::segment_mismatch, "label map: area of segment " + std::to_string(seg.id) +
                                              " disagrees with the grid");
    }
    counts.erase(it);
  }
  counts.erase(map.void_id);
  if (!counts.empty()) {
    throw Error(Errc::segment_mismatch,
                "label map: grid id " + std::to_string(counts.begin()->first) + " has no segment entry");
  }
}

}  // namespace axps
