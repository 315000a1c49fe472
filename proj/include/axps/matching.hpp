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
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "axps/categories.hpp"
#include "axps/error.hpp"
#include "axps/label_map.hpp"

namespace axps {

// Pixel co-occurrence counts between a ground-truth and a predicted map.
//
// `entries` holds intersections of non-void gt and non-void pred segments.
// Pixels that are void on either side are tallied separately so that
//   sum(entries) + sum(void_overlap) + sum(pred_void) + void_void == w * h.
struct ContingencyTable {
  struct Entry {
    SegmentId gt = 0;
    SegmentId pred = 0;
    std::uint64_t intersection = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::uint64_t width = 0;
  std::uint64_t height = 0;
  std::vector<Entry> entries;                         // sorted by (gt, pred)
  std::map<SegmentId, std::uint64_t> gt_areas;        // non-void gt ids
  std::map<SegmentId, std::uint64_t> pred_areas;      // non-void pred ids
  std::map<SegmentId, std::uint64_t> void_overlap;    // pred id -> pixels on void gt
  std::map<SegmentId, std::uint64_t> pred_void;       // gt id -> pixels predicted void
  std::uint64_t void_void = 0;

  std::uint64_t void_overlap_of(SegmentId pred) const {
    auto it = void_overlap.find(pred);
    return it == void_overlap.end() ? 0 : it->second;
  }

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

struct MatchedPair {
  SegmentId gt = 0;
  SegmentId pred = 0;
  std::uint64_t intersection = 0;
  std::uint64_t union_area = 0;
  double iou = 0.0;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

// Matching outcome for one category. All lists are sorted by segment id.
// `ignored` holds unmatched predictions that lie mostly on void ground truth;
// they count neither as TP nor as FP.
struct ClassMatches {
  CategoryId category_id = 0;
  std::vector<MatchedPair> tp;
  std::vector<SegmentId> fp;
  std::vector<SegmentId> fn;
  std::vector<SegmentId> ignored;

  friend bool operator==(const ClassMatches&, const ClassMatches&) = default;
};

// Per-image matching result, one block per category that occurs in either map.
struct MatchResult {
  std::vector<ClassMatches> per_class;  // sorted by category_id

  const ClassMatches* find(CategoryId id) const noexcept {
    for (const auto& c : per_class) {
      if (c.category_id == id) return &c;
    }
    return nullptr;
  }

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// True iff intersection / union > 1/2, decided on integers.
inline constexpr bool iou_exceeds_half(std::uint64_t intersection, std::uint64_t union_area) noexcept {
  return 2 * intersection > union_area;
}

inline ContingencyTable build_contingency(const PanopticLabelMap& gt, const PanopticLabelMap& pred) {
  if (gt.width != pred.width || gt.height != pred.height) {
    throw Error(Errc::dimension_mismatch, "matching: gt is " + std::to_string(gt.width) + "x" +
                                              std::to_string(gt.height) + ", prediction is " +
                                              std::to_string(pred.width) + "x" + std::to_string(pred.height));
  }
  if (gt.ids.size() != gt.pixel_count() || pred.ids.size() != pred.pixel_count()) {
    throw Error(Errc::dimension_mismatch, "matching: grid size does not match width x height");
  }
  const SegmentId gt_void = gt.void_id;
  const SegmentId pred_void = pred.void_id;

  ContingencyTable table;
  table.width = gt.width;
  table.height = gt.height;

  std::unordered_map<std::uint64_t, std::uint64_t> pairs;
  const std::size_t n = gt.ids.size();
  std::size_t i = 0;
  while (i < n) {
    const SegmentId g = gt.ids[i];
    const SegmentId p = pred.ids[i];
    std::size_t j = i + 1;
    while (j < n && gt.ids[j] == g && pred.ids[j] == p) ++j;
    const std::uint64_t run = j - i;
    const bool g_void = g == gt_void;
    const bool p_void = p == pred_void;
    if (!g_void) table.gt_areas[g] += run;
    if (!p_void) table.pred_areas[p] += run;
    if (g_void && p_void) {
      table.void_void += run;
    } else if (g_void) {
      table.void_overlap[p] += run;
    } else if (p_void) {
      table.pred_void[g] += run;
    } else {
      pairs[(static_cast<std::uint64_t>(g) << 32) | p] += run;
    }
    i = j;
  }

  table.entries.reserve(pairs.size());
  for (const auto& [key, count] : pairs) {
    table.entries.push_back({static_cast<SegmentId>(key >> 32), static_cast<SegmentId>(key & 0xffffffffu), count});
  }
  std::sort(table.entries.begin(), table.entries.end(), [](const auto& a, const auto& b) {
    return std::pair(a.gt, a.pred) < std::pair(b.gt, b.pred);
  });
  return table;
}

/// Unique matching: a same-category pair whose IoU exceeds 1/2 is a true
/// positive. Prediction pixels on void ground truth are left out of the union.
/// Unmatched predictions whose raw area is more than half void are ignored.
inline MatchResult match_segments(const ContingencyTable& table, const PanopticLabelMap& gt,
                                  const PanopticLabelMap& pred, const CategoryTable& cats) {
  std::map<CategoryId, ClassMatches> classes;
  auto block = [&](CategoryId c) -> ClassMatches& {
    auto& m = classes[c];
    m.category_id = c;
    return m;
  };
  for (const auto* map : {&gt, &pred}) {
    for (const auto& s : map->segments) {
      if (!cats.contains(s.category_id)) {
        throw Error(Errc::unknown_category, "matching: unknown category " + std::to_string(s.category_id));
      }
      block(s.category_id);
    }
  }

  std::set<SegmentId> gt_matched;
  std::set<SegmentId> pred_matched;
  for (const auto& e : table.entries) {
    const auto* g = gt.find(e.gt);
    const auto* p = pred.find(e.pred);
    if (g == nullptr || p == nullptr) {
      throw Error(Errc::segment_mismatch, "matching: contingency table does not belong to these maps");
    }
    if (g->category_id != p->category_id) continue;
    const std::uint64_t union_area = g->area + p->area - table.void_overlap_of(e.pred) - e.intersection;
    if (!iou_exceeds_half(e.intersection, union_area)) continue;
    block(g->category_id)
        .tp.push_back({e.gt, e.pred, e.intersection, union_area,
                       static_cast<double>(e.intersection) / static_cast<double>(union_area)});
    gt_matched.insert(e.gt);
    pred_matched.insert(e.pred);
  }

  for (const auto& g : gt.segments) {
    if (!gt_matched.count(g.id)) block(g.category_id).fn.push_back(g.id);
  }
  for (const auto& p : pred.segments) {
    if (pred_matched.count(p.id)) continue;
    if (2 * table.void_overlap_of(p.id) > p.area) {
      block(p.category_id).ignored.push_back(p.id);
    } else {
      block(p.category_id).fp.push_back(p.id);
    }
  }

  MatchResult result;
  for (auto& [c, m] : classes) {
    std::sort(m.tp.begin(), m.tp.end(), [](const auto& a, const auto& b) { return a.gt < b.gt; });
    result.per_class.push_back(std::move(m));
  }
  return result;
}

inline MatchResult match(const PanopticLabelMap& gt, const PanopticLabelMap& pred, const CategoryTable& cats) {
  return match_segments(build_contingency(gt, pred), gt, pred, cats);
}

}  // namespace axps
