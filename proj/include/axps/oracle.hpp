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

// Reference implementations for differential testing, plus a seeded scene
// generator. Nothing here calls into the matching or metrics code paths; the
// only shared pieces are the domain types.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "axps/categories.hpp"
#include "axps/condition.hpp"
#include "axps/error.hpp"
#include "axps/label_map.hpp"
#include "axps/matching.hpp"
#include "axps/metrics.hpp"

namespace axps::oracle {

inline constexpr std::uint32_t kMaxOracleSide = 64;

/// Enumerates every same-category (gt, pred) pair and measures intersection
/// and union directly on the pixels.
inline MatchResult oracle_match(const PanopticLabelMap& gt, const PanopticLabelMap& pred) {
  if (gt.width != pred.width || gt.height != pred.height) {
    throw Error(Errc::dimension_mismatch, "oracle: gt and prediction sizes differ");
  }
  if (gt.width > kMaxOracleSide || gt.height > kMaxOracleSide) {
    throw Error(Errc::invalid_argument, "oracle: maps larger than 64x64 are not supported");
  }
  const std::size_t n = static_cast<std::size_t>(gt.width) * gt.height;
  const SegmentId void_id = gt.void_id;

  std::map<CategoryId, ClassMatches> classes;
  for (const auto& s : gt.segments) classes[s.category_id].category_id = s.category_id;
  for (const auto& s : pred.segments) classes[s.category_id].category_id = s.category_id;

  std::map<SegmentId, int> gt_hits;
  std::map<SegmentId, int> pred_hits;
  for (const auto& g : gt.segments) {
    for (const auto& p : pred.segments) {
      if (g.category_id != p.category_id) continue;
      std::uint64_t inter = 0;
      std::uint64_t uni = 0;
      for (std::size_t px = 0; px < n; ++px) {
        const bool in_g = gt.ids[px] == g.id;
        const bool in_p = pred.ids[px] == p.id && gt.ids[px] != void_id;
        inter += (in_g && in_p) ? 1 : 0;
        uni += (in_g || in_p) ? 1 : 0;
      }
      if (uni == 0 || 2 * inter <= uni) continue;
      classes[g.category_id].tp.push_back(
          {g.id, p.id, inter, uni, static_cast<double>(inter) / static_cast<double>(uni)});
      ++gt_hits[g.id];
      ++pred_hits[p.id];
    }
  }
  for (const auto& [id, hits] : gt_hits) {
    if (hits > 1) throw Error(Errc::invalid_argument, "oracle: gt segment matched twice");
  }
  for (const auto& [id, hits] : pred_hits) {
    if (hits > 1) throw Error(Errc::invalid_argument, "oracle: predicted segment matched twice");
  }

  for (const auto& g : gt.segments) {
    if (!gt_hits.count(g.id)) classes[g.category_id].fn.push_back(g.id);
  }
  for (const auto& p : pred.segments) {
    if (pred_hits.count(p.id)) continue;
    std::uint64_t area = 0;
    std::uint64_t on_void = 0;
    for (std::size_t px = 0; px < n; ++px) {
      if (pred.ids[px] != p.id) continue;
      ++area;
      if (gt.ids[px] == void_id) ++on_void;
    }
    if (on_void * 2 > area) {
      classes[p.category_id].ignored.push_back(p.id);
    } else {
      classes[p.category_id].fp.push_back(p.id);
    }
  }

  MatchResult result;
  for (auto& [c, m] : classes) {
    std::sort(m.tp.begin(), m.tp.end(), [](const MatchedPair& a, const MatchedPair& b) { return a.gt < b.gt; });
    std::sort(m.fp.begin(), m.fp.end());
    std::sort(m.fn.begin(), m.fn.end());
    std::sort(m.ignored.begin(), m.ignored.end());
    result.per_class.push_back(std::move(m));
  }
  return result;
}

/// Per-class PQ/SQ/RQ straight from the definitions, pooled over `results`.
/// Absent classes (no TP, FP or FN) map to nullopt.
inline std::map<CategoryId, std::optional<Quality>> oracle_pq(const std::vector<MatchResult>& results) {
  struct Counts {
    double iou = 0.0;
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
  };
  std::map<CategoryId, Counts> counts;
  for (const auto& r : results) {
    for (const auto& c : r.per_class) {
      auto& k = counts[c.category_id];
      for (const auto& pair : c.tp) k.iou += pair.iou;
      k.tp += static_cast<double>(c.tp.size());
      k.fp += static_cast<double>(c.fp.size());
      k.fn += static_cast<double>(c.fn.size());
    }
  }
  std::map<CategoryId, std::optional<Quality>> out;
  for (const auto& [c, k] : counts) {
    if (k.tp + k.fp + k.fn == 0.0) {
      out[c] = std::nullopt;
      continue;
    }
    Quality q;
    q.pq = k.iou / (k.tp + k.fp / 2.0 + k.fn / 2.0);
    q.sq = k.tp > 0.0 ? k.iou / k.tp : 0.0;
    q.rq = k.tp / (k.tp + k.fp / 2.0 + k.fn / 2.0);
    out[c] = q;
  }
  return out;
}

struct OracleReport {
  std::map<ConditionTag, Quality> per_condition;  // percentages
  std::map<Marginal, Quality> marginals;          // percentages, present cells only
  WeightedScores weighted;
};

/// Whole-report recomputation: per-subset class means, plain weighted means.
inline OracleReport oracle_report(const std::vector<std::pair<MatchResult, ConditionTag>>& scenes,
                                  const WeightConfig& weights) {
  auto subset_mean = [&](auto&& keep) -> std::optional<Quality> {
    std::vector<MatchResult> subset;
    for (const auto& [r, tag] : scenes) {
      if (keep(tag)) subset.push_back(r);
    }
    if (subset.empty()) return std::nullopt;
    Quality sum;
    int present = 0;
    for (const auto& [c, q] : oracle_pq(subset)) {
      if (!q) continue;
      sum.pq += q->pq;
      sum.sq += q->sq;
      sum.rq += q->rq;
      ++present;
    }
    if (present == 0) return std::nullopt;
    return Quality{100.0 * sum.pq / present, 100.0 * sum.sq / present, 100.0 * sum.rq / present};
  };

  OracleReport report;
  for (auto tag : kAllConditions) {
    if (auto q = subset_mean([&](ConditionTag t) { return t == tag; })) report.per_condition[tag] = *q;
  }
  const std::array<std::pair<Marginal, Weather>, 4> by_weather = {{
      {Marginal::clear, Weather::clear}, {Marginal::fog, Weather::fog},
      {Marginal::rain, Weather::rain},   {Marginal::snow, Weather::snow}}};
  for (const auto& cell : by_weather) {
    const Weather weather = cell.second;
    if (auto q = subset_mean([&](ConditionTag t) { return t.weather == weather; })) report.marginals[cell.first] = *q;
  }
  if (auto q = subset_mean([](ConditionTag t) { return t.tod == TimeOfDay::day; })) {
    report.marginals[Marginal::day] = *q;
  }
  if (auto q = subset_mean([](ConditionTag t) { return t.tod == TimeOfDay::night; })) {
    report.marginals[Marginal::night] = *q;
  }
  if (auto q = subset_mean([](ConditionTag) { return true; })) report.marginals[Marginal::all] = *q;
  double total = 0.0;
  WeightedScores acc;
  for (const auto& [tag, q] : report.per_condition) {
    const double lambda = weights.weights().at(tag);
    total += lambda;
    acc.wpq += lambda * q.pq;
    acc.wsq += lambda * q.sq;
    acc.wrq += lambda * q.rq;
  }
  report.weighted = {acc.wpq / total, acc.wsq / total, acc.wrq / total};
  return report;
}

// ---------------------------------------------------------------------------
// Scene generator

// Portable draws on top of mt19937_64, whose output sequence is fixed by the
// standard. The standard distributions are implementation-defined, so they are
// avoided to keep scenes identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }

  bool chance(double p) { return p > 0.0 && unit() < p; }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Prediction degradations, each a per-segment or per-pixel probability.
struct Perturbation {
  double erosion = 0.0;     // boundary pixel takes a neighbour's label
  double split = 0.0;       // segment cut in two
  double flip = 0.0;        // segment gets another category
  double void_fill = 0.0;   // void gt pixel receives a neighbour's label
  double drop = 0.0;        // segment removed (predicted void)
  std::uint32_t drop_segments = 0;  // additionally drop exactly this many segments
  bool relabel = false;     // predicted ids drawn fresh instead of copied

  static Perturbation from_strength(double s) {
    s = std::clamp(s, 0.0, 1.0);
    Perturbation p;
    p.erosion = 0.6 * s;
    p.split = 0.3 * s;
    p.flip = 0.3 * s;
    p.void_fill = 0.5 * s;
    p.drop = 0.2 * s;
    p.relabel = s > 0.0;
    return p;
  }

  bool none() const {
    return erosion == 0.0 && split == 0.0 && flip == 0.0 && void_fill == 0.0 && drop == 0.0 && drop_segments == 0 &&
           !relabel;
  }
};

struct SynthSpec {
  std::uint32_t width = 16;
  std::uint32_t height = 16;
  std::uint32_t n_segments = 4;
  std::uint32_t n_classes = 19;
  double void_fraction = 0.0;
  std::uint64_t seed = 0;
  Perturbation perturb;
};

struct SynthScene {
  PanopticLabelMap gt;
  PanopticLabelMap pred;
  ConditionTag tag;
};

namespace detail {

inline SegmentId fresh_id(Rng& rng, std::set<SegmentId>& used) {
  for (;;) {
    const auto id = static_cast<SegmentId>(1 + rng.below((1u << 24) - 1));
    if (used.insert(id).second) return id;
  }
}

}  // namespace detail

inline void check_spec(const SynthSpec& spec, const CategoryTable& cats) {
  const std::uint64_t pixels = std::uint64_t{spec.width} * spec.height;
  if (spec.width == 0 || spec.height == 0 || spec.width > 4096 || spec.height > 4096) {
    throw Error(Errc::invalid_argument, "synth: width and height must be in [1, 4096]");
  }
  if (spec.n_segments == 0 || spec.n_segments > 4096 || spec.n_segments > pixels) {
    throw Error(Errc::invalid_argument, "synth: n_segments must be in [1, min(4096, width*height)]");
  }
  if (spec.n_classes == 0 || spec.n_classes > cats.size()) {
    throw Error(Errc::invalid_argument, "synth: n_classes must be in [1, " + std::to_string(cats.size()) + "]");
  }
  if (!(spec.void_fraction >= 0.0 && spec.void_fraction <= 0.5)) {
    throw Error(Errc::invalid_argument, "synth: void_fraction must be in [0, 0.5]");
  }
  if (spec.perturb.drop_segments > spec.n_segments) {
    throw Error(Errc::invalid_argument, "synth: cannot drop more segments than exist");
  }
}

/// Ground truth from a nearest-seed (Voronoi) partition with scattered void
/// pixels; the prediction is the ground truth put through `spec.perturb`.
/// Output depends on the spec alone.
inline SynthScene generate_scene(const SynthSpec& spec, const CategoryTable& cats = CategoryTable::cityscapes()) {
  check_spec(spec, cats);
  Rng rng(mix_seed(spec.seed));
  const std::uint32_t w = spec.width;
  const std::uint32_t h = spec.height;
  const std::size_t n = std::size_t{w} * h;
  const SegmentId void_id = cats.void_id();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < spec.n_segments; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  const std::vector<std::size_t> seeds(order.begin(), order.begin() + spec.n_segments);

  std::set<SegmentId> used{void_id};
  std::vector<SegmentId> seg_ids;
  std::map<SegmentId, CategoryId> gt_cats;
  for (std::uint32_t s = 0; s < spec.n_segments; ++s) {
    const auto id = detail::fresh_id(rng, used);
    seg_ids.push_back(id);
    gt_cats[id] = cats.entries()[rng.below(spec.n_classes)].id;
  }

  std::vector<SegmentId> grid(n);
  for (std::size_t px = 0; px < n; ++px) {
    const auto x = static_cast<std::int64_t>(px % w);
    const auto y = static_cast<std::int64_t>(px / w);
    std::int64_t best = -1;
    std::size_t owner = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto dx = x - static_cast<std::int64_t>(seeds[s] % w);
      const auto dy = y - static_cast<std::int64_t>(seeds[s] / w);
      const auto d = dx * dx + dy * dy;
      if (best < 0 || d < best) {
        best = d;
        owner = s;
      }
    }
    grid[px] = seg_ids[owner];
  }

  // Void pixels never include a seed, so every segment keeps at least one pixel.
  const std::size_t voids = std::min<std::size_t>(static_cast<std::size_t>(spec.void_fraction * static_cast<double>(n)),
                                                  n - spec.n_segments);
  for (std::size_t i = 0; i < voids; ++i) {
    const std::size_t lo = spec.n_segments + i;
    std::swap(order[lo], order[lo + rng.below(n - lo)]);
    grid[order[lo]] = void_id;
  }

  SynthScene scene;
  scene.tag = kAllConditions[rng.below(kAllConditions.size())];
  scene.gt = make_label_map(w, h, grid, gt_cats, void_id);

  const Perturbation& pt = spec.perturb;
  if (pt.none()) {
    scene.pred = scene.gt;
    return scene;
  }

  std::map<SegmentId, SegmentId> to_pred;
  for (auto id : seg_ids) to_pred[id] = pt.relabel ? detail::fresh_id(rng, used) : id;
  std::map<SegmentId, CategoryId> pred_cats;
  for (auto id : seg_ids) pred_cats[to_pred[id]] = gt_cats[id];
  std::vector<SegmentId> pred(n);
  for (std::size_t px = 0; px < n; ++px) pred[px] = grid[px] == void_id ? void_id : to_pred[grid[px]];

  if (spec.n_classes > 1) {
    for (auto id : seg_ids) {
      if (!rng.chance(pt.flip)) continue;
      auto& c = pred_cats[to_pred[id]];
      CategoryId other = c;
      while (other == c) other = cats.entries()[rng.below(spec.n_classes)].id;
      c = other;
    }
  }

  for (auto id : seg_ids) {
    if (!rng.chance(pt.split)) continue;
    const SegmentId from = to_pred[id];
    std::uint64_t sum_x = 0;
    std::uint64_t count = 0;
    for (std::size_t px = 0; px < n; ++px) {
      if (pred[px] == from) {
        sum_x += px % w;
        ++count;
      }
    }
    if (count < 2) continue;
    const SegmentId half = detail::fresh_id(rng, used);
    pred_cats[half] = pred_cats[from];
    for (std::size_t px = 0; px < n; ++px) {
      if (pred[px] == from && (px % w) * count > sum_x) pred[px] = half;
    }
  }

  auto neighbours = [&](std::size_t px) {
    std::array<std::optional<std::size_t>, 4> out;
    const std::size_t x = px % w;
    const std::size_t y = px / w;
    if (x > 0) out[0] = px - 1;
    if (x + 1 < w) out[1] = px + 1;
    if (y > 0) out[2] = px - w;
    if (y + 1 < h) out[3] = px + w;
    return out;
  };

  if (pt.erosion > 0.0) {
    const auto before = pred;
    for (std::size_t px = 0; px < n; ++px) {
      for (auto nb : neighbours(px)) {
        if (nb && grid[*nb] != grid[px]) {
          if (rng.chance(pt.erosion)) pred[px] = before[*nb];
          break;
        }
      }
    }
  }

  if (pt.void_fill > 0.0) {
    const auto before = pred;
    for (std::size_t px = 0; px < n; ++px) {
      if (grid[px] != void_id || !rng.chance(pt.void_fill)) continue;
      for (auto nb : neighbours(px)) {
        if (nb && before[*nb] != void_id) {
          pred[px] = before[*nb];
          break;
        }
      }
    }
  }

  std::set<SegmentId> dropped;
  for (auto id : seg_ids) {
    if (rng.chance(pt.drop)) dropped.insert(id);
  }
  std::vector<SegmentId> candidates;
  for (auto id : seg_ids) {
    if (!dropped.count(id)) candidates.push_back(id);
  }
  for (std::uint32_t k = 0; k < pt.drop_segments && !candidates.empty(); ++k) {
    const auto pick = rng.below(candidates.size());
    dropped.insert(candidates[pick]);
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  for (auto id : dropped) {
    const SegmentId target = to_pred[id];
    for (auto& p : pred) {
      if (p == target) p = void_id;
    }
  }

  scene.pred = make_label_map(w, h, std::move(pred), pred_cats, void_id);
  return scene;
}

/// Applies a seeded injective renaming to every segment id of `map`.
inline PanopticLabelMap relabel_segments(const PanopticLabelMap& map, std::uint64_t seed) {
  Rng rng(mix_seed(seed));
  std::set<SegmentId> used{map.void_id};
  std::map<SegmentId, SegmentId> rename;
  for (const auto& s : map.segments) rename[s.id] = detail::fresh_id(rng, used);
  PanopticLabelMap out = map;
  for (auto& id : out.ids) {
    if (id != map.void_id) id = rename.at(id);
  }
  out.segments.clear();
  for (const auto& s : map.segments) out.segments.push_back({rename.at(s.id), s.category_id, s.area});
  std::sort(out.segments.begin(), out.segments.end(),
            [](const SegmentInfo& a, const SegmentInfo& b) { return a.id < b.id; });
  return out;
}

}  // namespace axps::oracle
