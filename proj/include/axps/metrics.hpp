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
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "axps/categories.hpp"
#include "axps/condition.hpp"
#include "axps/error.hpp"
#include "axps/matching.hpp"

namespace axps {

// Sum of matched IoUs, held exactly.
//
// A true-positive IoU lies in (1/2, 1], where every double is an integer
// multiple of 2^-53. Summing those integers makes accumulation associative
// and commutative, so any partition or merge order of the scene stream gives
// bit-identical totals.
class IouSum {
 public:
  __extension__ using Units = unsigned __int128;

  static constexpr double kScale = 0x1p53;

  IouSum() = default;

  static IouSum from_value(double total) {
    if (!(total == 0.0 || (total >= 0.5 && std::isfinite(total) && total < 0x1p70))) {
      throw Error(Errc::invalid_argument, "iou sum " + std::to_string(total) + " is not a valid total");
    }
    IouSum s;
    s.units_ = static_cast<Units>(total * kScale);
    return s;
  }

  void add(double iou) {
    if (!(iou >= 0.5 && iou <= 1.0)) {
      throw Error(Errc::invalid_argument, "matched iou " + std::to_string(iou) + " outside [0.5, 1]");
    }
    units_ += static_cast<Units>(iou * kScale);
  }

  IouSum& operator+=(const IouSum& other) noexcept {
    units_ += other.units_;
    return *this;
  }

  double value() const noexcept { return static_cast<double>(units_) / kScale; }
  Units units() const noexcept { return units_; }

  friend bool operator==(const IouSum&, const IouSum&) = default;

 private:
  Units units_ = 0;
};

struct ClassScore {
  CategoryId category_id = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  IouSum iou_sum;

  bool present() const noexcept { return tp + fp + fn > 0; }

  ClassScore& operator+=(const ClassScore& other) noexcept {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    iou_sum += other.iou_sum;
    return *this;
  }

  friend bool operator==(const ClassScore&, const ClassScore&) = default;
};

using ClassScoreTable = std::map<CategoryId, ClassScore>;

// Pooled counts for one subset of scenes.
struct ConditionPool {
  ClassScoreTable classes;
  std::uint64_t n_scenes = 0;

  ConditionPool& operator+=(const ConditionPool& other) {
    for (const auto& [id, score] : other.classes) {
      auto& mine = classes[id];
      mine.category_id = id;
      mine += score;
    }
    n_scenes += other.n_scenes;
    return *this;
  }

  friend bool operator==(const ConditionPool&, const ConditionPool&) = default;
};

using PoolMap = std::map<ConditionTag, ConditionPool>;

inline ClassScoreTable tally(const MatchResult& result) {
  ClassScoreTable table;
  for (const auto& c : result.per_class) {
    auto& s = table[c.category_id];
    s.category_id = c.category_id;
    s.tp += c.tp.size();
    s.fp += c.fp.size();
    s.fn += c.fn.size();
    for (const auto& pair : c.tp) s.iou_sum.add(pair.iou);
  }
  return table;
}

inline void merge_into(PoolMap& into, const PoolMap& from) {
  for (const auto& [tag, pool] : from) into[tag] += pool;
}

/// Pools every (match result, condition) pair into per-condition class counts.
template <std::ranges::input_range R>
  requires std::convertible_to<std::ranges::range_reference_t<R>, const std::pair<MatchResult, ConditionTag>&>
PoolMap accumulate(R&& results) {
  PoolMap pools;
  for (const std::pair<MatchResult, ConditionTag>& item : results) {
    ConditionPool scene;
    scene.classes = tally(item.first);
    scene.n_scenes = 1;
    pools[item.second] += scene;
  }
  return pools;
}

// PQ/SQ/RQ triple. Class-level values are fractions in [0, 1]; aggregated
// values (condition, marginal, weighted) are percentages.
struct Quality {
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;

  friend bool operator==(const Quality&, const Quality&) = default;
};

/// Per-class PQ, SQ and RQ; nullopt for a class with no TP, FP or FN.
inline std::optional<Quality> class_pq(const ClassScore& s) {
  if (!s.present()) return std::nullopt;
  const double tp = static_cast<double>(s.tp);
  const double denom = tp + 0.5 * static_cast<double>(s.fp) + 0.5 * static_cast<double>(s.fn);
  const double iou_sum = s.iou_sum.value();
  Quality q;
  q.pq = iou_sum / denom;
  q.sq = s.tp > 0 ? iou_sum / tp : 0.0;
  q.rq = tp / denom;
  return q;
}

/// Unweighted mean over present classes, as percentages.
inline std::optional<Quality> summarize(const ClassScoreTable& classes) {
  Quality sum;
  std::size_t n = 0;
  for (const auto& [id, score] : classes) {
    if (auto q = class_pq(score)) {
      sum.pq += q->pq;
      sum.sq += q->sq;
      sum.rq += q->rq;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  const double count = static_cast<double>(n);
  return Quality{sum.pq / count * 100.0, sum.sq / count * 100.0, sum.rq / count * 100.0};
}

struct ConditionScores {
  ConditionTag condition;
  Quality quality;  // percentages
  std::vector<ClassScore> per_class;
  std::uint64_t n_scenes = 0;

  friend bool operator==(const ConditionScores&, const ConditionScores&) = default;
};

inline ConditionScores condition_scores(ConditionTag tag, const ConditionPool& pool) {
  auto q = summarize(pool.classes);
  if (!q) {
    throw Error(Errc::no_present_classes, "condition " + tag.str() + " has no class with any TP, FP or FN");
  }
  ConditionScores out;
  out.condition = tag;
  out.quality = *q;
  out.n_scenes = pool.n_scenes;
  for (const auto& [id, score] : pool.classes) out.per_class.push_back(score);
  return out;
}

// ---------------------------------------------------------------------------
// Weighting

// Non-negative weight per condition; at least one must be positive.
class WeightConfig {
 public:
  WeightConfig() : WeightConfig(challenge_default()) {}

  explicit WeightConfig(std::map<ConditionTag, double> weights) : weights_(std::move(weights)) {
    bool any_positive = false;
    for (const auto& [tag, w] : weights_) {
      if (!std::isfinite(w) || w < 0.0) {
        throw Error(Errc::invalid_argument, "weights: " + tag.str() + " must be a finite non-negative number");
      }
      any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) throw Error(Errc::zero_weight, "weights: at least one weight must be positive");
  }

  /// Clear daytime counts half; the seven other conditions count fully.
  static std::map<ConditionTag, double> challenge_default() {
    std::map<ConditionTag, double> w;
    for (auto tag : kAllConditions) w[tag] = 1.0;
    w[{Weather::clear, TimeOfDay::day}] = 0.5;
    return w;
  }

  std::optional<double> find(ConditionTag tag) const {
    auto it = weights_.find(tag);
    return it == weights_.end() ? std::nullopt : std::optional<double>(it->second);
  }

  const std::map<ConditionTag, double>& weights() const noexcept { return weights_; }

  double total() const noexcept {
    double t = 0.0;
    for (const auto& [tag, w] : weights_) t += w;
    return t;
  }

  friend bool operator==(const WeightConfig&, const WeightConfig&) = default;

 private:
  std::map<ConditionTag, double> weights_;
};

struct WeightedScores {
  double wpq = 0.0;
  double wsq = 0.0;
  double wrq = 0.0;

  friend bool operator==(const WeightedScores&, const WeightedScores&) = default;
};

/// Weighted mean sum(l_w X_w) / sum(l_w) over the supplied conditions.
///
/// Accumulated as offsets from the smallest positively weighted score, so a
/// constant input reproduces that constant exactly and the result never leaves
/// [min X_w, max X_w].
inline WeightedScores weighted_scores(std::span<const ConditionScores> per_condition, const WeightConfig& w) {
  std::vector<std::pair<double, const Quality*>> terms;
  double total = 0.0;
  for (const auto& cs : per_condition) {
    auto lambda = w.find(cs.condition);
    if (!lambda) throw Error(Errc::invalid_argument, "weights: no weight for condition " + cs.condition.str());
    if (*lambda > 0.0) terms.emplace_back(*lambda, &cs.quality);
    total += *lambda;
  }
  if (!(total > 0.0)) throw Error(Errc::zero_weight, "weights: supplied conditions have zero total weight");

  auto mean = [&](double Quality::*field) {
    double lo = terms.front().second->*field;
    double hi = lo;
    for (const auto& [lambda, q] : terms) {
      lo = std::min(lo, q->*field);
      hi = std::max(hi, q->*field);
    }
    double offset = 0.0;
    for (const auto& [lambda, q] : terms) offset += lambda * (q->*field - lo);
    return std::clamp(lo + offset / total, lo, hi);
  };
  return {mean(&Quality::pq), mean(&Quality::sq), mean(&Quality::rq)};
}

// ---------------------------------------------------------------------------
// Marginals

enum class Marginal : std::uint8_t { clear, fog, rain, snow, day, night, all };

inline constexpr std::array<Marginal, 7> kAllMarginals = {Marginal::clear, Marginal::fog,   Marginal::rain,
                                                          Marginal::snow,  Marginal::day,   Marginal::night,
                                                          Marginal::all};

inline constexpr std::string_view to_string(Marginal m) noexcept {
  switch (m) {
    case Marginal::clear: return "clear";
    case Marginal::fog: return "fog";
    case Marginal::rain: return "rain";
    case Marginal::snow: return "snow";
    case Marginal::day: return "day";
    case Marginal::night: return "night";
    case Marginal::all: return "all";
  }
  return "?";
}

inline constexpr bool marginal_contains(Marginal m, ConditionTag tag) noexcept {
  switch (m) {
    case Marginal::clear: return tag.weather == Weather::clear;
    case Marginal::fog: return tag.weather == Weather::fog;
    case Marginal::rain: return tag.weather == Weather::rain;
    case Marginal::snow: return tag.weather == Weather::snow;
    case Marginal::day: return tag.tod == TimeOfDay::day;
    case Marginal::night: return tag.tod == TimeOfDay::night;
    case Marginal::all: return true;
  }
  return false;
}

// Quality per marginal, in kAllMarginals order; empty cells have no scenes.
using ConditionBreakdown = std::array<std::optional<Quality>, 7>;

/// Pools raw class counts across the conditions of each marginal before
/// scoring, so e.g. "fog" is PQ over fog/day and fog/night together.
inline ConditionBreakdown breakdown_from(std::span<const ConditionScores> per_condition) {
  ConditionBreakdown out;
  for (std::size_t m = 0; m < kAllMarginals.size(); ++m) {
    ClassScoreTable pooled;
    for (const auto& cs : per_condition) {
      if (!marginal_contains(kAllMarginals[m], cs.condition)) continue;
      for (const auto& score : cs.per_class) {
        auto& mine = pooled[score.category_id];
        mine.category_id = score.category_id;
        mine += score;
      }
    }
    out[m] = summarize(pooled);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports and ranking

struct ScoreReport {
  std::vector<ConditionScores> per_condition;  // sorted by condition
  WeightedScores weighted;
  Quality all;  // pooled over every scene
  ConditionBreakdown marginals;
  WeightConfig weights_used;

  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

inline ConditionBreakdown condition_breakdown(const ScoreReport& report) {
  return breakdown_from(report.per_condition);
}

inline ScoreReport build_report(const PoolMap& pools, const WeightConfig& weights) {
  ScoreReport report;
  report.weights_used = weights;
  for (const auto& [tag, pool] : pools) {
    if (pool.n_scenes == 0) continue;
    report.per_condition.push_back(condition_scores(tag, pool));
  }
  report.weighted = weighted_scores(report.per_condition, weights);
  report.marginals = condition_breakdown(report);
  report.all = report.marginals[static_cast<std::size_t>(Marginal::all)].value_or(Quality{});
  return report;
}

struct RankInput {
  std::string team;
  WeightedScores scores;
};

struct LeaderboardRow {
  std::size_t rank = 0;
  std::string team;
  WeightedScores scores;

  friend bool operator==(const LeaderboardRow&, const LeaderboardRow&) = default;
};

/// Strict total order: wPQ, then wSQ, then wRQ (all descending), then team name.
inline bool ranks_before(const RankInput& a, const RankInput& b) noexcept {
  if (a.scores.wpq != b.scores.wpq) return a.scores.wpq > b.scores.wpq;
  if (a.scores.wsq != b.scores.wsq) return a.scores.wsq > b.scores.wsq;
  if (a.scores.wrq != b.scores.wrq) return a.scores.wrq > b.scores.wrq;
  return a.team < b.team;
}

inline std::vector<LeaderboardRow> rank_submissions(std::vector<RankInput> inputs) {
  std::stable_sort(inputs.begin(), inputs.end(), ranks_before);
  std::vector<LeaderboardRow> board;
  board.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    board.push_back({i + 1, std::move(inputs[i].team), inputs[i].scores});
  }
  return board;
}

}  // namespace axps
