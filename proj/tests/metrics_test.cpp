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


#include <cmath>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "axps/matching.hpp"
#include "axps/metrics.hpp"
#include "axps/oracle.hpp"
#include "axps/report_io.hpp"

namespace axps {
namespace {

constexpr ConditionTag kClearDay{Weather::clear, TimeOfDay::day};
constexpr ConditionTag kFogDay{Weather::fog, TimeOfDay::day};
constexpr ConditionTag kFogNight{Weather::fog, TimeOfDay::night};

ClassScore score(CategoryId id, std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::vector<double> ious = {}) {
  ClassScore s{id, tp, fp, fn, {}};
  for (double v : ious) s.iou_sum.add(v);
  return s;
}

ConditionScores cond(ConditionTag tag, double pq, double sq = 0.0, double rq = 0.0) {
  return {tag, {pq, sq, rq}, {}, 1};
}

MatchResult single_tp(CategoryId c, double iou) {
  MatchResult r;
  r.per_class.push_back({c, {{1, 2, 3, 5, iou}}, {}, {}, {}});
  return r;
}

std::vector<std::pair<MatchResult, ConditionTag>> generated(std::size_t n, std::uint64_t seed) {
  std::vector<std::pair<MatchResult, ConditionTag>> out;
  const auto cats = CategoryTable::cityscapes();
  for (std::size_t i = 0; i < n; ++i) {
    oracle::SynthSpec spec;
    spec.width = 24;
    spec.height = 16;
    spec.n_segments = 8;
    spec.n_classes = 5;
    spec.void_fraction = 0.1;
    spec.seed = seed * 1000 + i;
    spec.perturb = oracle::Perturbation::from_strength(0.6);
    const auto scene = oracle::generate_scene(spec, cats);
    out.emplace_back(match(scene.gt, scene.pred, cats), scene.tag);
  }
  return out;
}

TEST(Accumulate, SingleTruePositive) {
  const std::vector<std::pair<MatchResult, ConditionTag>> stream = {{single_tp(26, 0.6), kFogDay}};
  const auto pools = accumulate(stream);
  ASSERT_EQ(pools.size(), 1u);
  const auto& s = pools.at(kFogDay).classes.at(26);
  EXPECT_EQ(s.tp, 1u);
  EXPECT_EQ(s.fp, 0u);
  EXPECT_EQ(s.fn, 0u);
  EXPECT_EQ(s.iou_sum.value(), 0.6);
}

TEST(Accumulate, OrderIndependent) {
  const std::vector<std::pair<MatchResult, ConditionTag>> ab = {{single_tp(26, 0.6), kFogDay},
                                                                {single_tp(26, 0.9), kFogDay}};
  const std::vector<std::pair<MatchResult, ConditionTag>> ba = {ab[1], ab[0]};
  EXPECT_EQ(accumulate(ab), accumulate(ba));
}

TEST(Accumulate, EmptyStream) {
  EXPECT_TRUE(accumulate(std::vector<std::pair<MatchResult, ConditionTag>>{}).empty());
}

TEST(Accumulate, PartitionAndMergeOrderGiveIdenticalPools) {
  const auto stream = generated(60, 3);
  const auto whole = accumulate(stream);
  for (std::size_t cut = 1; cut < stream.size(); cut += 7) {
    const std::vector<std::pair<MatchResult, ConditionTag>> left(stream.begin(), stream.begin() + cut);
    const std::vector<std::pair<MatchResult, ConditionTag>> right(stream.begin() + cut, stream.end());
    PoolMap merged = accumulate(right);
    merge_into(merged, accumulate(left));
    EXPECT_EQ(merged, whole);
  }
}

TEST(IouSum, ExactAndAssociative) {
  IouSum a, b;
  for (double v : {0.6, 0.7, 0.8125, 0.9999999999}) a.add(v);
  for (double v : {0.9999999999, 0.8125, 0.7, 0.6}) b.add(v);
  EXPECT_EQ(a, b);
  EXPECT_THROW(a.add(0.4), Error);
  EXPECT_EQ(IouSum::from_value(2.5).value(), 2.5);
}

TEST(ClassPq, Examples) {
  auto q = class_pq(score(26, 1, 0, 0, {0.6}));
  ASSERT_TRUE(q);
  EXPECT_EQ(q->pq, 0.6);
  EXPECT_EQ(q->sq, 0.6);
  EXPECT_EQ(q->rq, 1.0);

  q = class_pq(score(26, 0, 2, 0));
  ASSERT_TRUE(q);
  EXPECT_EQ(*q, (Quality{0.0, 0.0, 0.0}));

  q = class_pq(score(26, 5, 0, 0, {1, 1, 1, 1, 1}));
  EXPECT_EQ(*q, (Quality{1.0, 1.0, 1.0}));

  EXPECT_FALSE(class_pq(score(26, 0, 0, 0)));
}

TEST(ClassPq, PropertiesOverGeneratedScenes) {
  const auto stream = generated(120, 9);
  std::vector<ClassScoreTable> tables;
  for (const auto& [r, tag] : stream) tables.push_back(tally(r));
  for (const auto& [tag, pool] : accumulate(stream)) tables.push_back(pool.classes);
  std::size_t checked = 0;
  for (const auto& table : tables) {
    for (const auto& [id, s] : table) {
      const auto q = class_pq(s);
      ASSERT_TRUE(q);
      for (double v : {q->pq, q->sq, q->rq}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      EXPECT_EQ(q->sq == 0.0, s.tp == 0);
      if (s.tp > 0) {
        EXPECT_LT(std::abs(q->pq - q->sq * q->rq), 1e-12);
        EXPECT_GT(q->sq, 0.5);
        ++checked;
      }
      auto worse = s;
      ++worse.fp;
      if (q->pq > 0.0) {
        EXPECT_LT(class_pq(worse)->pq, q->pq);
      } else {
        EXPECT_EQ(class_pq(worse)->pq, 0.0);
      }
    }
  }
  EXPECT_GT(checked, 50u);
}

TEST(ConditionScores, MeanOverPresentClasses) {
  ConditionPool one;
  one.classes[26] = score(26, 1, 0, 0, {0.6});
  one.n_scenes = 1;
  EXPECT_DOUBLE_EQ(condition_scores(kFogDay, one).quality.pq, 60.0);

  ConditionPool two;
  two.classes[24] = score(24, 1, 0, 0, {0.5});
  two.classes[26] = score(26, 1, 0, 0, {0.7});
  two.classes[7] = score(7, 0, 0, 0);
  two.n_scenes = 1;
  EXPECT_DOUBLE_EQ(condition_scores(kFogDay, two).quality.pq, 60.0);

  ConditionPool perfect;
  for (const auto& c : CategoryTable::cityscapes().entries()) perfect.classes[c.id] = score(c.id, 2, 0, 0, {1, 1});
  perfect.n_scenes = 1;
  EXPECT_EQ(condition_scores(kFogDay, perfect).quality, (Quality{100.0, 100.0, 100.0}));
}

TEST(ConditionScores, NoPresentClassIsAnError) {
  ConditionPool empty;
  empty.classes[7] = score(7, 0, 0, 0);
  try {
    condition_scores(kFogDay, empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::no_present_classes);
  }
}

TEST(WeightedScores, DefaultWeights) {
  const WeightConfig w;
  EXPECT_EQ(w.total(), 7.5);
  EXPECT_EQ(*w.find(kClearDay), 0.5);
  EXPECT_EQ(w.weights().size(), 8u);
  for (auto tag : kAllConditions) {
    if (tag != kClearDay) {
      EXPECT_EQ(*w.find(tag), 1.0);
    }
  }
}

TEST(WeightedScores, ConstantInputIsExact) {
  for (double c : {0.0, 1.0 / 3.0, 37.21, 54.23, 99.99, 100.0}) {
    std::vector<ConditionScores> all;
    for (auto tag : kAllConditions) all.push_back(cond(tag, c, c, c));
    const auto s = weighted_scores(all, WeightConfig{});
    EXPECT_EQ(s.wpq, c);
    EXPECT_EQ(s.wsq, c);
    EXPECT_EQ(s.wrq, c);
  }
}

TEST(WeightedScores, TwoConditions) {
  const std::vector<ConditionScores> two = {cond(kClearDay, 60.0), cond(kFogDay, 40.0)};
  EXPECT_NEAR(weighted_scores(two, WeightConfig{}).wpq, 70.0 / 1.5, 1e-9);
}

TEST(WeightedScores, BoundsUnderRandomWeights) {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::map<ConditionTag, double> w;
    std::vector<ConditionScores> all;
    double lo = 1e9, hi = -1e9;
    for (auto tag : kAllConditions) {
      w[tag] = rng.chance(0.2) ? 0.0 : rng.unit() * 3.0;
      const double x = rng.unit() * 100.0;
      all.push_back(cond(tag, x, x, x));
      if (w[tag] > 0.0) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
    if (lo > hi) continue;
    const auto s = weighted_scores(all, WeightConfig(w));
    EXPECT_GE(s.wpq, lo);
    EXPECT_LE(s.wpq, hi);
  }
}

TEST(WeightedScores, ZeroTotalIsAnError) {
  std::map<ConditionTag, double> w = WeightConfig::challenge_default();
  w[kFogDay] = 0.0;
  const std::vector<ConditionScores> only_fog = {cond(kFogDay, 50.0)};
  try {
    weighted_scores(only_fog, WeightConfig(w));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::zero_weight);
  }
  EXPECT_THROW(WeightConfig(std::map<ConditionTag, double>{{kFogDay, 0.0}}), Error);
  EXPECT_THROW(WeightConfig(std::map<ConditionTag, double>{{kFogDay, -1.0}}), Error);
}

TEST(WeightedScores, ProductIdentityNotEnforced) {
  const std::vector<ConditionScores> two = {cond(kClearDay, 48.0, 80.0, 60.0), cond(kFogDay, 20.0, 50.0, 40.0)};
  const auto s = weighted_scores(two, WeightConfig{});
  EXPECT_GT(std::abs(s.wpq - s.wsq * s.wrq / 100.0), 1.0);
}

TEST(RankSubmissions, FourTeamOrder) {
  const auto board = rank_submissions({{"mljp", {36.15, 68.28, 45.58}},
                                       {"eliet", {45.84, 73.23, 56.40}},
                                       {"wg", {54.23, 76.62, 65.66}},
                                       {"michele24", {47.03, 72.61, 57.62}}});
  ASSERT_EQ(board.size(), 4u);
  const std::vector<std::string> order = {"wg", "michele24", "eliet", "mljp"};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(board[i].rank, i + 1);
    EXPECT_EQ(board[i].team, order[i]);
  }
  EXPECT_EQ(board[0].scores, (WeightedScores{54.23, 76.62, 65.66}));
}

TEST(RankSubmissions, SingleEntry) {
  const auto board = rank_submissions({{"solo", {10, 20, 30}}});
  ASSERT_EQ(board.size(), 1u);
  EXPECT_EQ(board[0].rank, 1u);
}

TEST(RankSubmissions, TieBreaks) {
  auto board = rank_submissions({{"a", {50, 70, 60}}, {"b", {50, 71, 60}}});
  EXPECT_EQ(board[0].team, "b");
  board = rank_submissions({{"a", {50, 70, 60}}, {"b", {50, 70, 61}}});
  EXPECT_EQ(board[0].team, "b");
  board = rank_submissions({{"b", {50, 70, 60}}, {"a", {50, 70, 60}}});
  EXPECT_EQ(board[0].team, "a");
}

PoolMap pools_of(std::initializer_list<std::pair<ConditionTag, ClassScore>> items) {
  PoolMap pools;
  for (const auto& [tag, s] : items) {
    auto& pool = pools[tag];
    pool.classes[s.category_id] = s;
    pool.n_scenes = 1;
  }
  return pools;
}

TEST(ConditionBreakdown, UniformData) {
  PoolMap pools;
  for (auto tag : kAllConditions) pools[tag] = {{{26, score(26, 1, 1, 0, {0.8})}}, 1};
  const auto report = build_report(pools, WeightConfig{});
  for (const auto& cell : report.marginals) {
    ASSERT_TRUE(cell);
    EXPECT_DOUBLE_EQ(cell->pq, report.per_condition[0].quality.pq);
  }
}

TEST(ConditionBreakdown, OnlyFogDay) {
  const auto report = build_report(pools_of({{kFogDay, score(26, 3, 1, 2, {0.6, 0.7, 0.9})}}), WeightConfig{});
  const auto fog = report.marginals[static_cast<std::size_t>(Marginal::fog)];
  const auto day = report.marginals[static_cast<std::size_t>(Marginal::day)];
  const auto all = report.marginals[static_cast<std::size_t>(Marginal::all)];
  ASSERT_TRUE(fog && day && all);
  EXPECT_EQ(*fog, *day);
  EXPECT_EQ(*fog, *all);
  for (auto m : {Marginal::clear, Marginal::rain, Marginal::snow, Marginal::night}) {
    EXPECT_FALSE(report.marginals[static_cast<std::size_t>(m)]);
  }
}

TEST(ConditionBreakdown, PoolsRawCounts) {
  // fog/day: 1 TP at 1.0; fog/night: 2 FN. Pooled fog PQ = 1 / (1 + 1) = 50,
  // not the mean of the two condition PQs (100 and 0).
  const auto report = build_report(
      pools_of({{kFogDay, score(26, 1, 0, 0, {1.0})}, {kFogNight, score(26, 0, 0, 2)}}), WeightConfig{});
  const auto fog = report.marginals[static_cast<std::size_t>(Marginal::fog)];
  ASSERT_TRUE(fog);
  EXPECT_DOUBLE_EQ(fog->pq, 50.0);
}

TEST(ConditionBreakdown, TwoConditionFixtureMatchesOracle) {
  auto stream = generated(40, 21);
  for (std::size_t i = 0; i < stream.size(); ++i) stream[i].second = i % 2 ? kFogDay : kClearDay;
  const auto report = build_report(accumulate(stream), WeightConfig{});
  const auto expected = oracle::oracle_report(stream, WeightConfig{});
  for (std::size_t m = 0; m < kAllMarginals.size(); ++m) {
    const auto it = expected.marginals.find(kAllMarginals[m]);
    ASSERT_EQ(it != expected.marginals.end(), report.marginals[m].has_value());
    if (it == expected.marginals.end()) continue;
    EXPECT_NEAR(report.marginals[m]->pq, it->second.pq, 1e-12);
    EXPECT_NEAR(report.marginals[m]->sq, it->second.sq, 1e-12);
    EXPECT_NEAR(report.marginals[m]->rq, it->second.rq, 1e-12);
  }
  EXPECT_NEAR(report.weighted.wpq, expected.weighted.wpq, 1e-12);
}

TEST(ReportJson, RoundTripsWeightedBlock) {
  const auto report = build_report(accumulate(generated(16, 4)), WeightConfig{});
  const auto doc = to_json(report);
  const auto back = report_from_json(nlohmann::json::parse(doc.dump()));
  EXPECT_EQ(back.weighted, report.weighted);
  EXPECT_EQ(to_json(back).dump(), doc.dump());
  EXPECT_NE(render(report, OutputFormat::markdown).find("| wPQ"), std::string::npos);
  EXPECT_EQ(render(report, OutputFormat::csv).rfind("scope,name,n_scenes,pq,sq,rq\n", 0), 0u);
}

TEST(FormatScore, TwoDecimals) {
  EXPECT_EQ(format_score(54.23), "54.23");
  EXPECT_EQ(format_score(100.0), "100.00");
  EXPECT_EQ(format_score(46.666666666666664), "46.67");
}

}  // namespace
}  // namespace axps
