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
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "axps/categories.hpp"
#include "axps/matching.hpp"
#include "axps/metrics.hpp"
#include "axps/oracle.hpp"

namespace axps {

struct FastMatcher {
  MatchResult operator()(const PanopticLabelMap& gt, const PanopticLabelMap& pred, const CategoryTable& cats) const {
    return match(gt, pred, cats);
  }
};

struct OracleCheckSummary {
  std::size_t cases = 0;
  std::vector<std::uint64_t> mismatched_seeds;
  std::vector<std::string> details;
  double max_score_diff = 0.0;

  bool passed() const noexcept { return mismatched_seeds.empty() && details.empty(); }
};

inline constexpr double kScoreTolerance = 1e-12;

/// Spec for case `index` of a differential run: at most 16x16 pixels,
/// 6 segments and 30% void, with random perturbation strength.
inline oracle::SynthSpec differential_case(std::uint64_t seed, std::size_t index) {
  oracle::Rng rng(oracle::mix_seed(seed ^ oracle::mix_seed(index)));
  oracle::SynthSpec spec;
  spec.width = static_cast<std::uint32_t>(1 + rng.below(16));
  spec.height = static_cast<std::uint32_t>(1 + rng.below(16));
  spec.n_segments =
      static_cast<std::uint32_t>(1 + rng.below(std::min<std::uint64_t>(6, std::uint64_t{spec.width} * spec.height)));
  spec.n_classes = static_cast<std::uint32_t>(1 + rng.below(4));
  spec.void_fraction = 0.3 * rng.unit();
  spec.seed = rng.next();
  spec.perturb = oracle::Perturbation::from_strength(rng.unit());
  spec.perturb.drop_segments = static_cast<std::uint32_t>(rng.below(2));
  return spec;
}

/// Runs `n_cases` generated scenes through `matcher` and through the oracle,
/// requiring identical match results and scores within kScoreTolerance, both
/// per scene and for the pooled report over all cases.
template <class Matcher = FastMatcher>
OracleCheckSummary oracle_check(std::size_t n_cases, std::uint64_t seed, Matcher&& matcher = {},
                                const CategoryTable& cats = CategoryTable::cityscapes()) {
  OracleCheckSummary summary;
  summary.cases = n_cases;
  std::vector<std::pair<MatchResult, ConditionTag>> fast_all;
  std::vector<std::pair<MatchResult, ConditionTag>> oracle_all;

  auto note = [&](double a, double b) {
    const double d = std::abs(a - b);
    summary.max_score_diff = std::max(summary.max_score_diff, d);
    return d <= kScoreTolerance;
  };

  for (std::size_t i = 0; i < n_cases; ++i) {
    const auto spec = differential_case(seed, i);
    const auto scene = oracle::generate_scene(spec, cats);
    auto fast = matcher(scene.gt, scene.pred, cats);
    auto slow = oracle::oracle_match(scene.gt, scene.pred);
    bool ok = fast == slow;

    const auto fast_classes = tally(fast);
    const auto slow_classes = oracle::oracle_pq({slow});
    for (const auto& [c, expected] : slow_classes) {
      auto it = fast_classes.find(c);
      const auto got = it == fast_classes.end() ? std::nullopt : class_pq(it->second);
      if (got.has_value() != expected.has_value()) {
        ok = false;
      } else if (got) {
        ok = note(got->pq, expected->pq) && note(got->sq, expected->sq) && note(got->rq, expected->rq) && ok;
      }
    }
    if (!ok) summary.mismatched_seeds.push_back(spec.seed);
    fast_all.emplace_back(std::move(fast), scene.tag);
    oracle_all.emplace_back(std::move(slow), scene.tag);
  }
  if (n_cases == 0) return summary;

  const WeightConfig weights;
  const auto expected = oracle::oracle_report(oracle_all, weights);
  ScoreReport report;
  try {
    report = build_report(accumulate(fast_all), weights);
  } catch (const Error& e) {
    summary.details.push_back(std::string("pooled report failed: ") + e.what());
    return summary;
  }
  for (const auto& cs : report.per_condition) {
    auto it = expected.per_condition.find(cs.condition);
    if (it == expected.per_condition.end() || !note(cs.quality.pq, it->second.pq) ||
        !note(cs.quality.sq, it->second.sq) || !note(cs.quality.rq, it->second.rq)) {
      summary.details.push_back("condition " + cs.condition.str() + " differs from oracle");
    }
  }
  if (report.per_condition.size() != expected.per_condition.size()) {
    summary.details.push_back("condition sets differ from oracle");
  }
  for (std::size_t m = 0; m < kAllMarginals.size(); ++m) {
    auto it = expected.marginals.find(kAllMarginals[m]);
    const auto& got = report.marginals[m];
    if ((it == expected.marginals.end()) != !got.has_value() ||
        (got && (!note(got->pq, it->second.pq) || !note(got->sq, it->second.sq) || !note(got->rq, it->second.rq)))) {
      summary.details.push_back(std::string("marginal ") + std::string(to_string(kAllMarginals[m])) +
                                " differs from oracle");
    }
  }
  if (!note(report.weighted.wpq, expected.weighted.wpq) || !note(report.weighted.wsq, expected.weighted.wsq) ||
      !note(report.weighted.wrq, expected.weighted.wrq)) {
    summary.details.push_back("weighted scores differ from oracle");
  }
  return summary;
}

}  // namespace axps
