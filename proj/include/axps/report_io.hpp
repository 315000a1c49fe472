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

#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "axps/condition.hpp"
#include "axps/error.hpp"
#include "axps/label_io.hpp"
#include "axps/metrics.hpp"

namespace axps {

enum class OutputFormat { json, csv, markdown };

inline OutputFormat parse_output_format(std::string_view s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "markdown" || s == "md") return OutputFormat::markdown;
  throw Error(Errc::invalid_argument, "unknown output format '" + std::string(s) + "'");
}

/// Two decimals, the way the challenge tables print scores.
inline std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// weights.json

inline WeightConfig weights_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(Errc::malformed_json, "weights: expected an object");
  std::map<ConditionTag, double> w;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_number()) throw Error(Errc::malformed_json, "weights: '" + key + "' must be a number");
    w[ConditionTag::parse(key)] = value.get<double>();
  }
  return WeightConfig(std::move(w));
}

inline nlohmann::json to_json(const WeightConfig& w) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [tag, lambda] : w.weights()) doc[tag.str()] = lambda;
  return doc;
}

// ---------------------------------------------------------------------------
// report.json

namespace detail {

inline nlohmann::json quality_json(const Quality& q) { return {{"pq", q.pq}, {"sq", q.sq}, {"rq", q.rq}}; }

inline Quality quality_from(const nlohmann::json& doc, std::string_view what) {
  Quality q;
  for (auto [key, field] : {std::pair{"pq", &Quality::pq}, std::pair{"sq", &Quality::sq},
                            std::pair{"rq", &Quality::rq}}) {
    const auto& v = require(doc, key, what);
    if (!v.is_number()) throw Error(Errc::malformed_json, std::string(what) + ": '" + key + "' must be a number");
    q.*field = v.get<double>();
  }
  return q;
}

}  // namespace detail

inline nlohmann::json to_json(const ScoreReport& report) {
  nlohmann::json doc;
  doc["weighted"] = {{"wpq", report.weighted.wpq}, {"wsq", report.weighted.wsq}, {"wrq", report.weighted.wrq}};
  doc["all"] = detail::quality_json(report.all);
  nlohmann::json marginals = nlohmann::json::object();
  for (std::size_t m = 0; m < kAllMarginals.size(); ++m) {
    const auto& cell = report.marginals[m];
    marginals[std::string(to_string(kAllMarginals[m]))] = cell ? detail::quality_json(*cell) : nlohmann::json();
  }
  doc["marginals"] = marginals;
  auto conditions = nlohmann::json::array();
  for (const auto& cs : report.per_condition) {
    auto classes = nlohmann::json::array();
    for (const auto& s : cs.per_class) {
      nlohmann::json c = {{"category_id", s.category_id},
                          {"tp", s.tp},
                          {"fp", s.fp},
                          {"fn", s.fn},
                          {"iou_sum", s.iou_sum.value()}};
      if (auto q = class_pq(s)) {
        c["pq"] = q->pq;
        c["sq"] = q->sq;
        c["rq"] = q->rq;
      }
      classes.push_back(std::move(c));
    }
    nlohmann::json entry = detail::quality_json(cs.quality);
    entry["condition"] = cs.condition.str();
    entry["n_scenes"] = cs.n_scenes;
    entry["per_class"] = std::move(classes);
    conditions.push_back(std::move(entry));
  }
  doc["per_condition"] = std::move(conditions);
  doc["weights_used"] = to_json(report.weights_used);
  return doc;
}

/// Parses a report. Only the weighted block is mandatory, so bare score
/// triples (e.g. externally reported results) can be ranked alongside full reports.
inline ScoreReport report_from_json(const nlohmann::json& doc) {
  ScoreReport report;
  const auto& weighted = detail::require(doc, "weighted", "report");
  for (auto [key, field] : {std::pair{"wpq", &WeightedScores::wpq}, std::pair{"wsq", &WeightedScores::wsq},
                            std::pair{"wrq", &WeightedScores::wrq}}) {
    const auto& v = detail::require(weighted, key, "report");
    if (!v.is_number()) throw Error(Errc::malformed_json, std::string("report: '") + key + "' must be a number");
    report.weighted.*field = v.get<double>();
  }
  if (doc.contains("weights_used")) report.weights_used = weights_from_json(doc.at("weights_used"));
  if (doc.contains("per_condition")) {
    for (const auto& entry : doc.at("per_condition")) {
      ConditionScores cs;
      cs.condition = ConditionTag::parse(detail::require(entry, "condition", "report").get<std::string>());
      cs.quality = detail::quality_from(entry, "report");
      cs.n_scenes = entry.value("n_scenes", std::uint64_t{0});
      if (entry.contains("per_class")) {
        for (const auto& c : entry.at("per_class")) {
          ClassScore s;
          s.category_id = detail::require(c, "category_id", "report").get<CategoryId>();
          s.tp = detail::require(c, "tp", "report").get<std::uint64_t>();
          s.fp = detail::require(c, "fp", "report").get<std::uint64_t>();
          s.fn = detail::require(c, "fn", "report").get<std::uint64_t>();
          s.iou_sum = IouSum::from_value(detail::require(c, "iou_sum", "report").get<double>());
          cs.per_class.push_back(s);
        }
      }
      report.per_condition.push_back(std::move(cs));
    }
  }
  if (doc.contains("all")) report.all = detail::quality_from(doc.at("all"), "report");
  if (doc.contains("marginals")) {
    const auto& marginals = doc.at("marginals");
    for (std::size_t m = 0; m < kAllMarginals.size(); ++m) {
      const std::string key(to_string(kAllMarginals[m]));
      if (marginals.contains(key) && !marginals.at(key).is_null()) {
        report.marginals[m] = detail::quality_from(marginals.at(key), "report");
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Text renderings

/// Markdown table with every column padded to its widest cell.
inline std::string markdown_table(const std::vector<std::string>& header,
                                  const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 3);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = std::max(width[c], header[c].size());
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& cells) {
    out << '|';
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : "";
      out << ' ' << cell << std::string(width[c] - cell.size(), ' ') << " |";
    }
    out << '\n';
  };
  emit(header);
  out << '|';
  for (auto w : width) out << std::string(w + 2, '-') << '|';
  out << '\n';
  for (const auto& row : rows) emit(row);
  return out.str();
}

inline std::string render_markdown(const ScoreReport& report) {
  std::ostringstream out;
  out << "## Weighted scores\n\n"
      << markdown_table({"wPQ", "wSQ", "wRQ"}, {{format_score(report.weighted.wpq), format_score(report.weighted.wsq),
                                                 format_score(report.weighted.wrq)}});

  std::vector<std::string> header;
  std::vector<std::string> pq_row;
  for (std::size_t m = 0; m < kAllMarginals.size(); ++m) {
    std::string name(to_string(kAllMarginals[m]));
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    header.push_back(name);
    pq_row.push_back(report.marginals[m] ? format_score(report.marginals[m]->pq) : "-");
  }
  out << "\n## PQ per condition\n\n" << markdown_table(header, {pq_row});

  std::vector<std::vector<std::string>> rows;
  for (const auto& cs : report.per_condition) {
    rows.push_back({cs.condition.str(), std::to_string(cs.n_scenes), format_score(cs.quality.pq),
                    format_score(cs.quality.sq), format_score(cs.quality.rq)});
  }
  out << "\n## Conditions\n\n" << markdown_table({"Condition", "Scenes", "PQ", "SQ", "RQ"}, rows);
  return out.str();
}

inline std::string render_csv(const ScoreReport& report) {
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  std::ostringstream out;
  out << "scope,name,n_scenes,pq,sq,rq\n";
  out << "weighted,all,," << num(report.weighted.wpq) << ',' << num(report.weighted.wsq) << ','
      << num(report.weighted.wrq) << '\n';
  for (const auto& cs : report.per_condition) {
    out << "condition," << cs.condition.str() << ',' << cs.n_scenes << ',' << num(cs.quality.pq) << ','
        << num(cs.quality.sq) << ',' << num(cs.quality.rq) << '\n';
  }
  for (std::size_t m = 0; m < kAllMarginals.size(); ++m) {
    if (!report.marginals[m]) continue;
    const auto& q = *report.marginals[m];
    out << "marginal," << to_string(kAllMarginals[m]) << ",," << num(q.pq) << ',' << num(q.sq) << ',' << num(q.rq)
        << '\n';
  }
  return out.str();
}

inline std::string render(const ScoreReport& report, OutputFormat format) {
  switch (format) {
    case OutputFormat::json: return to_json(report).dump(2) + "\n";
    case OutputFormat::csv: return render_csv(report);
    case OutputFormat::markdown: return render_markdown(report);
  }
  return {};
}

inline nlohmann::json to_json(const std::vector<LeaderboardRow>& board) {
  auto doc = nlohmann::json::array();
  for (const auto& row : board) {
    doc.push_back({{"rank", row.rank},
                   {"team", row.team},
                   {"wpq", row.scores.wpq},
                   {"wsq", row.scores.wsq},
                   {"wrq", row.scores.wrq}});
  }
  return doc;
}

inline std::string render(const std::vector<LeaderboardRow>& board, OutputFormat format) {
  switch (format) {
    case OutputFormat::json: return to_json(board).dump(2) + "\n";
    case OutputFormat::csv: {
      std::ostringstream out;
      out << "rank,team,wpq,wsq,wrq\n";
      for (const auto& row : board) {
        out << row.rank << ',' << row.team << ',' << format_score(row.scores.wpq) << ','
            << format_score(row.scores.wsq) << ',' << format_score(row.scores.wrq) << '\n';
      }
      return out.str();
    }
    case OutputFormat::markdown: {
      std::vector<std::vector<std::string>> rows;
      for (const auto& row : board) {
        rows.push_back({std::to_string(row.rank), row.team, format_score(row.scores.wpq),
                        format_score(row.scores.wsq), format_score(row.scores.wrq)});
      }
      return markdown_table({"Rank", "Team", "wPQ", "wSQ", "wRQ"}, rows);
    }
  }
  return {};
}

}  // namespace axps
