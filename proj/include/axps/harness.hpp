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
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "axps/archive.hpp"
#include "axps/error.hpp"
#include "axps/evaluate.hpp"
#include "axps/label_io.hpp"
#include "axps/metrics.hpp"
#include "axps/report_io.hpp"

namespace axps {

enum class Phase { validation, final_test };

inline constexpr std::string_view to_string(Phase p) noexcept {
  return p == Phase::validation ? "validation" : "final";
}

inline Phase parse_phase(std::string_view s) {
  if (s == "validation") return Phase::validation;
  if (s == "final") return Phase::final_test;
  throw Error(Errc::invalid_argument, "unknown phase '" + std::string(s) + "'");
}

// Challenge phase rules. The public validation phase allows 100 submissions
// per team against visible ground truth; the final phase allows 5 against
// withheld ground truth.
struct PhaseConfig {
  Phase phase = Phase::validation;
  std::uint32_t max_submissions_per_team = 100;
  bool gt_visible = true;
  bool open = true;
  std::string duration_note;

  static PhaseConfig validation_phase() { return {Phase::validation, 100, true, true, "nearly one month"}; }
  static PhaseConfig final_phase() { return {Phase::final_test, 5, false, true, "six days"}; }

  void check() const {
    const auto expected = phase == Phase::validation ? validation_phase() : final_phase();
    if (max_submissions_per_team != expected.max_submissions_per_team || gt_visible != expected.gt_visible) {
      throw Error(Errc::invalid_argument,
                  "phase " + std::string(to_string(phase)) + ": quota must be " +
                      std::to_string(expected.max_submissions_per_team) + " and gt_visible " +
                      (expected.gt_visible ? "true" : "false"));
    }
  }

  static PhaseConfig from_json(const nlohmann::json& doc) {
    PhaseConfig c;
    c.phase = parse_phase(detail::require(doc, "phase", "phase").get<std::string>());
    c = c.phase == Phase::validation ? validation_phase() : final_phase();
    if (doc.contains("max_submissions_per_team")) {
      c.max_submissions_per_team = doc.at("max_submissions_per_team").get<std::uint32_t>();
    }
    if (doc.contains("gt_visible")) c.gt_visible = doc.at("gt_visible").get<bool>();
    if (doc.contains("open")) c.open = doc.at("open").get<bool>();
    if (doc.contains("duration_note")) c.duration_note = doc.at("duration_note").get<std::string>();
    c.check();
    return c;
  }

  nlohmann::json to_json() const {
    return {{"phase", to_string(phase)},
            {"max_submissions_per_team", max_submissions_per_team},
            {"gt_visible", gt_visible},
            {"open", open},
            {"duration_note", duration_note}};
  }
};

enum class SubmissionStatus { accepted, rejected, scored };

inline constexpr std::string_view to_string(SubmissionStatus s) noexcept {
  switch (s) {
    case SubmissionStatus::accepted: return "accepted";
    case SubmissionStatus::rejected: return "rejected";
    case SubmissionStatus::scored: return "scored";
  }
  return "?";
}

struct SubmissionRecord {
  std::string team;
  Phase phase = Phase::validation;
  std::uint32_t sequence_no = 0;  // 0 for rejected uploads
  std::string timestamp;
  SubmissionStatus status = SubmissionStatus::rejected;
  std::string reason;
  std::vector<SceneFault> faults;
  std::optional<ScoreReport> report;
  std::filesystem::path report_path;
};

// One line of ledger.jsonl.
struct LedgerEvent {
  std::string event;  // "submission" or "scored"
  std::string team;
  Phase phase = Phase::validation;
  std::uint32_t seq = 0;
  std::string ts;
  std::string status;  // accepted | rejected | denied | scored
  std::string reason;
  std::optional<WeightedScores> scores;
  std::string report;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"event", event}, {"team", team}, {"phase", to_string(phase)},
                        {"seq", seq},     {"ts", ts},     {"status", status}};
    if (!reason.empty()) j["reason"] = reason;
    if (scores) j["scores"] = {{"wpq", scores->wpq}, {"wsq", scores->wsq}, {"wrq", scores->wrq}};
    if (!report.empty()) j["report"] = report;
    return j;
  }

  static LedgerEvent from_json(const nlohmann::json& j) {
    LedgerEvent e;
    e.event = j.at("event").get<std::string>();
    e.team = j.at("team").get<std::string>();
    e.phase = parse_phase(j.at("phase").get<std::string>());
    e.seq = j.at("seq").get<std::uint32_t>();
    e.ts = j.at("ts").get<std::string>();
    e.status = j.at("status").get<std::string>();
    e.reason = j.value("reason", "");
    e.report = j.value("report", "");
    if (j.contains("scores")) {
      const auto& s = j.at("scores");
      e.scores = WeightedScores{s.at("wpq").get<double>(), s.at("wsq").get<double>(), s.at("wrq").get<double>()};
    }
    return e;
  }
};

struct ScoredSubmission {
  std::string team;
  std::uint32_t seq = 0;
  WeightedScores scores;

  friend bool operator==(const ScoredSubmission&, const ScoredSubmission&) = default;
};

// Append-only JSON-lines event log and the per-(team, phase) counts derived
// from it. All state is a pure function of the log, so reopening the file
// after a crash reconstructs it exactly. A torn final line (no newline) is
// discarded on open.
class QuotaLedger {
 public:
  explicit QuotaLedger(std::filesystem::path path) : path_(std::move(path)) { replay(); }

  QuotaLedger(const QuotaLedger&) = delete;
  QuotaLedger& operator=(const QuotaLedger&) = delete;

  void append(const LedgerEvent& event) {
    std::lock_guard lock(mutex_);
    apply(event);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out << event.to_json().dump() << '\n';
    out.flush();
    if (!out) throw Error(Errc::io, path_.string() + ": cannot append to ledger");
    events_.push_back(event);
  }

  std::uint32_t accepted(const std::string& team, Phase phase) const {
    std::lock_guard lock(mutex_);
    auto it = accepted_.find({team, phase});
    return it == accepted_.end() ? 0 : it->second;
  }

  std::vector<ScoredSubmission> scored(Phase phase) const {
    std::lock_guard lock(mutex_);
    auto it = scored_.find(phase);
    return it == scored_.end() ? std::vector<ScoredSubmission>{} : it->second;
  }

  std::map<std::pair<std::string, Phase>, std::uint32_t> counts() const {
    std::lock_guard lock(mutex_);
    return accepted_;
  }

  std::vector<LedgerEvent> events() const {
    std::lock_guard lock(mutex_);
    return events_;
  }

  /// Bytes of torn tail dropped during the last replay.
  std::size_t discarded_tail() const noexcept { return discarded_tail_; }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void replay() {
    namespace fs = std::filesystem;
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    if (!fs::exists(path_)) {
      std::ofstream(path_, std::ios::binary).flush();
      return;
    }
    std::string text = read_file_text(path_);
    const auto last_newline = text.rfind('\n');
    const std::size_t keep = last_newline == std::string::npos ? 0 : last_newline + 1;
    if (keep != text.size()) {
      discarded_tail_ = text.size() - keep;
      text.resize(keep);
      fs::resize_file(path_, keep);
    }
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
      const auto end = text.find('\n', start);
      const auto line = std::string_view(text).substr(start, end - start);
      start = end + 1;
      ++line_no;
      if (line.empty()) continue;
      try {
        auto event = LedgerEvent::from_json(nlohmann::json::parse(line));
        apply(event);
        events_.push_back(std::move(event));
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw Error(Errc::corrupt_ledger, path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }

  void apply(const LedgerEvent& e) {
    const auto key = std::pair(e.team, e.phase);
    if (e.event == "submission" && e.status == "accepted") {
      auto& count = accepted_[key];
      if (e.seq != count + 1) {
        throw Error(Errc::corrupt_ledger, "ledger: team " + e.team + " accepted seq " + std::to_string(e.seq) +
                                              " after " + std::to_string(count));
      }
      count = e.seq;
    } else if (e.event == "scored") {
      auto it = accepted_.find(key);
      if (it == accepted_.end() || e.seq == 0 || e.seq > it->second || !e.scores) {
        throw Error(Errc::corrupt_ledger, "ledger: score for unknown submission " + e.team + "#" +
                                              std::to_string(e.seq));
      }
      scored_[e.phase].push_back({e.team, e.seq, *e.scores});
    }
  }

  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<LedgerEvent> events_;
  std::map<std::pair<std::string, Phase>, std::uint32_t> accepted_;
  std::map<Phase, std::vector<ScoredSubmission>> scored_;
  std::size_t discarded_tail_ = 0;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct PhaseSetup {
  PhaseConfig config;
  GroundTruth truth;
};

/// Best scored submission per team, ranked. Within a team the best entry
/// under the leaderboard order wins; equal entries keep the earliest.
inline std::vector<LeaderboardRow> leaderboard_from(const std::vector<ScoredSubmission>& scored) {
  std::map<std::string, RankInput> best;
  for (const auto& s : scored) {
    RankInput candidate{s.team, s.scores};
    auto it = best.find(s.team);
    if (it == best.end()) {
      best.emplace(s.team, candidate);
    } else if (ranks_before(candidate, it->second)) {
      it->second = candidate;
    }
  }
  std::vector<RankInput> inputs;
  for (auto& [team, input] : best) inputs.push_back(std::move(input));
  return rank_submissions(std::move(inputs));
}

// Submission intake for a challenge. Admission (quota check, validation,
// ledger append) is serialized; scoring of admitted uploads runs outside the
// admission lock.
class Harness {
 public:
  using Clock = std::function<std::string()>;

  Harness(std::filesystem::path root, std::map<Phase, PhaseSetup> phases, WeightConfig weights = {},
          unsigned threads = 1, Clock clock = utc_timestamp)
      : root_(std::move(root)),
        phases_(std::move(phases)),
        weights_(std::move(weights)),
        threads_(threads),
        clock_(std::move(clock)),
        ledger_(root_ / "ledger.jsonl") {
    for (const auto& [phase, setup] : phases_) {
      setup.config.check();
      if (setup.config.phase != phase) throw Error(Errc::invalid_argument, "harness: phase key mismatch");
    }
    for (const auto& [key, count] : ledger_.counts()) {
      auto it = phases_.find(key.second);
      if (it != phases_.end() && count > it->second.config.max_submissions_per_team) {
        throw Error(Errc::corrupt_ledger, "ledger: team " + key.first + " exceeds the " +
                                              std::string(to_string(key.second)) + " quota");
      }
    }
  }

  /// Throws Error(quota_exhausted) when the team has used up its quota;
  /// uploads with format faults come back rejected and cost no quota.
  SubmissionRecord submit(const std::string& team, Phase phase, const std::filesystem::path& archive_path) {
    check_team_name(team);
    auto it = phases_.find(phase);
    if (it == phases_.end() || !it->second.config.open) {
      throw Error(Errc::invalid_argument, "phase " + std::string(to_string(phase)) + " is not open");
    }
    const PhaseSetup& setup = it->second;

    SubmissionRecord record;
    record.team = team;
    record.phase = phase;
    {
      std::lock_guard admission(admission_);
      record.timestamp = clock_();
      const auto used = ledger_.accepted(team, phase);
      const auto limit = setup.config.max_submissions_per_team;
      if (used >= limit) {
        const std::string reason = "submission quota exhausted: limit " + std::to_string(limit) + " per team in the " +
                                   std::string(to_string(phase)) + " phase";
        ledger_.append({"submission", team, phase, 0, record.timestamp, "denied", reason, std::nullopt, ""});
        throw Error(Errc::quota_exhausted, reason);
      }

      std::optional<SubmissionArchive> archive;
      try {
        archive.emplace(SubmissionArchive::open(archive_path));
        record.faults = validate_submission(*archive, setup.truth, threads_, setup.config.gt_visible);
      } catch (const Error& e) {
        record.faults.push_back({"", e.what()});
      }
      if (!record.faults.empty()) {
        record.status = SubmissionStatus::rejected;
        record.reason = std::to_string(record.faults.size()) + " validation fault(s)";
        ledger_.append({"submission", team, phase, 0, record.timestamp, "rejected", record.reason, std::nullopt, ""});
        return record;
      }
      record.sequence_no = used + 1;
      record.status = SubmissionStatus::accepted;
      ledger_.append({"submission", team, phase, record.sequence_no, record.timestamp, "accepted", "", std::nullopt,
                      ""});
    }

    auto evaluation = evaluate(setup.truth, SubmissionArchive::open(archive_path), weights_, threads_);
    if (!evaluation.report) {
      record.faults = std::move(evaluation.faults);
      record.reason = "scoring failed";
      return record;
    }
    const auto relative = std::filesystem::path("reports") / std::string(to_string(phase)) / team /
                          (std::to_string(record.sequence_no) + ".json");
    record.report_path = root_ / relative;
    write_file(record.report_path, to_json(*evaluation.report).dump(2) + "\n");
    record.report = std::move(evaluation.report);
    record.status = SubmissionStatus::scored;
    ledger_.append({"scored", team, phase, record.sequence_no, clock_(), "scored", "", record.report->weighted,
                    relative.generic_string()});
    return record;
  }

  std::vector<LeaderboardRow> leaderboard(Phase phase) const { return leaderboard_from(ledger_.scored(phase)); }

  const QuotaLedger& ledger() const noexcept { return ledger_; }

 private:
  static void check_team_name(const std::string& team) {
    const bool ok = !team.empty() && team.size() <= 64 && team.front() != '.' &&
                    std::all_of(team.begin(), team.end(), [](char c) {
                      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
                    });
    if (!ok) throw Error(Errc::invalid_argument, "invalid team name '" + team + "'");
  }

  std::filesystem::path root_;
  std::map<Phase, PhaseSetup> phases_;
  WeightConfig weights_;
  unsigned threads_;
  Clock clock_;
  QuotaLedger ledger_;
  std::mutex admission_;
};

}  // namespace axps
