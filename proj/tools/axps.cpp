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


// axps: command-line front end for the panoptic evaluation engine.
//
// Exit codes: 0 success, 1 evaluation faults or rejected submission,
// 2 usage or configuration errors.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "axps/axps.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFaults = 1;
constexpr int kUsage = 2;

// Thrown for bad flags or missing inputs; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned default_threads() {
  if (const char* env = std::getenv("AXPS_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring AXPS_THREADS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw UsageError(what + " not found: " + p.string());
}

axps::CategoryTable load_categories(const std::string& path) {
  if (path.empty()) return axps::CategoryTable::cityscapes();
  require_exists(path, "categories");
  return axps::CategoryTable::from_json(axps::detail::parse_json(axps::read_file_text(path), "categories"));
}

axps::WeightConfig load_weights(const std::string& path) {
  if (path.empty()) return {};
  require_exists(path, "weights");
  return axps::weights_from_json(axps::detail::parse_json(axps::read_file_text(path), "weights"));
}

std::vector<axps::SceneManifest> load_manifest_file(const std::string& path) {
  require_exists(path, "manifest");
  return axps::load_manifest(axps::read_file_text(path));
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    axps::write_file(out, text);
  }
}

void print_faults(const std::vector<axps::SceneFault>& faults, std::string_view prefix) {
  for (const auto& f : faults) {
    std::cerr << prefix << (f.scene_id.empty() ? "" : f.scene_id + ": ") << f.reason << '\n';
  }
}

struct EvaluateArgs {
  std::string gt, pred, manifest, categories, weights, format = "json", out;
  unsigned threads = 0;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto scenes = load_manifest_file(a.manifest);
  require_exists(a.gt, "ground-truth directory");
  require_exists(a.pred, "predictions");
  const auto format = axps::parse_output_format(a.format);
  axps::GroundTruth gt(a.gt, scenes, load_categories(a.categories));
  const auto weights = load_weights(a.weights);
  const auto archive = axps::SubmissionArchive::open(a.pred);

  const auto result = axps::evaluate(gt, archive, weights, a.threads);
  print_faults(result.warnings, "warning: ");
  if (!result.report) {
    print_faults(result.faults, "error: ");
    std::cerr << result.faults.size() << " fault(s); no report written\n";
    return kFaults;
  }
  emit(axps::render(*result.report, format), a.out);
  return kOk;
}

struct RankArgs {
  std::vector<std::string> reports;
  std::string format = "markdown", out;
};

int cmd_rank(const RankArgs& a) {
  const auto format = axps::parse_output_format(a.format);
  std::vector<axps::RankInput> inputs;
  for (const auto& path : a.reports) {
    require_exists(path, "report");
    const auto doc = axps::detail::parse_json(axps::read_file_text(path), path);
    const auto report = axps::report_from_json(doc);
    const std::string team =
        doc.contains("team") && doc["team"].is_string() ? doc["team"].get<std::string>() : fs::path(path).stem().string();
    inputs.push_back({team, report.weighted});
  }
  emit(axps::render(axps::rank_submissions(std::move(inputs)), format), a.out);
  return kOk;
}

struct ValidateArgs {
  std::string archive, manifest, categories, gt;
  unsigned threads = 0;
};

int cmd_validate(const ValidateArgs& a) {
  const auto scenes = load_manifest_file(a.manifest);
  require_exists(a.archive, "archive");
  if (!a.gt.empty()) require_exists(a.gt, "ground-truth directory");
  axps::GroundTruth gt(a.gt, scenes, load_categories(a.categories));
  const auto faults = axps::validate_submission(axps::SubmissionArchive::open(a.archive), gt, a.threads);
  for (const auto& f : faults) std::cout << (f.scene_id.empty() ? "-" : f.scene_id) << ": " << f.reason << '\n';
  if (!faults.empty()) {
    std::cerr << faults.size() << " fault(s)\n";
    return kFaults;
  }
  std::cout << "ok: " << scenes.size() << " scene(s)\n";
  return kOk;
}

struct SynthArgs {
  std::string out;
  std::size_t scenes = 8;
  axps::oracle::SynthSpec spec;
  double strength = 0.3;
};

int cmd_synth(SynthArgs a) {
  if (a.out.empty()) throw UsageError("--out is required");
  const auto drop = a.spec.perturb.drop_segments;
  a.spec.perturb = axps::oracle::Perturbation::from_strength(a.strength);
  a.spec.perturb.drop_segments = drop;
  const auto cats = axps::CategoryTable::cityscapes();
  try {
    axps::oracle::check_spec(a.spec, cats);
  } catch (const axps::Error& e) {
    throw UsageError(e.what());
  }
  axps::write_dataset(a.out, axps::synth_dataset(a.scenes, a.spec, cats), cats);
  std::cout << "wrote " << a.scenes << " scene(s) to " << a.out << '\n';
  return kOk;
}

int cmd_oracle_check(std::size_t cases, std::uint64_t seed) {
  if (cases == 0) {
    std::cerr << "warning: 0 cases requested; nothing was checked\n";
    std::cout << "oracle-check: PASS (0 cases)\n";
    return kOk;
  }
  const auto summary = axps::oracle_check(cases, seed);
  for (auto s : summary.mismatched_seeds) std::cout << "mismatch: seed " << s << '\n';
  for (const auto& d : summary.details) std::cout << "mismatch: " << d << '\n';
  std::cout << "oracle-check: " << (summary.passed() ? "PASS" : "FAIL") << " (" << summary.cases << " cases, "
            << summary.mismatched_seeds.size() << " mismatched, max score diff " << summary.max_score_diff << ")\n";
  return summary.passed() ? kOk : kFaults;
}

struct SubmitArgs {
  std::string root, team, phase = "validation", archive, gt, manifest, categories, weights, phase_config;
  unsigned threads = 0;
};

int cmd_submit(const SubmitArgs& a) {
  if (a.root.empty() || a.team.empty()) throw UsageError("--root and --team are required");
  const auto scenes = load_manifest_file(a.manifest);
  require_exists(a.gt, "ground-truth directory");
  require_exists(a.archive, "archive");
  axps::PhaseConfig config;
  if (!a.phase_config.empty()) {
    require_exists(a.phase_config, "phase config");
    config = axps::PhaseConfig::from_json(axps::detail::parse_json(axps::read_file_text(a.phase_config), "phase"));
  } else {
    config = axps::parse_phase(a.phase) == axps::Phase::validation ? axps::PhaseConfig::validation_phase()
                                                                   : axps::PhaseConfig::final_phase();
  }
  std::map<axps::Phase, axps::PhaseSetup> phases;
  phases.emplace(config.phase, axps::PhaseSetup{config, axps::GroundTruth(a.gt, scenes, load_categories(a.categories))});
  axps::Harness harness(a.root, std::move(phases), load_weights(a.weights), a.threads);

  axps::SubmissionRecord record;
  try {
    record = harness.submit(a.team, config.phase, a.archive);
  } catch (const axps::Error& e) {
    if (e.code() != axps::Errc::quota_exhausted) throw;
    std::cerr << "denied: " << e.what() << '\n';
    return kFaults;
  }
  nlohmann::json out = {{"team", record.team},
                        {"phase", axps::to_string(record.phase)},
                        {"sequence_no", record.sequence_no},
                        {"timestamp", record.timestamp},
                        {"status", axps::to_string(record.status)}};
  if (!record.reason.empty()) out["reason"] = record.reason;
  if (record.report) out["scores"] = axps::to_json(*record.report)["weighted"];
  if (!record.report_path.empty()) out["report"] = record.report_path.string();
  std::cout << out.dump(2) << '\n';
  print_faults(record.faults, "fault: ");
  return record.status == axps::SubmissionStatus::scored ? kOk : kFaults;
}

int cmd_leaderboard(const std::string& root, const std::string& phase, const std::string& format,
                    const std::string& out) {
  const auto ledger_path = fs::path(root) / "ledger.jsonl";
  const auto fmt = axps::parse_output_format(format);
  const auto p = axps::parse_phase(phase);
  std::vector<axps::LeaderboardRow> board;
  if (fs::exists(ledger_path)) board = axps::leaderboard_from(axps::QuotaLedger(ledger_path).scored(p));
  emit(axps::render(board, fmt), out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panoptic segmentation evaluation under adverse conditions"};
  app.require_subcommand(1);
  const unsigned threads_default = default_threads();

  EvaluateArgs ev;
  ev.threads = threads_default;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--gt", ev.gt, "Ground-truth root directory")->required();
  evaluate->add_option("--pred", ev.pred, "Prediction directory or zip archive")->required();
  evaluate->add_option("--manifest", ev.manifest, "Scene manifest (JSON)")->required();
  evaluate->add_option("--categories", ev.categories, "Category table (JSON); defaults to the 19 Cityscapes classes");
  evaluate->add_option("--weights", ev.weights, "Per-condition weights (JSON)");
  evaluate->add_option("--threads", ev.threads, "Worker threads (default: $AXPS_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--format", ev.format, "json, csv or markdown")->capture_default_str();
  evaluate->add_option("--out", ev.out, "Output file (default: stdout)");

  RankArgs rk;
  auto* rank = app.add_subcommand("rank", "Order score reports into a leaderboard");
  rank->add_option("reports", rk.reports, "Report files")->required();
  rank->add_option("--format", rk.format, "json, csv or markdown")->capture_default_str();
  rank->add_option("--out", rk.out, "Output file (default: stdout)");

  ValidateArgs va;
  va.threads = threads_default;
  auto* validate = app.add_subcommand("validate", "Check a submission archive for format faults");
  validate->add_option("archive", va.archive, "Prediction directory or zip archive")->required();
  validate->add_option("--manifest", va.manifest, "Scene manifest (JSON)")->required();
  validate->add_option("--categories", va.categories, "Category table (JSON)");
  validate->add_option("--gt", va.gt, "Ground-truth root, enables the dimension check");
  validate->add_option("--threads", va.threads, "Worker threads")->check(CLI::PositiveNumber);

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic ground-truth/prediction dataset");
  synth->add_option("--out", sy.out, "Output directory")->required();
  synth->add_option("--scenes", sy.scenes, "Number of scenes")->capture_default_str();
  synth->add_option("--seed", sy.spec.seed, "Base seed")->capture_default_str();
  synth->add_option("--width", sy.spec.width, "Width in pixels")->capture_default_str();
  synth->add_option("--height", sy.spec.height, "Height in pixels")->capture_default_str();
  synth->add_option("--segments", sy.spec.n_segments, "Segments per scene")->capture_default_str();
  synth->add_option("--classes", sy.spec.n_classes, "Categories drawn from")->capture_default_str();
  synth->add_option("--void-fraction", sy.spec.void_fraction, "Share of void pixels")->capture_default_str();
  synth->add_option("--strength", sy.strength, "Perturbation strength in [0, 1]")->capture_default_str();
  synth->add_option("--drop", sy.spec.perturb.drop_segments, "Segments to drop from each prediction")
      ->capture_default_str();

  std::size_t cases = 1000;
  std::uint64_t oracle_seed = 0;
  auto* oracle = app.add_subcommand("oracle-check", "Differential test against the brute-force oracle");
  oracle->add_option("--cases", cases, "Number of generated scenes")->capture_default_str();
  oracle->add_option("--seed", oracle_seed, "Base seed")->capture_default_str();

  SubmitArgs sb;
  sb.threads = threads_default;
  auto* submit = app.add_subcommand("submit", "Admit, validate and score one challenge submission");
  submit->add_option("--root", sb.root, "Challenge state directory")->required();
  submit->add_option("--team", sb.team, "Team name")->required();
  submit->add_option("--phase", sb.phase, "validation or final")->capture_default_str();
  submit->add_option("--phase-config", sb.phase_config, "phase.json (overrides --phase)");
  submit->add_option("--archive", sb.archive, "Prediction directory or zip archive")->required();
  submit->add_option("--gt", sb.gt, "Ground-truth root directory")->required();
  submit->add_option("--manifest", sb.manifest, "Scene manifest (JSON)")->required();
  submit->add_option("--categories", sb.categories, "Category table (JSON)");
  submit->add_option("--weights", sb.weights, "Per-condition weights (JSON)");
  submit->add_option("--threads", sb.threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string lb_root, lb_phase = "validation", lb_format = "markdown", lb_out;
  auto* leaderboard = app.add_subcommand("leaderboard", "Best scored submission per team, ranked");
  leaderboard->add_option("--root", lb_root, "Challenge state directory")->required();
  leaderboard->add_option("--phase", lb_phase, "validation or final")->capture_default_str();
  leaderboard->add_option("--format", lb_format, "json, csv or markdown")->capture_default_str();
  leaderboard->add_option("--out", lb_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*evaluate) return cmd_evaluate(ev);
    if (*rank) return cmd_rank(rk);
    if (*validate) return cmd_validate(va);
    if (*synth) return cmd_synth(sy);
    if (*oracle) return cmd_oracle_check(cases, oracle_seed);
    if (*submit) return cmd_submit(sb);
    if (*leaderboard) return cmd_leaderboard(lb_root, lb_phase, lb_format, lb_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const axps::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == axps::Errc::io ? kFaults : kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFaults;
  }
  return kUsage;
}
