#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iglu/agents.hpp"
#include "iglu/corpus.hpp"
#include "iglu/loop.hpp"
#include "iglu/metrics.hpp"

namespace iglu {

/// Everything needed to reproduce one batch evaluation.
struct RunSpec {
  std::optional<std::string> corpus_path;  ///< episodes.jsonl; synthetic corpus when unset
  std::optional<Split> split;  ///< for a synthetic corpus, applied after an 80/10/10 split
  std::uint64_t synthetic_seed = 0;
  std::size_t synthetic_n = 500;
  std::vector<ShapeKind> shapes = all_shapes();

  AgentProfile agent;
  std::optional<std::string> agent_command;  ///< external builder process instead of `agent`
  Regime regime = NoHelp{};
  RegionScheme scheme;
  Bank bank = Bank::Test;
  std::optional<std::string> templates_path;
  ParseMode parse_mode = ParseMode::Lenient;
  FollowOptions follow;

  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<std::string> output_dir;
  std::string label;  ///< report row label; derived from agent and regime when empty

  /// Throws InvalidArgument.
  void validate() const;
};

RunSpec run_spec_from_json(const nlohmann::json& j);
nlohmann::json run_spec_to_json(const RunSpec& spec);

nlohmann::json regime_to_json(const Regime& regime);
Regime regime_from_json(const nlohmann::json& j);

std::vector<Episode> load_episodes(const RunSpec& spec);

struct EvalResult {
  ReportRow row;
  std::vector<EpisodeOutcome> outcomes;  ///< in corpus order
};

/// Runs every episode under the spec's regime. With an output dir, writes
/// report.csv, report.txt and traces.jsonl there.
EvalResult run_eval(const RunSpec& spec);
EvalResult run_eval(const RunSpec& spec, const std::vector<Episode>& episodes);

/// One restrictive-help row per scheme (ablation.csv / ablation.txt).
std::vector<ReportRow> run_ablation_regions(const RunSpec& spec, const std::vector<RegionScheme>& schemes);

struct CalibrationPoint {
  double threshold = 0.0;
  double question_rate = 0.0;
  double reward_mean = 0.0;
};

struct Calibration {
  std::vector<CalibrationPoint> curve;
  double chosen = 0.0;
  double max_question_rate = 0.5;
};

/// Ten-point sweep from -1 to +infinity.
std::vector<double> default_threshold_sweep();

/// Question rate and mean reward per threshold under the spec's Clarify
/// regime; picks the smallest threshold whose question rate is at most
/// `max_question_rate`. Writes calibration.csv and calibration.json.
Calibration calibrate_threshold(const RunSpec& spec, const std::vector<double>& sweep = default_threshold_sweep(),
                                double max_question_rate = 0.5);

std::string calibration_csv(const Calibration& c);

}  // namespace iglu
