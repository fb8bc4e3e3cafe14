#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "iglu/agents.hpp"
#include "iglu/codec.hpp"
#include "iglu/corpus.hpp"
#include "iglu/help.hpp"
#include "iglu/metrics.hpp"

namespace iglu {

/// Settings shared by every regime: how help is located, phrased, and how
/// builder output is parsed.
struct HarnessOptions {
  RegionScheme scheme;
  Bank bank = Bank::Test;
  const TemplateBank* templates = nullptr;  ///< nullptr selects the builtin bank
  std::uint64_t seed = 0;
  ParseMode parse_mode = ParseMode::Lenient;
  FollowOptions follow;
};

/// Builder output -> blocks. A strict-mode failure counts as an empty prediction.
GridDiff parse_prediction(const std::string& utterance, const GridBounds& bounds, ParseMode mode);

enum class ChangeScoreMode { BlocksDelta, SymmetricDiff };

std::string_view to_string(ChangeScoreMode mode);
ChangeScoreMode change_score_mode_from_string(std::string_view s);

/// BlocksDelta: |oi| - |o0| (signed). SymmetricDiff: |o0 △ oi|.
double change_score(const GridDiff& o0, const GridDiff& oi, ChangeScoreMode mode = ChangeScoreMode::BlocksDelta);

/// Confusion threshold shipped in data/loop_config.json (see calibrate-threshold).
inline constexpr double kDefaultThreshold = 0.0;

/// Self-help accuracies used when none are configured (held-out accuracies of
/// the trained help classifiers).
const std::map<HelpKind, double>& default_predictor_accuracies();

struct LoopConfig {
  double threshold = kDefaultThreshold;  ///< +infinity disables questions
  ChangeScoreMode change_score = ChangeScoreMode::BlocksDelta;
  std::vector<HelpKind> help_kinds = {kAllHelpKinds.begin(), kAllHelpKinds.end()};
  std::map<HelpKind, double> predictor_accuracies = default_predictor_accuracies();
  std::uint64_t predictor_seed = 0;

  /// Throws InvalidArgument for an empty kind list or a NaN threshold.
  void validate() const;
};

LoopConfig loop_config_from_json(const nlohmann::json& j);
nlohmann::json loop_config_to_json(const LoopConfig& cfg);

using PredictorSet = std::map<HelpKind, SelfHelpPredictor>;
PredictorSet make_predictors(const LoopConfig& cfg);

/// Per-kind clarification questions; element 0 is the canonical text.
const std::vector<std::string>& clarification_questions(HelpKind kind);

struct HelpProbe {
  HelpMessage help;
  GridDiff output;
  double delta = 0.0;
};

/// Record of one confusion-detection pass and its (optional) clarification.
struct LoopTrace {
  std::string episode_id;
  GridDiff o0;
  std::vector<HelpProbe> probes;
  std::optional<HelpKind> chosen;
  std::optional<std::string> question;
  std::optional<HelpMessage> answer;
  std::optional<GridDiff> o_final;

  bool awaiting_answer() const { return question.has_value() && !o_final.has_value(); }
};

nlohmann::json trace_to_json(const LoopTrace& trace);

/// Baseline prediction, one rerun per self-generated help, and the question
/// for the most impactful help if its change score exceeds the threshold.
/// Without a question the trace is complete with o_final = o0.
LoopTrace run_confusion_loop(const Builder& builder, const PredictorSet& predictors, const Episode& episode,
                             const LoopConfig& cfg, const HarnessOptions& harness = {});

using ClarificationAnswer = std::variant<HelpMessage, std::string>;

/// Completes an awaiting trace with the builder's prediction under the answer.
/// Free text is normalized first. Throws WrongPhase, KindMismatch or
/// Unrecognized, leaving the trace unchanged.
GridDiff answer_clarification(LoopTrace& trace, const ClarificationAnswer& answer, const Builder& builder,
                              const Episode& episode, const HarnessOptions& harness = {});

// Episode regimes ------------------------------------------------------------

struct NoHelp {};
struct OracleHelp {
  HelpKind kind;
};
struct SelfHelp {
  HelpKind kind;
  double accuracy;
};
enum class AnswerSource { Oracle };
struct Clarify {
  LoopConfig config;
  AnswerSource answers = AnswerSource::Oracle;
};

using Regime = std::variant<NoHelp, OracleHelp, SelfHelp, Clarify>;

std::string regime_label(const Regime& regime);

struct EpisodeOutcome {
  std::string episode_id;
  EpisodeScore score;
  GridDiff prediction;
  std::optional<GridDiff> prior;       ///< prediction the help was given on
  std::optional<HelpMessage> help;     ///< help actually given
  std::optional<LoopTrace> trace;      ///< Clarify regime only
};

nlohmann::json outcome_to_json(const EpisodeOutcome& outcome);

/// Accurate help computed from gold (and the prior prediction for corrective
/// and mistake help); nullopt where no such help exists.
std::optional<HelpMessage> oracle_help(HelpKind kind, const Episode& episode, const std::optional<GridDiff>& prior,
                                       const HarnessOptions& harness);

EpisodeOutcome run_episode(const Builder& builder, const Episode& episode, const Regime& regime,
                           const HarnessOptions& harness = {});

}  // namespace iglu
