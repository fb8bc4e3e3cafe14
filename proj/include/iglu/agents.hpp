#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "iglu/corpus.hpp"
#include "iglu/help.hpp"
#include "iglu/regions.hpp"

namespace iglu {

/// What a Builder sees for one step. Help travels as an utterance appended to
/// the instruction.
struct BuilderInput {
  std::string dialogue;
  std::string grid_text;
  std::optional<std::string> help;

  /// "INSTRUCTION: <dialogue>, HELP: <help>" (or without the HELP part).
  std::string composite() const;
};

BuilderInput make_builder_input(const Episode& episode, const std::optional<HelpMessage>& help);

/// A Builder maps an instruction step (plus optional help) to a block utterance.
class Builder {
 public:
  virtual ~Builder() = default;
  /// Simulated builders read `episode.gold`; real ones should use `input` only.
  virtual std::string predict(const Episode& episode, const BuilderInput& input) const = 0;
};

enum class AgentKind { Oracle, Noisy, HelpAwareNoisy, Scripted };

std::string_view to_string(AgentKind kind);
AgentKind agent_kind_from_string(std::string_view s);

struct AgentProfile {
  AgentKind kind = AgentKind::Oracle;
  double p_off = 0.0;
  double p_drop = 0.0;
  double p_extra = 0.0;
  int radius = 1;
  std::uint64_t seed = 0;
  /// Scheme the agent uses to interpret restrictive help.
  RegionScheme scheme;
  /// Scripted agents: utterance keyed by help kind name, or "none" when no
  /// (recognized) help was given.
  std::map<std::string, std::string> script;

  /// Throws InvalidArgument if a probability is outside [0,1] or radius < 1.
  void validate() const;
};

AgentProfile agent_profile_from_json(const nlohmann::json& j);
nlohmann::json agent_profile_to_json(const AgentProfile& p);

std::unique_ptr<Builder> make_builder(const AgentProfile& profile);

std::string builder_predict(const Builder& builder, const Episode& episode,
                            const std::optional<HelpMessage>& help);
std::string builder_predict(const AgentProfile& profile, const Episode& episode,
                            const std::optional<HelpMessage>& help);

/// Builder backed by an external process speaking line-delimited JSON:
/// {"dialogue":...,"grid":...,"help":...,"input":...} -> {"utterance":...}.
class ProcessBuilder : public Builder {
 public:
  explicit ProcessBuilder(std::string command);
  ~ProcessBuilder() override;
  ProcessBuilder(const ProcessBuilder&) = delete;
  ProcessBuilder& operator=(const ProcessBuilder&) = delete;

  std::string predict(const Episode& episode, const BuilderInput& input) const override;

 private:
  std::string command_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  mutable std::string pending_;
  mutable std::mutex mutex_;
};

/// Simulated classifier that self-generates one kind of help.
struct SelfHelpPredictor {
  HelpKind kind = HelpKind::Restrictive;
  double accuracy = 1.0;
  std::uint64_t seed = 0;
};

/// Number of classes the predictor chooses among for `kind`. Length and
/// mistake use {0,1,2,3,4,5,>5}.
int label_count(HelpKind kind, const RegionScheme& scheme);

/// With probability `accuracy` the oracle answer, otherwise a uniform draw over
/// the remaining classes. Corrective and mistake predictors need `prediction`
/// (MissingPrediction otherwise).
HelpMessage predict_self_help(const SelfHelpPredictor& predictor, const Episode& episode,
                              const std::optional<GridDiff>& prediction, const RegionScheme& scheme,
                              const Phrasing& phrasing = {});

/// Class index of the oracle answer, or nullopt when the oracle is undefined
/// (empty gold, or empty prediction for corrective help).
std::optional<int> oracle_label(HelpKind kind, const Episode& episode,
                                const std::optional<GridDiff>& prediction, const RegionScheme& scheme,
                                std::uint64_t seed);

}  // namespace iglu
