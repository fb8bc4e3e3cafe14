#include "iglu/loop.hpp"

#include <algorithm>
#include <cmath>

#include "iglu/error.hpp"
#include "iglu/json_io.hpp"
#include "iglu/rng.hpp"

namespace iglu {

GridDiff parse_prediction(const std::string& utterance, const GridBounds& bounds, ParseMode mode) {
  auto parsed = parse_utterance(utterance, bounds, mode);
  if (!parsed.ok()) return {};
  return parsed.diff();
}

std::string_view to_string(ChangeScoreMode mode) {
  return mode == ChangeScoreMode::BlocksDelta ? "blocks_delta" : "symmetric_diff";
}

ChangeScoreMode change_score_mode_from_string(std::string_view s) {
  if (s == "blocks_delta") return ChangeScoreMode::BlocksDelta;
  if (s == "symmetric_diff") return ChangeScoreMode::SymmetricDiff;
  throw Error(ErrorCode::InvalidArgument, "unknown change score mode: " + std::string(s));
}

double change_score(const GridDiff& o0, const GridDiff& oi, ChangeScoreMode mode) {
  if (mode == ChangeScoreMode::BlocksDelta) {
    return static_cast<double>(oi.added.size()) - static_cast<double>(o0.added.size());
  }
  std::size_t common = 0;
  for (const auto& c : o0.added) common += oi.added.count(c);
  return static_cast<double>(o0.added.size() + oi.added.size() - 2 * common);
}

const std::map<HelpKind, double>& default_predictor_accuracies() {
  static const std::map<HelpKind, double> acc = {
      {HelpKind::Restrictive, 0.6235},
      {HelpKind::Length, 0.4022},
      {HelpKind::Corrective, 0.2988},
      {HelpKind::Mistake, 0.7040},
  };
  return acc;
}

void LoopConfig::validate() const {
  if (help_kinds.empty()) throw Error(ErrorCode::InvalidArgument, "help_kinds is empty");
  if (std::isnan(threshold)) throw Error(ErrorCode::InvalidArgument, "threshold is NaN");
  for (const auto& [kind, acc] : predictor_accuracies) {
    if (!(acc >= 0.0 && acc <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "accuracy outside [0,1] for " + std::string(to_string(kind)));
    }
  }
}

LoopConfig loop_config_from_json(const nlohmann::json& j) {
  LoopConfig cfg;
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "loop config must be an object");
  if (j.contains("threshold")) {
    const auto& t = j.at("threshold");
    if (t.is_string() && (t.get<std::string>() == "inf" || t.get<std::string>() == "+inf")) {
      cfg.threshold = std::numeric_limits<double>::infinity();
    } else if (t.is_number()) {
      cfg.threshold = t.get<double>();
    } else {
      throw Error(ErrorCode::SchemaError, "threshold must be a number or \"inf\"");
    }
  }
  if (j.contains("change_score")) cfg.change_score = change_score_mode_from_string(j.at("change_score").get<std::string>());
  if (j.contains("help_kinds")) {
    cfg.help_kinds.clear();
    for (const auto& k : j.at("help_kinds")) cfg.help_kinds.push_back(help_kind_from_string(k.get<std::string>()));
  }
  if (j.contains("predictor_accuracies")) {
    for (const auto& [k, v] : j.at("predictor_accuracies").items()) {
      cfg.predictor_accuracies[help_kind_from_string(k)] = v.get<double>();
    }
  }
  if (j.contains("predictor_seed")) cfg.predictor_seed = j.at("predictor_seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

nlohmann::json loop_config_to_json(const LoopConfig& cfg) {
  nlohmann::json j;
  if (std::isinf(cfg.threshold) && cfg.threshold > 0) {
    j["threshold"] = "inf";
  } else {
    j["threshold"] = cfg.threshold;
  }
  j["change_score"] = to_string(cfg.change_score);
  j["help_kinds"] = nlohmann::json::array();
  for (auto k : cfg.help_kinds) j["help_kinds"].push_back(to_string(k));
  j["predictor_accuracies"] = nlohmann::json::object();
  for (const auto& [k, v] : cfg.predictor_accuracies) j["predictor_accuracies"][std::string(to_string(k))] = v;
  j["predictor_seed"] = cfg.predictor_seed;
  return j;
}

PredictorSet make_predictors(const LoopConfig& cfg) {
  PredictorSet out;
  for (auto kind : cfg.help_kinds) {
    auto it = cfg.predictor_accuracies.find(kind);
    if (it == cfg.predictor_accuracies.end()) {
      throw Error(ErrorCode::PredictorMissing, "no accuracy for " + std::string(to_string(kind)));
    }
    out[kind] = SelfHelpPredictor{kind, it->second, derive_seed(cfg.predictor_seed, {"predictor", to_string(kind)})};
  }
  return out;
}

const std::vector<std::string>& clarification_questions(HelpKind kind) {
  static const std::map<HelpKind, std::vector<std::string>> questions = {
      {HelpKind::Restrictive,
       {"What quadrant should the block be placed in?", "Which part of the grid should I build in?"}},
      {HelpKind::Length, {"How many blocks should I place?", "How many blocks does this step need?"}},
      {HelpKind::Corrective,
       {"Which direction should I move the blocks?", "Should the blocks go further in some direction?"}},
      {HelpKind::Mistake, {"How many of my blocks are wrong?", "Did I put any blocks in the wrong place?"}},
  };
  return questions.at(kind);
}

namespace {

Phrasing phrasing_for(const HarnessOptions& h, std::uint64_t seed) { return Phrasing{h.templates, h.bank, seed}; }

GridDiff predict_with(const Builder& builder, const Episode& episode, const std::optional<HelpMessage>& help,
                      const HarnessOptions& h) {
  return parse_prediction(builder_predict(builder, episode, help), episode.grid_before.bounds(), h.parse_mode);
}

nlohmann::json optional_diff(const std::optional<GridDiff>& d) {
  return d ? diff_to_json(*d) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json trace_to_json(const LoopTrace& t) {
  nlohmann::json j;
  j["episode_id"] = t.episode_id;
  j["o0"] = diff_to_json(t.o0);
  j["probes"] = nlohmann::json::array();
  for (const auto& p : t.probes) {
    j["probes"].push_back({{"kind", to_string(p.help.kind())},
                           {"help", help_to_json(p.help)},
                           {"output", diff_to_json(p.output)},
                           {"delta", p.delta}});
  }
  j["chosen"] = t.chosen ? nlohmann::json(std::string(to_string(*t.chosen))) : nlohmann::json(nullptr);
  j["question"] = t.question ? nlohmann::json(*t.question) : nlohmann::json(nullptr);
  j["answer"] = t.answer ? help_to_json(*t.answer) : nlohmann::json(nullptr);
  j["o_final"] = optional_diff(t.o_final);
  return j;
}

LoopTrace run_confusion_loop(const Builder& builder, const PredictorSet& predictors, const Episode& episode,
                             const LoopConfig& cfg, const HarnessOptions& harness) {
  cfg.validate();
  for (auto kind : cfg.help_kinds) {
    if (!predictors.count(kind)) {
      throw Error(ErrorCode::PredictorMissing, "no predictor for " + std::string(to_string(kind)));
    }
  }
  LoopTrace trace;
  trace.episode_id = episode.id;
  trace.o0 = predict_with(builder, episode, std::nullopt, harness);

  std::optional<std::size_t> best;
  for (auto kind : cfg.help_kinds) {
    const auto& predictor = predictors.at(kind);
    std::optional<GridDiff> prior;
    if (kind == HelpKind::Corrective || kind == HelpKind::Mistake) prior = trace.o0;
    auto help = predict_self_help(predictor, episode, prior, harness.scheme,
                                  phrasing_for(harness, derive_seed(harness.seed, {"self-phrase"})));
    auto output = predict_with(builder, episode, help, harness);
    double delta = change_score(trace.o0, output, cfg.change_score);
    trace.probes.push_back(HelpProbe{std::move(help), std::move(output), delta});
    if (!best || delta > trace.probes[*best].delta) best = trace.probes.size() - 1;
  }

  if (best && trace.probes[*best].delta > cfg.threshold) {
    trace.chosen = trace.probes[*best].help.kind();
    trace.question = clarification_questions(*trace.chosen).front();
  } else {
    trace.o_final = trace.o0;
  }
  return trace;
}

GridDiff answer_clarification(LoopTrace& trace, const ClarificationAnswer& answer, const Builder& builder,
                              const Episode& episode, const HarnessOptions& harness) {
  if (!trace.awaiting_answer() || !trace.chosen) {
    throw Error(ErrorCode::WrongPhase, "trace is not awaiting a clarification answer");
  }
  HelpMessage help;
  if (const auto* msg = std::get_if<HelpMessage>(&answer)) {
    help = *msg;
  } else {
    auto normalized = normalize_help(std::get<std::string>(answer), harness.scheme);
    if (const auto* un = std::get_if<Unrecognized>(&normalized)) {
      throw Error(ErrorCode::Unrecognized, un->reason);
    }
    help = std::get<HelpMessage>(normalized);
  }
  if (help.kind() != *trace.chosen) {
    throw Error(ErrorCode::KindMismatch, "expected " + std::string(to_string(*trace.chosen)) + " help, got " +
                                             std::string(to_string(help.kind())));
  }
  auto out = predict_with(builder, episode, help, harness);
  trace.answer = help;
  trace.o_final = out;
  return out;
}

std::string regime_label(const Regime& regime) {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, NoHelp>) return "no_help";
        if constexpr (std::is_same_v<T, OracleHelp>) return "oracle_" + std::string(to_string(r.kind));
        if constexpr (std::is_same_v<T, SelfHelp>) return "self_" + std::string(to_string(r.kind));
        if constexpr (std::is_same_v<T, Clarify>) return "clarify";
      },
      regime);
}

std::optional<HelpMessage> oracle_help(HelpKind kind, const Episode& episode, const std::optional<GridDiff>& prior,
                                       const HarnessOptions& harness) {
  const auto& gold = episode.gold;
  auto phrasing = phrasing_for(harness, derive_seed(harness.seed, {episode.id, to_string(kind), "oracle-phrase"}));
  switch (kind) {
    case HelpKind::Restrictive:
      if (gold.added.empty()) return std::nullopt;
      return restrictive_oracle(gold, harness.scheme, episode.grid_before.bounds(),
                                derive_seed(harness.seed, {episode.id, "oracle-region"}), phrasing);
    case HelpKind::Length:
      return length_oracle(gold, phrasing);
    case HelpKind::Corrective:
      if (!prior) throw Error(ErrorCode::MissingPrediction, "corrective help needs a prediction");
      if (gold.added.empty() || prior->added.empty()) return std::nullopt;
      return corrective_oracle(*prior, gold, phrasing);
    case HelpKind::Mistake:
      if (!prior) throw Error(ErrorCode::MissingPrediction, "mistake help needs a prediction");
      return mistake_oracle(*prior, gold, phrasing);
  }
  return std::nullopt;
}

namespace {

bool needs_prior(HelpKind kind) { return kind == HelpKind::Corrective || kind == HelpKind::Mistake; }

EpisodeOutcome finish(const Episode& episode, GridDiff pred, std::optional<GridDiff> prior,
                      std::optional<HelpMessage> help, const HarnessOptions& harness) {
  EpisodeOutcome out;
  out.episode_id = episode.id;
  std::optional<bool> followed;
  if (help) {
    followed = help_followed(pred, prior, *help, episode.gold, harness.scheme, episode.grid_before.bounds(),
                             harness.follow);
  }
  out.score = score_episode(pred, episode.gold, episode.grid_before.bounds(), followed);
  out.prediction = std::move(pred);
  out.prior = std::move(prior);
  out.help = std::move(help);
  return out;
}

}  // namespace

EpisodeOutcome run_episode(const Builder& builder, const Episode& episode, const Regime& regime,
                           const HarnessOptions& harness) {
  if (const auto* oh = std::get_if<OracleHelp>(&regime)) {
    std::optional<GridDiff> prior;
    if (needs_prior(oh->kind)) prior = predict_with(builder, episode, std::nullopt, harness);
    auto help = oracle_help(oh->kind, episode, prior, harness);
    if (!help) {
      auto pred = prior ? *prior : predict_with(builder, episode, std::nullopt, harness);
      return finish(episode, std::move(pred), std::nullopt, std::nullopt, harness);
    }
    auto pred = predict_with(builder, episode, help, harness);
    return finish(episode, std::move(pred), std::move(prior), std::move(help), harness);
  }
  if (const auto* sh = std::get_if<SelfHelp>(&regime)) {
    std::optional<GridDiff> prior;
    if (needs_prior(sh->kind)) prior = predict_with(builder, episode, std::nullopt, harness);
    SelfHelpPredictor predictor{sh->kind, sh->accuracy,
                                derive_seed(harness.seed, {"predictor", to_string(sh->kind)})};
    auto help = predict_self_help(predictor, episode, prior, harness.scheme,
                                  phrasing_for(harness, derive_seed(harness.seed, {"self-phrase"})));
    auto pred = predict_with(builder, episode, help, harness);
    return finish(episode, std::move(pred), std::move(prior), std::move(help), harness);
  }
  if (const auto* cl = std::get_if<Clarify>(&regime)) {
    auto trace = run_confusion_loop(builder, make_predictors(cl->config), episode, cl->config, harness);
    if (trace.awaiting_answer()) {
      auto answer = oracle_help(*trace.chosen, episode, trace.o0, harness);
      if (answer) {
        answer_clarification(trace, *answer, builder, episode, harness);
      } else {
        trace.o_final = trace.o0;
      }
    }
    auto out = finish(episode, *trace.o_final, trace.answer ? std::optional<GridDiff>(trace.o0) : std::nullopt,
                      trace.answer, harness);
    out.trace = std::move(trace);
    return out;
  }
  return finish(episode, predict_with(builder, episode, std::nullopt, harness), std::nullopt, std::nullopt,
                harness);
}

nlohmann::json outcome_to_json(const EpisodeOutcome& o) {
  nlohmann::json j;
  j["episode_id"] = o.episode_id;
  j["reward"] = o.score.reward;
  j["distance"] = o.score.distance;
  j["blocks_placed"] = o.score.blocks_placed;
  j["help_followed"] = o.score.help_followed ? nlohmann::json(*o.score.help_followed) : nlohmann::json(nullptr);
  j["prediction"] = diff_to_json(o.prediction);
  j["prior"] = optional_diff(o.prior);
  j["help"] = o.help ? help_to_json(*o.help) : nlohmann::json(nullptr);
  if (o.trace) j["trace"] = trace_to_json(*o.trace);
  return j;
}

}  // namespace iglu
