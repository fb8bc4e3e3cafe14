#include "iglu/eval.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <thread>

#include <fmt/format.h>

#include "iglu/error.hpp"
#include "iglu/report.hpp"

namespace iglu {

namespace fs = std::filesystem;

void RunSpec::validate() const {
  if (workers < 1) throw Error(ErrorCode::InvalidArgument, "workers must be at least 1");
  if (!corpus_path && synthetic_n == 0) throw Error(ErrorCode::InvalidArgument, "synthetic_n must be at least 1");
  if (!corpus_path && shapes.empty()) throw Error(ErrorCode::InvalidArgument, "shape catalog is empty");
  agent.validate();
  if (const auto* sh = std::get_if<SelfHelp>(&regime)) {
    if (!(sh->accuracy >= 0.0 && sh->accuracy <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "self-help accuracy must lie in [0,1]");
    }
  }
  if (const auto* cl = std::get_if<Clarify>(&regime)) cl->config.validate();
}

nlohmann::json regime_to_json(const Regime& regime) {
  return std::visit(
      [](const auto& r) -> nlohmann::json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, NoHelp>) return {{"type", "no_help"}};
        if constexpr (std::is_same_v<T, OracleHelp>) return {{"type", "oracle_help"}, {"kind", to_string(r.kind)}};
        if constexpr (std::is_same_v<T, SelfHelp>) {
          return {{"type", "self_help"}, {"kind", to_string(r.kind)}, {"accuracy", r.accuracy}};
        }
        if constexpr (std::is_same_v<T, Clarify>) {
          return {{"type", "clarify"}, {"loop", loop_config_to_json(r.config)}, {"answers", "oracle"}};
        }
      },
      regime);
}

Regime regime_from_json(const nlohmann::json& j) {
  if (j.is_string()) return regime_from_json(nlohmann::json{{"type", j}});
  if (!j.is_object() || !j.contains("type")) throw Error(ErrorCode::SchemaError, "regime needs a 'type'");
  auto type = j.at("type").get<std::string>();
  auto kind = [&] {
    if (!j.contains("kind")) throw Error(ErrorCode::SchemaError, "regime '" + type + "' needs a 'kind'");
    return help_kind_from_string(j.at("kind").get<std::string>());
  };
  if (type == "no_help") return NoHelp{};
  if (type == "oracle_help") return OracleHelp{kind()};
  if (type == "self_help") {
    auto k = kind();
    double acc = j.contains("accuracy") ? j.at("accuracy").get<double>() : default_predictor_accuracies().at(k);
    return SelfHelp{k, acc};
  }
  if (type == "clarify") {
    Clarify c;
    if (j.contains("loop")) c.config = loop_config_from_json(j.at("loop"));
    if (j.contains("answers") && j.at("answers").get<std::string>() != "oracle") {
      throw Error(ErrorCode::SchemaError, "only oracle answers are supported in batch runs");
    }
    return c;
  }
  throw Error(ErrorCode::SchemaError, "unknown regime type: " + type);
}

RunSpec run_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "run spec must be an object");
  RunSpec s;
  try {
    if (j.contains("corpus") && !j.at("corpus").is_null()) s.corpus_path = j.at("corpus").get<std::string>();
    if (j.contains("split") && !j.at("split").is_null()) s.split = split_from_string(j.at("split").get<std::string>());
    if (j.contains("synthetic")) {
      const auto& syn = j.at("synthetic");
      if (syn.contains("seed")) s.synthetic_seed = syn.at("seed").get<std::uint64_t>();
      if (syn.contains("n")) s.synthetic_n = syn.at("n").get<std::size_t>();
      if (syn.contains("shapes")) {
        s.shapes.clear();
        for (const auto& sh : syn.at("shapes")) s.shapes.push_back(shape_from_string(sh.get<std::string>()));
      }
    }
    if (j.contains("agent")) s.agent = agent_profile_from_json(j.at("agent"));
    if (j.contains("agent_command") && !j.at("agent_command").is_null()) {
      s.agent_command = j.at("agent_command").get<std::string>();
    }
    if (j.contains("regime")) s.regime = regime_from_json(j.at("regime"));
    if (j.contains("scheme")) s.scheme = scheme_from_name(j.at("scheme").get<std::string>());
    if (j.contains("bank")) s.bank = bank_from_string(j.at("bank").get<std::string>());
    if (j.contains("templates") && !j.at("templates").is_null()) s.templates_path = j.at("templates").get<std::string>();
    if (j.contains("parse_mode")) {
      auto m = j.at("parse_mode").get<std::string>();
      if (m == "strict") {
        s.parse_mode = ParseMode::Strict;
      } else if (m == "lenient") {
        s.parse_mode = ParseMode::Lenient;
      } else {
        throw Error(ErrorCode::SchemaError, "parse_mode must be strict or lenient");
      }
    }
    if (j.contains("mistake_rule")) {
      auto m = j.at("mistake_rule").get<std::string>();
      if (m == "improvement") {
        s.follow.mistake_rule = MistakeFollowRule::Improvement;
      } else if (m == "exact_count") {
        s.follow.mistake_rule = MistakeFollowRule::ExactCount;
      } else {
        throw Error(ErrorCode::SchemaError, "mistake_rule must be improvement or exact_count");
      }
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workers")) s.workers = j.at("workers").get<int>();
    if (j.contains("output_dir") && !j.at("output_dir").is_null()) s.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("label")) s.label = j.at("label").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("run spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json run_spec_to_json(const RunSpec& s) {
  nlohmann::json j;
  j["corpus"] = s.corpus_path ? nlohmann::json(*s.corpus_path) : nlohmann::json(nullptr);
  j["split"] = s.split ? nlohmann::json(std::string(to_string(*s.split))) : nlohmann::json(nullptr);
  nlohmann::json shapes = nlohmann::json::array();
  for (auto sh : s.shapes) shapes.push_back(to_string(sh));
  j["synthetic"] = {{"seed", s.synthetic_seed}, {"n", s.synthetic_n}, {"shapes", shapes}};
  j["agent"] = agent_profile_to_json(s.agent);
  j["agent_command"] = s.agent_command ? nlohmann::json(*s.agent_command) : nlohmann::json(nullptr);
  j["regime"] = regime_to_json(s.regime);
  j["scheme"] = scheme_name(s.scheme.kind);
  j["bank"] = to_string(s.bank);
  j["templates"] = s.templates_path ? nlohmann::json(*s.templates_path) : nlohmann::json(nullptr);
  j["parse_mode"] = s.parse_mode == ParseMode::Strict ? "strict" : "lenient";
  j["mistake_rule"] = s.follow.mistake_rule == MistakeFollowRule::Improvement ? "improvement" : "exact_count";
  j["seed"] = s.seed;
  j["workers"] = s.workers;
  j["output_dir"] = s.output_dir ? nlohmann::json(*s.output_dir) : nlohmann::json(nullptr);
  j["label"] = s.label;
  return j;
}

std::vector<Episode> load_episodes(const RunSpec& spec) {
  if (spec.corpus_path) {
    auto all = read_episodes_jsonl(*spec.corpus_path);
    return spec.split ? filter_split(all, *spec.split) : all;
  }
  auto episodes = generate_synthetic(spec.synthetic_seed, spec.synthetic_n, spec.shapes);
  if (!spec.split) return episodes;
  return filter_split(split(std::move(episodes), SplitFractions{}, spec.synthetic_seed), *spec.split);
}

namespace {

// Owns what a HarnessOptions points into.
struct RunContext {
  std::unique_ptr<Builder> builder;
  std::optional<TemplateBank> templates;
  HarnessOptions harness;

  explicit RunContext(const RunSpec& spec) {
    if (spec.agent_command) {
      builder = std::make_unique<ProcessBuilder>(*spec.agent_command);
    } else {
      auto profile = spec.agent;
      profile.scheme = spec.scheme;
      builder = make_builder(profile);
    }
    if (spec.templates_path) templates = TemplateBank::load(*spec.templates_path);
    harness.scheme = spec.scheme;
    harness.bank = spec.bank;
    harness.templates = templates ? &*templates : nullptr;
    harness.seed = spec.seed;
    harness.parse_mode = spec.parse_mode;
    harness.follow = spec.follow;
  }
};

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string default_label(const RunSpec& spec) {
  if (!spec.label.empty()) return spec.label;
  std::string agent = spec.agent_command ? "process" : std::string(to_string(spec.agent.kind));
  return agent + " " + regime_label(spec.regime);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  out << text;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

}  // namespace

EvalResult run_eval(const RunSpec& spec) { return run_eval(spec, load_episodes(spec)); }

EvalResult run_eval(const RunSpec& spec, const std::vector<Episode>& episodes) {
  spec.validate();
  if (episodes.empty()) throw Error(ErrorCode::EmptyInput, "no episodes to evaluate");
  RunContext ctx(spec);
  EvalResult result;
  result.outcomes.resize(episodes.size());
  parallel_for(episodes.size(), spec.workers, [&](std::size_t i) {
    result.outcomes[i] = run_episode(*ctx.builder, episodes[i], spec.regime, ctx.harness);
  });
  std::vector<EpisodeScore> scores;
  scores.reserve(result.outcomes.size());
  for (const auto& o : result.outcomes) scores.push_back(o.score);
  result.row = aggregate(scores, default_label(spec));

  if (spec.output_dir) {
    auto dir = prepare_dir(*spec.output_dir);
    write_text(dir / "report.csv", report_csv({result.row}));
    write_text(dir / "report.txt", report_table({result.row}));
    std::string lines;
    for (const auto& o : result.outcomes) lines += outcome_to_json(o).dump() + "\n";
    write_text(dir / "traces.jsonl", lines);
  }
  return result;
}

std::vector<ReportRow> run_ablation_regions(const RunSpec& spec, const std::vector<RegionScheme>& schemes) {
  if (!std::holds_alternative<OracleHelp>(spec.regime) && !std::holds_alternative<SelfHelp>(spec.regime)) {
    throw Error(ErrorCode::InvalidArgument, "region ablation needs a restrictive help regime");
  }
  HelpKind kind = std::holds_alternative<OracleHelp>(spec.regime) ? std::get<OracleHelp>(spec.regime).kind
                                                                  : std::get<SelfHelp>(spec.regime).kind;
  if (kind != HelpKind::Restrictive) {
    throw Error(ErrorCode::InvalidArgument, "region ablation needs a restrictive help regime");
  }
  auto episodes = load_episodes(spec);
  std::vector<ReportRow> rows;
  for (const auto& scheme : schemes) {
    RunSpec s = spec;
    s.scheme = scheme;
    s.output_dir.reset();
    s.label = fmt::format("{} regions", scheme.region_count());
    rows.push_back(run_eval(s, episodes).row);
  }
  if (spec.output_dir) {
    auto dir = prepare_dir(*spec.output_dir);
    write_text(dir / "ablation.csv", report_csv(rows));
    write_text(dir / "ablation.txt", report_table(rows));
  }
  return rows;
}

std::vector<double> default_threshold_sweep() {
  return {-1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, std::numeric_limits<double>::infinity()};
}

std::string calibration_csv(const Calibration& c) {
  std::string out = "threshold,question_rate,reward_mean\n";
  for (const auto& p : c.curve) {
    out += fmt::format("{},{:.6f},{:.6f}\n", std::isinf(p.threshold) ? std::string("inf") : fmt::format("{}", p.threshold),
                       p.question_rate, p.reward_mean);
  }
  return out;
}

Calibration calibrate_threshold(const RunSpec& spec, const std::vector<double>& sweep, double max_question_rate) {
  const auto* clarify = std::get_if<Clarify>(&spec.regime);
  if (!clarify) throw Error(ErrorCode::InvalidArgument, "threshold calibration needs the clarify regime");
  if (sweep.empty()) throw Error(ErrorCode::InvalidArgument, "empty threshold sweep");
  spec.validate();
  auto episodes = load_episodes(spec);
  if (episodes.empty()) throw Error(ErrorCode::EmptyInput, "no episodes to calibrate on");

  // The chosen help and the answered prediction do not depend on the
  // threshold, so one always-ask run gives every point of the curve.
  RunSpec always = spec;
  Clarify ask = *clarify;
  ask.config.threshold = -std::numeric_limits<double>::infinity();
  always.regime = ask;
  always.output_dir.reset();
  RunContext ctx(always);

  struct Row {
    double max_delta;
    double reward_asked;
    double reward_baseline;
  };
  std::vector<Row> rows(episodes.size());
  parallel_for(episodes.size(), spec.workers, [&](std::size_t i) {
    auto out = run_episode(*ctx.builder, episodes[i], always.regime, ctx.harness);
    const auto& trace = *out.trace;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : trace.probes) best = std::max(best, p.delta);
    auto base = score_episode(trace.o0, episodes[i].gold, episodes[i].grid_before.bounds());
    rows[i] = Row{best, out.score.reward, base.reward};
  });

  Calibration cal;
  cal.max_question_rate = max_question_rate;
  std::optional<double> chosen;
  auto sorted = sweep;
  std::sort(sorted.begin(), sorted.end());
  for (double t : sorted) {
    std::size_t asked = 0;
    double reward = 0.0;
    for (const auto& r : rows) {
      bool q = r.max_delta > t;
      asked += q ? 1 : 0;
      reward += q ? r.reward_asked : r.reward_baseline;
    }
    double n = static_cast<double>(rows.size());
    CalibrationPoint p{t, static_cast<double>(asked) / n, reward / n};
    cal.curve.push_back(p);
    if (!chosen && p.question_rate <= max_question_rate) chosen = t;
  }
  cal.chosen = chosen ? *chosen : sorted.back();

  if (spec.output_dir) {
    auto dir = prepare_dir(*spec.output_dir);
    write_text(dir / "calibration.csv", calibration_csv(cal));
    nlohmann::json j;
    j["threshold"] = std::isinf(cal.chosen) ? nlohmann::json("inf") : nlohmann::json(cal.chosen);
    j["max_question_rate"] = max_question_rate;
    j["episodes"] = rows.size();
    write_text(dir / "calibration.json", j.dump(2) + "\n");
  }
  return cal;
}

}  // namespace iglu
