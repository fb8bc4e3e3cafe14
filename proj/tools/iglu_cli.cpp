#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "iglu/corpus.hpp"
#include "iglu/error.hpp"
#include "iglu/eval.hpp"
#include "iglu/report.hpp"
#include "iglu/service.hpp"

using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw iglu::Error(iglu::ErrorCode::FileNotFound, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw iglu::Error(iglu::ErrorCode::SchemaError, path + ": " + e.what());
  }
}

// Flags shared by eval, ablate-regions and calibrate-threshold. Unset flags
// leave the config file's value alone.
struct SpecFlags {
  std::string config;
  std::optional<std::string> corpus, split, agent_config, agent_kind, agent_command, regime, help_kind, loop_config,
      scheme, bank, templates, out, label, parse_mode, mistake_rule, threshold;
  std::optional<std::uint64_t> synthetic_seed, agent_seed, seed;
  std::optional<std::size_t> synthetic_n;
  std::optional<double> accuracy, p_off, p_drop, p_extra;
  std::optional<int> radius, workers;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON run spec; flags override its fields");
    app->add_option("--corpus", corpus, "episodes.jsonl (synthetic corpus when omitted)");
    app->add_option("--split", split, "train|valid|test filter for --corpus");
    app->add_option("--synthetic-seed", synthetic_seed);
    app->add_option("--synthetic-n", synthetic_n);
    app->add_option("--agent-config", agent_config, "JSON agent profile");
    app->add_option("--agent", agent_kind, "oracle|noisy|help_aware_noisy|scripted");
    app->add_option("--agent-command", agent_command, "external builder process (JSON lines on stdin/stdout)");
    app->add_option("--p-off", p_off);
    app->add_option("--p-drop", p_drop);
    app->add_option("--p-extra", p_extra);
    app->add_option("--radius", radius);
    app->add_option("--agent-seed", agent_seed);
    app->add_option("--regime", regime, "no_help|oracle_help|self_help|clarify");
    app->add_option("--help-kind", help_kind, "restrictive|length|corrective|mistake");
    app->add_option("--accuracy", accuracy, "self-help predictor accuracy");
    app->add_option("--loop-config", loop_config, "JSON loop config for the clarify regime");
    app->add_option("--threshold", threshold, "confusion threshold (number or inf)");
    app->add_option("--scheme", scheme, "quad4|center8|center12 (or 4|8|12)");
    app->add_option("--bank", bank, "template bank: train|test");
    app->add_option("--templates", templates, "JSON template bank");
    app->add_option("--parse-mode", parse_mode, "strict|lenient");
    app->add_option("--mistake-rule", mistake_rule, "improvement|exact_count");
    app->add_option("--seed", seed);
    app->add_option("--workers", workers);
    app->add_option("-o,--out", out, "output directory");
    app->add_option("--label", label);
  }

  json build() const {
    json j = config.empty() ? json::object() : read_json_file(config);
    auto set = [&](const char* key, const auto& v) {
      if (v) j[key] = *v;
    };
    set("corpus", corpus);
    set("split", split);
    set("agent_command", agent_command);
    set("scheme", scheme);
    set("bank", bank);
    set("templates", templates);
    set("parse_mode", parse_mode);
    set("mistake_rule", mistake_rule);
    set("seed", seed);
    set("workers", workers);
    set("output_dir", out);
    set("label", label);
    if (synthetic_seed) j["synthetic"]["seed"] = *synthetic_seed;
    if (synthetic_n) j["synthetic"]["n"] = *synthetic_n;

    if (agent_config) j["agent"] = read_json_file(*agent_config);
    if (!j.contains("agent")) j["agent"] = json::object();
    auto& a = j["agent"];
    if (agent_kind) a["kind"] = *agent_kind;
    if (p_off) a["p_off"] = *p_off;
    if (p_drop) a["p_drop"] = *p_drop;
    if (p_extra) a["p_extra"] = *p_extra;
    if (radius) a["radius"] = *radius;
    if (agent_seed) a["seed"] = *agent_seed;

    if (regime || help_kind || accuracy || loop_config || threshold) {
      json r = j.contains("regime") && j["regime"].is_object() ? j["regime"] : json::object();
      if (regime) r["type"] = *regime;
      if (help_kind) r["kind"] = *help_kind;
      if (accuracy) r["accuracy"] = *accuracy;
      if (loop_config) r["loop"] = read_json_file(*loop_config);
      if (threshold) {
        if (*threshold == "inf" || *threshold == "+inf") {
          r["loop"]["threshold"] = "inf";
        } else {
          r["loop"]["threshold"] = std::stod(*threshold);
        }
      }
      j["regime"] = r;
    }
    return j;
  }
};

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf" || item == "+inf") {
      out.push_back(std::numeric_limits<double>::infinity());
    } else {
      out.push_back(std::stod(item));
    }
  }
  return out;
}

iglu::SplitFractions parse_fractions(const std::string& s) {
  auto v = parse_number_list(s);
  if (v.size() != 3) throw iglu::Error(iglu::ErrorCode::BadFractions, "expected three comma-separated fractions");
  return {v[0], v[1], v[2]};
}

void write_corpus(const std::string& dir, const std::vector<iglu::Episode>& episodes, const iglu::CorpusManifest& m) {
  std::filesystem::create_directories(dir);
  iglu::write_episodes_jsonl(dir + "/episodes.jsonl", episodes);
  std::ofstream(dir + "/manifest.json") << m.to_json().dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded block-building evaluation harness"};
  app.require_subcommand(1);

  SpecFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate an agent under one regime");
  eval_flags.add_to(eval_cmd);

  SpecFlags ablate_flags;
  std::string schemes_arg = "4,8,12";
  auto* ablate_cmd = app.add_subcommand("ablate-regions", "Restrictive help across region schemes");
  ablate_flags.add_to(ablate_cmd);
  ablate_cmd->add_option("--schemes", schemes_arg, "comma-separated region counts");

  SpecFlags calib_flags;
  std::string sweep_arg;
  double max_rate = 0.5;
  auto* calib_cmd = app.add_subcommand("calibrate-threshold", "Question rate and reward across thresholds");
  calib_flags.add_to(calib_cmd);
  calib_cmd->add_option("--sweep", sweep_arg, "comma-separated thresholds (default -1,0,1,2,3,4,5,6,8,inf)");
  calib_cmd->add_option("--max-question-rate", max_rate);

  std::string import_format = "iglu-multiturn", import_input, import_out, import_split = "train", import_fractions;
  std::uint64_t import_seed = 0;
  auto* import_cmd = app.add_subcommand("import", "Convert a source dataset to episodes.jsonl");
  import_cmd->add_option("--source-format", import_format)->check(CLI::IsMember({"iglu-multiturn"}));
  import_cmd->add_option("-i,--input", import_input, "file or directory")->required();
  import_cmd->add_option("-o,--out", import_out, "output directory")->required();
  import_cmd->add_option("--default-split", import_split, "split for records without one");
  import_cmd->add_option("--resplit", import_fractions, "reassign splits with fractions train,valid,test");
  import_cmd->add_option("--seed", import_seed, "seed for --resplit");

  std::uint64_t gen_seed = 0;
  std::size_t gen_n = 500;
  std::string gen_shapes, gen_out, gen_fractions = "0.8,0.1,0.1";
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Generate a seeded synthetic corpus");
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("-n,--count", gen_n);
  gen_cmd->add_option("--shapes", gen_shapes, "comma-separated: single,row,tower,l_shape,square");
  gen_cmd->add_option("--fractions", gen_fractions, "train,valid,test");
  gen_cmd->add_option("-o,--out", gen_out, "output directory")->required();

  std::string host = std::getenv("IGLU_HOST") ? std::getenv("IGLU_HOST") : "127.0.0.1";
  int port = std::getenv("IGLU_PORT") ? std::atoi(std::getenv("IGLU_PORT")) : 8080;
  std::optional<std::string> serve_corpus, serve_agent, serve_loop, serve_static, serve_trace_log, serve_templates;
  std::optional<std::string> serve_threshold;
  std::string serve_scheme = "center8", serve_agent_kind = "help_aware_noisy", serve_bank = "test";
  bool serve_no_loop = false;
  int idle_timeout = 1800;
  std::uint64_t serve_seed = 0;
  auto* serve_cmd = app.add_subcommand("serve", "Run the interactive session API");
  serve_cmd->add_option("--host", host)->envname("IGLU_HOST");
  serve_cmd->add_option("--port", port)->envname("IGLU_PORT");
  serve_cmd->add_option("--corpus", serve_corpus, "episodes.jsonl addressable by episode_id");
  serve_cmd->add_option("--agent-config", serve_agent, "JSON agent profile");
  serve_cmd->add_option("--agent", serve_agent_kind, "agent kind when no profile is given");
  serve_cmd->add_option("--loop-config", serve_loop, "JSON loop config");
  serve_cmd->add_option("--threshold", serve_threshold, "confusion threshold (number or inf)");
  serve_cmd->add_flag("--no-loop", serve_no_loop, "never ask clarification questions");
  serve_cmd->add_option("--scheme", serve_scheme);
  serve_cmd->add_option("--bank", serve_bank);
  serve_cmd->add_option("--templates", serve_templates);
  serve_cmd->add_option("--seed", serve_seed);
  serve_cmd->add_option("--static-dir", serve_static, "serve files from this directory at /");
  serve_cmd->add_option("--idle-timeout", idle_timeout, "seconds before an idle session expires");
  serve_cmd->add_option("--trace-log", serve_trace_log, "append finished session traces here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval_cmd) {
      auto spec = iglu::run_spec_from_json(eval_flags.build());
      auto result = iglu::run_eval(spec);
      std::cout << iglu::report_table({result.row});
    } else if (*ablate_cmd) {
      auto j = ablate_flags.build();
      if (!j.contains("regime")) j["regime"] = {{"type", "oracle_help"}, {"kind", "restrictive"}};
      auto spec = iglu::run_spec_from_json(j);
      std::vector<iglu::RegionScheme> schemes;
      std::stringstream ss(schemes_arg);
      std::string item;
      while (std::getline(ss, item, ',')) schemes.push_back(iglu::scheme_from_name(item));
      std::cout << iglu::report_table(iglu::run_ablation_regions(spec, schemes));
    } else if (*calib_cmd) {
      auto j = calib_flags.build();
      if (!j.contains("regime")) j["regime"] = {{"type", "clarify"}};
      auto spec = iglu::run_spec_from_json(j);
      auto sweep = sweep_arg.empty() ? iglu::default_threshold_sweep() : parse_number_list(sweep_arg);
      auto cal = iglu::calibrate_threshold(spec, sweep, max_rate);
      std::cout << iglu::calibration_csv(cal);
      std::cout << "chosen threshold: " << (std::isinf(cal.chosen) ? std::string("inf") : fmt::format("{}", cal.chosen))
                << '\n';
    } else if (*import_cmd) {
      auto result = iglu::import_iglu(import_input, iglu::split_from_string(import_split));
      for (const auto& s : result.skipped) std::cerr << fmt::format("skipped record {}: {}\n", s.index, s.reason);
      auto episodes = result.episodes;
      if (!import_fractions.empty()) episodes = iglu::split(episodes, parse_fractions(import_fractions), import_seed);
      auto manifest = iglu::CorpusManifest::of(episodes, "imported");
      write_corpus(import_out, episodes, manifest);
      std::cout << manifest.to_json().dump(2) << '\n';
    } else if (*gen_cmd) {
      std::vector<iglu::ShapeKind> shapes = iglu::all_shapes();
      if (!gen_shapes.empty()) {
        shapes.clear();
        std::stringstream ss(gen_shapes);
        std::string item;
        while (std::getline(ss, item, ',')) shapes.push_back(iglu::shape_from_string(item));
      }
      auto episodes = iglu::split(iglu::generate_synthetic(gen_seed, gen_n, shapes), parse_fractions(gen_fractions),
                                  gen_seed);
      auto manifest = iglu::CorpusManifest::of(episodes, "synthetic", gen_seed);
      write_corpus(gen_out, episodes, manifest);
      std::cout << manifest.to_json().dump(2) << '\n';
    } else if (*serve_cmd) {
      iglu::ServiceConfig cfg;
      if (serve_corpus) cfg.corpus = iglu::read_episodes_jsonl(*serve_corpus);
      if (serve_agent) {
        cfg.agent = iglu::agent_profile_from_json(read_json_file(*serve_agent));
      } else {
        cfg.agent = iglu::agent_profile_from_json(
            {{"kind", serve_agent_kind}, {"p_off", 0.5}, {"p_drop", 0.2}, {"p_extra", 0.2}, {"radius", 2}});
      }
      cfg.scheme = iglu::scheme_from_name(serve_scheme);
      cfg.bank = iglu::bank_from_string(serve_bank);
      if (serve_templates) cfg.templates = iglu::TemplateBank::load(*serve_templates);
      cfg.seed = serve_seed;
      if (!serve_no_loop) {
        cfg.loop = serve_loop ? iglu::loop_config_from_json(read_json_file(*serve_loop)) : iglu::LoopConfig{};
        if (serve_threshold) {
          cfg.loop->threshold = (*serve_threshold == "inf") ? std::numeric_limits<double>::infinity()
                                                            : std::stod(*serve_threshold);
        }
      }
      cfg.idle_timeout = std::chrono::seconds(idle_timeout);
      cfg.trace_log = serve_trace_log;
      iglu::SessionManager manager(std::move(cfg));
      iglu::ServerOptions opts;
      opts.host = host;
      opts.port = port;
      opts.static_dir = serve_static;
      iglu::HttpServer server(manager, opts);
      std::cerr << fmt::format("listening on http://{}:{}\n", host, port);
      if (!server.listen()) {
        std::cerr << fmt::format("error: cannot bind {}:{}\n", host, port);
        return 1;
      }
    }
  } catch (const iglu::Error& e) {
    std::cerr << fmt::format("error: {}: {}\n", iglu::to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
