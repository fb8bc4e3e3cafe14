#include "iglu/service.hpp"

#include <fstream>

#include <httplib.h>

#include "iglu/codec.hpp"
#include "iglu/error.hpp"
#include "iglu/json_io.hpp"
#include "iglu/metrics.hpp"

namespace iglu {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::AwaitingStep: return "awaiting_step";
    case Phase::AwaitingHelp: return "awaiting_help";
    case Phase::AwaitingClarificationAnswer: return "awaiting_clarification_answer";
    case Phase::Done: return "done";
    case Phase::Expired: return "expired";
  }
  return "done";
}

struct SessionManager::Session {
  std::string id;
  Episode episode;
  AgentProfile agent;
  std::unique_ptr<Builder> builder;
  std::optional<LoopConfig> loop;
  RegionScheme scheme;
  Phase phase = Phase::AwaitingStep;

  std::optional<std::string> o0_utterance;
  GridDiff o0;
  std::optional<LoopTrace> trace;
  std::optional<HelpMessage> help;
  bool skipped = false;
  std::optional<std::string> final_utterance;
  std::optional<GridDiff> final_prediction;
  std::optional<EpisodeScore> score;

  std::chrono::steady_clock::time_point last_active;
  std::mutex busy;
};

namespace {

nlohmann::json prediction_json(const std::optional<std::string>& utterance, const GridDiff& blocks) {
  if (!utterance) return nullptr;
  return {{"utterance", *utterance}, {"blocks", diff_to_json(blocks)}};
}

nlohmann::json score_json(const std::optional<EpisodeScore>& s) {
  if (!s) return nullptr;
  return {{"reward", s->reward},
          {"distance", s->distance},
          {"blocks_placed", s->blocks_placed},
          {"help_followed", s->help_followed ? nlohmann::json(*s->help_followed) : nlohmann::json(nullptr)}};
}

std::string text_field(const nlohmann::json& request) {
  if (!request.is_object() || !request.contains("text") || !request.at("text").is_string()) {
    throw Error(ErrorCode::InvalidArgument, "body needs a string field 'text'");
  }
  return request.at("text").get<std::string>();
}

}  // namespace

SessionManager::SessionManager(ServiceConfig config, Clock clock)
    : config_(std::move(config)), clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })) {
  if (config_.loop) config_.loop->validate();
  config_.agent.validate();
}

SessionManager::~SessionManager() = default;

std::size_t SessionManager::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

HarnessOptions SessionManager::harness_for(const Session& s) const {
  HarnessOptions h;
  h.scheme = s.scheme;
  h.bank = config_.bank;
  h.templates = config_.templates ? &*config_.templates : nullptr;
  h.seed = config_.seed;
  h.parse_mode = ParseMode::Lenient;
  return h;
}

static nlohmann::json state_json(const SessionManager::Session& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["phase"] = to_string(s.phase);
  j["scheme"] = scheme_name(s.scheme.kind);
  j["regions"] = s.scheme.names();
  j["episode"] = {{"id", s.episode.id},
                  {"dialogue", s.episode.dialogue},
                  {"grid_before", grid_to_json(s.episode.grid_before)},
                  {"bounds", bounds_to_json(s.episode.grid_before.bounds())}};
  j["agent"] = agent_profile_to_json(s.agent);
  j["loop_enabled"] = s.loop.has_value();
  j["prediction"] = prediction_json(s.o0_utterance, s.o0);
  bool asked = s.trace && s.trace->question;
  j["question"] = asked ? nlohmann::json(*s.trace->question) : nlohmann::json(nullptr);
  j["question_kind"] = asked ? nlohmann::json(std::string(to_string(*s.trace->chosen))) : nlohmann::json(nullptr);
  j["help"] = s.help ? help_to_json(*s.help) : nlohmann::json(nullptr);
  j["skipped"] = s.skipped;
  j["answer"] = s.trace && s.trace->answer ? help_to_json(*s.trace->answer) : nlohmann::json(nullptr);
  j["final"] = s.final_prediction ? prediction_json(s.final_utterance, *s.final_prediction) : nlohmann::json(nullptr);
  j["score"] = score_json(s.score);
  return j;
}

static nlohmann::json trace_json(const SessionManager::Session& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["episode_id"] = s.episode.id;
  j["phase"] = to_string(s.phase);
  j["o0"] = s.o0_utterance ? diff_to_json(s.o0) : nlohmann::json(nullptr);
  j["loop"] = s.trace ? trace_to_json(*s.trace) : nlohmann::json(nullptr);
  j["help"] = s.help ? help_to_json(*s.help) : nlohmann::json(nullptr);
  j["final"] = s.final_prediction ? diff_to_json(*s.final_prediction) : nlohmann::json(nullptr);
  j["score"] = score_json(s.score);
  return j;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session " + id);
  return it->second;
}

template <typename Fn>
nlohmann::json SessionManager::with_session(const std::string& id, Fn&& fn) {
  auto s = find(id);
  std::unique_lock lock(s->busy, std::try_to_lock);
  if (!lock.owns_lock()) throw Error(ErrorCode::Busy, "session " + id + " is handling another request");
  auto now = clock_();
  if (s->phase != Phase::Done && s->phase != Phase::Expired && now - s->last_active > config_.idle_timeout) {
    s->phase = Phase::Expired;
  }
  auto out = fn(*s);
  s->last_active = now;
  return out;
}

void SessionManager::expire_idle() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, s] : sessions_) all.push_back(s);
  }
  auto now = clock_();
  for (auto& s : all) {
    std::unique_lock lock(s->busy, std::try_to_lock);
    if (!lock.owns_lock()) continue;
    if (s->phase != Phase::Done && s->phase != Phase::Expired && now - s->last_active > config_.idle_timeout) {
      s->phase = Phase::Expired;
    }
  }
}

nlohmann::json SessionManager::create(const nlohmann::json& request) {
  if (!request.is_object()) throw Error(ErrorCode::InvalidArgument, "body must be a JSON object");
  expire_idle();
  auto s = std::make_shared<Session>();
  try {
    if (request.contains("episode_id")) {
      auto want = request.at("episode_id").get<std::string>();
      auto it = std::find_if(config_.corpus.begin(), config_.corpus.end(),
                             [&](const Episode& e) { return e.id == want; });
      if (it == config_.corpus.end()) throw Error(ErrorCode::UnknownEpisode, "no episode " + want);
      s->episode = *it;
    } else if (request.contains("synthetic_seed")) {
      auto seed = request.at("synthetic_seed").get<std::uint64_t>();
      auto index = request.value("synthetic_index", std::size_t{0});
      if (index >= 100000) throw Error(ErrorCode::UnknownEpisode, "synthetic_index too large");
      s->episode = generate_synthetic(seed, index + 1)[index];
    } else if (request.contains("episode")) {
      s->episode = episode_from_json(request.at("episode"));
    } else {
      throw Error(ErrorCode::InvalidArgument, "body needs episode_id, synthetic_seed or episode");
    }
    s->scheme = request.contains("scheme") ? scheme_from_name(request.at("scheme").get<std::string>()) : config_.scheme;
    s->agent = request.contains("agent") ? agent_profile_from_json(request.at("agent")) : config_.agent;
    s->agent.scheme = s->scheme;
    s->loop = config_.loop;
    if (request.contains("loop")) {
      const auto& l = request.at("loop");
      if (l.is_boolean()) {
        if (!l.get<bool>()) {
          s->loop.reset();
        } else if (!s->loop) {
          s->loop = LoopConfig{};
        }
      } else {
        s->loop = loop_config_from_json(l);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, e.what());
  }
  s->builder = make_builder(s->agent);
  s->last_active = clock_();
  {
    std::lock_guard lock(mutex_);
    s->id = "s" + std::to_string(next_id_++);
    sessions_[s->id] = s;
  }
  std::lock_guard busy(s->busy);
  return state_json(*s);
}

nlohmann::json SessionManager::get(const std::string& id) {
  return with_session(id, [](Session& s) { return state_json(s); });
}

nlohmann::json SessionManager::trace(const std::string& id) {
  return with_session(id, [](Session& s) { return trace_json(s); });
}

namespace {

void require_phase(const SessionManager::Session& s, Phase want) {
  if (s.phase == Phase::Expired) throw Error(ErrorCode::Expired, "session " + s.id + " expired");
  if (s.phase != want) {
    throw Error(ErrorCode::WrongPhase, "session " + s.id + " is " + std::string(to_string(s.phase)) + ", not " +
                                           std::string(to_string(want)));
  }
}

}  // namespace

nlohmann::json SessionManager::step(const std::string& id) {
  return with_session(id, [&](Session& s) {
    require_phase(s, Phase::AwaitingStep);
    auto harness = harness_for(s);
    auto utterance = builder_predict(*s.builder, s.episode, std::nullopt);
    auto o0 = parse_prediction(utterance, s.episode.grid_before.bounds(), harness.parse_mode);
    std::optional<LoopTrace> trace;
    if (s.loop) trace = run_confusion_loop(*s.builder, make_predictors(*s.loop), s.episode, *s.loop, harness);
    s.o0_utterance = utterance;
    s.o0 = std::move(o0);
    s.trace = std::move(trace);
    s.phase = s.trace && s.trace->awaiting_answer() ? Phase::AwaitingClarificationAnswer : Phase::AwaitingHelp;
    return state_json(s);
  });
}

void SessionManager::finish(Session& s) {
  std::optional<bool> followed;
  const auto& bounds = s.episode.grid_before.bounds();
  std::optional<HelpMessage> given = s.help;
  if (!given && s.trace && s.trace->answer) given = s.trace->answer;
  if (given) {
    followed = help_followed(*s.final_prediction, s.o0, *given, s.episode.gold, s.scheme, bounds);
  }
  s.score = score_episode(*s.final_prediction, s.episode.gold, bounds, followed);
  s.phase = Phase::Done;
  if (config_.trace_log) {
    std::lock_guard lock(log_mutex_);
    std::ofstream out(*config_.trace_log, std::ios::app);
    if (out) out << trace_json(s).dump() << '\n';
  }
}

nlohmann::json SessionManager::help(const std::string& id, const nlohmann::json& request) {
  return with_session(id, [&](Session& s) {
    require_phase(s, Phase::AwaitingHelp);
    if (request.is_object() && request.value("skip", false)) {
      s.skipped = true;
      s.final_utterance = s.o0_utterance;
      s.final_prediction = s.o0;
      finish(s);
      return state_json(s);
    }
    auto normalized = normalize_help(text_field(request), s.scheme);
    if (const auto* un = std::get_if<Unrecognized>(&normalized)) throw Error(ErrorCode::Unrecognized, un->reason);
    auto msg = std::get<HelpMessage>(normalized);
    auto utterance = builder_predict(*s.builder, s.episode, msg);
    s.final_prediction = parse_prediction(utterance, s.episode.grid_before.bounds(), harness_for(s).parse_mode);
    s.final_utterance = utterance;
    s.help = std::move(msg);
    finish(s);
    return state_json(s);
  });
}

nlohmann::json SessionManager::answer(const std::string& id, const nlohmann::json& request) {
  return with_session(id, [&](Session& s) {
    require_phase(s, Phase::AwaitingClarificationAnswer);
    auto harness = harness_for(s);
    auto final_pred = answer_clarification(*s.trace, text_field(request), *s.builder, s.episode, harness);
    s.final_utterance = builder_predict(*s.builder, s.episode, s.trace->answer);
    s.final_prediction = std::move(final_pred);
    finish(s);
    return state_json(s);
  });
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownEpisode: return 404;
    case ErrorCode::WrongPhase:
    case ErrorCode::Busy: return 409;
    case ErrorCode::Expired: return 410;
    case ErrorCode::Unrecognized:
    case ErrorCode::KindMismatch: return 422;
    case ErrorCode::InvalidArgument:
    case ErrorCode::SchemaError: return 400;
    default: return 500;
  }
}

// HTTP ----------------------------------------------------------------------------

struct HttpServer::Impl {
  SessionManager& manager;
  ServerOptions options;
  httplib::Server server;

  Impl(SessionManager& m, ServerOptions o) : manager(m), options(std::move(o)) {}
};

namespace {

void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    reply_json(res, 200, fn());
  } catch (const Error& e) {
    reply_json(res, http_status(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}});
  } catch (const std::exception& e) {
    reply_json(res, 500, {{"error", "internal"}, {"message", e.what()}});
  }
}

nlohmann::json body_of(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid JSON body: ") + e.what());
  }
}

}  // namespace

HttpServer::HttpServer(SessionManager& manager, ServerOptions options)
    : impl_(std::make_unique<Impl>(manager, std::move(options))) {
  auto& svr = impl_->server;
  auto& mgr = impl_->manager;
  svr.set_default_headers({{"Access-Control-Allow-Origin", impl_->options.cors_origin},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  svr.Post("/sessions", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return mgr.create(body_of(req)); });
  });
  svr.Get(R"(/sessions/([^/]+))", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return mgr.get(req.matches[1]); });
  });
  svr.Get(R"(/sessions/([^/]+)/trace)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return mgr.trace(req.matches[1]); });
  });
  svr.Post(R"(/sessions/([^/]+)/step)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return mgr.step(req.matches[1]); });
  });
  svr.Post(R"(/sessions/([^/]+)/help)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return mgr.help(req.matches[1], body_of(req)); });
  });
  svr.Post(R"(/sessions/([^/]+)/answer)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return mgr.answer(req.matches[1], body_of(req)); });
  });
  if (impl_->options.static_dir) {
    if (!svr.set_mount_point("/", *impl_->options.static_dir)) {
      throw Error(ErrorCode::FileNotFound, "static directory not found: " + *impl_->options.static_dir);
    }
  }
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen() { return impl_->server.listen(impl_->options.host, impl_->options.port); }

int HttpServer::bind_any_port() { return impl_->server.bind_to_any_port(impl_->options.host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace iglu
