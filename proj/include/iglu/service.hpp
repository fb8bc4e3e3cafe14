#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iglu/agents.hpp"
#include "iglu/corpus.hpp"
#include "iglu/error.hpp"
#include "iglu/loop.hpp"

namespace iglu {

enum class Phase { AwaitingStep, AwaitingHelp, AwaitingClarificationAnswer, Done, Expired };

std::string_view to_string(Phase phase);

struct ServiceConfig {
  std::vector<Episode> corpus;
  AgentProfile agent;                ///< default when a request names none
  std::optional<LoopConfig> loop;    ///< nullopt disables clarification questions
  RegionScheme scheme;
  Bank bank = Bank::Test;
  std::optional<TemplateBank> templates;
  std::uint64_t seed = 0;
  std::chrono::seconds idle_timeout{1800};
  std::optional<std::string> trace_log;  ///< finished sessions are appended here as JSON lines
};

/// Turn-based interactive episodes. Every public call returns the JSON body of
/// the corresponding HTTP response and throws iglu::Error on failure.
class SessionManager {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit SessionManager(ServiceConfig config, Clock clock = {});
  ~SessionManager();

  /// Body: {"episode_id": ...} | {"synthetic_seed": s, "synthetic_index": i} |
  /// {"episode": {...}}, plus optional "agent", "loop" (object, or false to
  /// disable) and "scheme".
  nlohmann::json create(const nlohmann::json& request);
  nlohmann::json get(const std::string& id);
  nlohmann::json step(const std::string& id);
  /// Body: {"text": ...} or {"skip": true}.
  nlohmann::json help(const std::string& id, const nlohmann::json& request);
  /// Body: {"text": ...}.
  nlohmann::json answer(const std::string& id, const nlohmann::json& request);
  nlohmann::json trace(const std::string& id);

  /// Marks sessions idle longer than the timeout as expired.
  void expire_idle();
  std::size_t session_count() const;

  struct Session;

 private:
  std::shared_ptr<Session> find(const std::string& id);
  template <typename Fn>
  nlohmann::json with_session(const std::string& id, Fn&& fn);
  HarnessOptions harness_for(const Session& s) const;
  void finish(Session& s);

  ServiceConfig config_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_id_ = 1;
  std::mutex log_mutex_;
};

/// HTTP status for an error code.
int http_status(ErrorCode code);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> static_dir;
  std::string cors_origin = "*";
};

/// JSON-over-HTTP front end for a SessionManager.
class HttpServer {
 public:
  HttpServer(SessionManager& manager, ServerOptions options);
  ~HttpServer();

  /// Blocks until stop(). Returns false if the address could not be bound.
  bool listen();
  /// Binds to a free port on the host and returns it (for tests); then call listen_after_bind().
  int bind_any_port();
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace iglu
