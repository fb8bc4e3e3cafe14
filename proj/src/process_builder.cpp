#include <csignal>
#include <cerrno>
#include <cstring>

#include <sys/wait.h>
#include <unistd.h>

#include "iglu/agents.hpp"
#include "iglu/codec.hpp"
#include "iglu/error.hpp"

namespace iglu {

ProcessBuilder::ProcessBuilder(std::string command) : command_(std::move(command)) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw Error(ErrorCode::ProcessError, std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw Error(ErrorCode::ProcessError, std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) throw Error(ErrorCode::ProcessError, std::strerror(errno));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  std::signal(SIGPIPE, SIG_IGN);
}

ProcessBuilder::~ProcessBuilder() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

std::string ProcessBuilder::predict(const Episode&, const BuilderInput& input) const {
  std::lock_guard lock(mutex_);
  nlohmann::json request = {{"dialogue", input.dialogue},
                            {"grid", input.grid_text},
                            {"help", input.help ? nlohmann::json(*input.help) : nlohmann::json(nullptr)},
                            {"input", input.composite()}};
  std::string line = request.dump() + "\n";
  const char* data = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const auto n = write(to_child_, data, left);
    if (n <= 0) throw Error(ErrorCode::ProcessError, "builder process closed its input");
    data += n;
    left -= static_cast<std::size_t>(n);
  }
  for (;;) {
    if (auto nl = pending_.find('\n'); nl != std::string::npos) {
      const auto reply = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      try {
        return nlohmann::json::parse(reply).at("utterance").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProcessError, std::string("bad builder reply: ") + e.what());
      }
    }
    char buf[4096];
    const auto n = read(from_child_, buf, sizeof buf);
    if (n <= 0) throw Error(ErrorCode::ProcessError, "builder process exited");
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

}  // namespace iglu
