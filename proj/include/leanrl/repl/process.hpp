#pragma once

#include <sys/types.h>

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/common/error.hpp"

namespace leanrl::repl {

LEANRL_DEFINE_ERROR(SpawnFailure);

// How to start one REPL worker. "{worker_id}" in any argv element is replaced
// by the worker's id, which lets a mock backend write per-worker transcripts.
struct LaunchSpec {
  std::vector<std::string> argv;
  std::string cwd;
  std::map<std::string, std::string> env;  // added to (or overriding) the parent environment
  bool inherit_env = true;
  bool discard_stderr = true;

  // Accepts {"command": [..] | "string", "cwd": "", "env": {..}}.
  static LaunchSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

enum class ReadStatus { ok, timeout, closed };

struct ReadResult {
  ReadStatus status = ReadStatus::closed;
  std::string frame;
};

// One child process with its stdin/stdout connected through pipes. Not
// thread-safe; the pool guarantees a single user at a time.
class ReplProcess {
 public:
  ReplProcess(const LaunchSpec& spec, int worker_id);
  ~ReplProcess();

  ReplProcess(const ReplProcess&) = delete;
  ReplProcess& operator=(const ReplProcess&) = delete;

  pid_t pid() const { return pid_; }

  // False if the pipe is closed (child gone).
  bool write_all(std::string_view data);

  // Reads one blank-line-terminated frame, waiting at most until deadline.
  ReadResult read_frame(std::chrono::steady_clock::time_point deadline);

  // SIGKILL and reap. Idempotent.
  void kill();
  bool running();

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1;   // our write end -> child's stdin
  int out_fd_ = -1;  // child's stdout -> our read end
  std::string buffer_;
  bool reaped_ = false;
};

}  // namespace leanrl::repl
