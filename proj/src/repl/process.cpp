#include "leanrl/repl/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>

extern char** environ;

namespace leanrl::repl {

using nlohmann::json;

LaunchSpec LaunchSpec::from_json(const json& j) {
  LaunchSpec spec;
  const auto& cmd = j.at("command");
  if (cmd.is_string()) {
    std::istringstream ss(cmd.get<std::string>());
    std::string word;
    while (ss >> word) spec.argv.push_back(word);
  } else {
    spec.argv = cmd.get<std::vector<std::string>>();
  }
  if (spec.argv.empty()) throw InvalidArgument("launch spec has an empty command");
  spec.cwd = j.value("cwd", std::string());
  if (j.contains("env")) spec.env = j["env"].get<std::map<std::string, std::string>>();
  spec.inherit_env = j.value("inherit_env", true);
  spec.discard_stderr = j.value("discard_stderr", true);
  return spec;
}

json LaunchSpec::to_json() const {
  return json{{"command", argv}, {"cwd", cwd}, {"env", env}, {"inherit_env", inherit_env},
              {"discard_stderr", discard_stderr}};
}

namespace {

std::string substitute(std::string s, int worker_id) {
  const std::string token = "{worker_id}";
  const std::string id = std::to_string(worker_id);
  for (auto pos = s.find(token); pos != std::string::npos; pos = s.find(token, pos + id.size())) {
    s.replace(pos, token.size(), id);
  }
  return s;
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

ReplProcess::ReplProcess(const LaunchSpec& spec, int worker_id) {
  if (spec.argv.empty()) throw SpawnFailure("worker " + std::to_string(worker_id) + ": empty argv");

  // Everything the child needs is materialized before fork(); between fork
  // and exec only async-signal-safe calls are made.
  std::vector<std::string> args;
  for (const auto& a : spec.argv) args.push_back(substitute(a, worker_id));
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  std::map<std::string, std::string> merged;
  if (spec.inherit_env) {
    for (char** e = environ; e && *e; ++e) {
      std::string_view kv(*e);
      auto eq = kv.find('=');
      if (eq != std::string_view::npos) merged[std::string(kv.substr(0, eq))] = kv.substr(eq + 1);
    }
  }
  for (const auto& [k, v] : spec.env) merged[k] = substitute(v, worker_id);
  std::vector<std::string> env_strings;
  for (const auto& [k, v] : merged) env_strings.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& e : env_strings) envp.push_back(e.data());
  envp.push_back(nullptr);

  int to_child[2], from_child[2], exec_err[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw SpawnFailure("pipe: " + std::string(std::strerror(errno)));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw SpawnFailure("pipe: " + std::string(std::strerror(errno)));
  }
  if (::pipe2(exec_err, O_CLOEXEC) != 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    throw SpawnFailure("pipe: " + std::string(std::strerror(errno)));
  }

  const char* cwd = spec.cwd.empty() ? nullptr : spec.cwd.c_str();
  const bool discard_stderr = spec.discard_stderr;

  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1], exec_err[0], exec_err[1]})
      ::close(fd);
    throw SpawnFailure("fork: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    sigset_t none;
    ::sigemptyset(&none);
    ::sigprocmask(SIG_SETMASK, &none, nullptr);
    ::signal(SIGPIPE, SIG_DFL);
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    if (discard_stderr) {
      int devnull = ::open("/dev/null", O_WRONLY);
      if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    }
    if (cwd && ::chdir(cwd) != 0) {
      int err = errno;
      [[maybe_unused]] auto n = ::write(exec_err[1], &err, sizeof err);
      ::_exit(127);
    }
    ::execvpe(argv[0], argv.data(), envp.data());
    int err = errno;
    [[maybe_unused]] auto n = ::write(exec_err[1], &err, sizeof err);
    ::_exit(127);
  }

  ::close(to_child[0]);
  ::close(from_child[1]);
  ::close(exec_err[1]);

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(exec_err[0], &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  ::close(exec_err[0]);
  if (n > 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::waitpid(pid, nullptr, 0);
    throw SpawnFailure("worker " + std::to_string(worker_id) + ": cannot start '" + args[0] +
                       "': " + std::strerror(child_errno));
  }

  pid_ = pid;
  in_fd_ = to_child[1];
  out_fd_ = from_child[0];
}

ReplProcess::~ReplProcess() { kill(); }

bool ReplProcess::write_all(std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(in_fd_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

ReadResult ReplProcess::read_frame(std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    // A frame ends at the first blank line that follows some content.
    std::size_t start = buffer_.find_first_not_of("\r\n");
    if (start != std::string::npos) {
      auto end = buffer_.find("\n\n", start);
      auto end_crlf = buffer_.find("\n\r\n", start);
      std::size_t cut = std::string::npos, skip = 0;
      if (end != std::string::npos) cut = end, skip = 2;
      if (end_crlf != std::string::npos && end_crlf < cut) cut = end_crlf, skip = 3;
      if (cut != std::string::npos) {
        ReadResult r{ReadStatus::ok, buffer_.substr(start, cut - start)};
        buffer_.erase(0, cut + skip);
        return r;
      }
    }

    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return {ReadStatus::timeout, {}};
    const auto wait_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    pollfd pfd{out_fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(wait_ms, 1 << 30)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      return {ReadStatus::closed, {}};
    }
    if (rc == 0) continue;

    char chunk[65536];
    ssize_t n = ::read(out_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return {ReadStatus::closed, {}};
    }
    if (n == 0) return {ReadStatus::closed, {}};
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ReplProcess::kill() {
  close_fd(in_fd_);
  close_fd(out_fd_);
  if (pid_ > 0 && !reaped_) {
    ::kill(pid_, SIGKILL);
    while (::waitpid(pid_, nullptr, 0) < 0 && errno == EINTR) {
    }
    reaped_ = true;
  }
}

bool ReplProcess::running() {
  if (pid_ <= 0 || reaped_) return false;
  int status = 0;
  pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) {
    reaped_ = true;
    return false;
  }
  return true;
}

}  // namespace leanrl::repl
