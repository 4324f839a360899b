#include "support.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>

#include "leanrl/verify/sorry_scan.hpp"

namespace leanrl::test {

std::filesystem::path fixture(std::string_view name) {
  return std::filesystem::path(FIXTURE_DIR) / name;
}

repl::LaunchSpec mock_launch(std::vector<std::string> extra_args) {
  repl::LaunchSpec spec;
  spec.argv = {MOCK_REPL_PATH};
  for (auto& a : extra_args) spec.argv.push_back(std::move(a));
  return spec;
}

repl::PoolOptions mock_pool(int workers, std::vector<std::string> extra_args) {
  repl::PoolOptions opt;
  opt.launch = mock_launch(std::move(extra_args));
  opt.worker_count = workers;
  opt.default_timeout = std::chrono::milliseconds(10000);
  return opt;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("leanrl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::vector<nlohmann::json> read_transcript(const std::filesystem::path& path) {
  std::vector<nlohmann::json> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  }
  return rows;
}

std::size_t count_header_loads(const std::vector<nlohmann::json>& rows) {
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.contains("env")) continue;
    const auto cmd = r.value("cmd", std::string());
    if (cmd.rfind("import", 0) == 0 || cmd.rfind("set_option", 0) == 0) ++n;
  }
  return n;
}

std::vector<verify::VerificationResult> MarkerVerifier::verify(
    const verify::VerificationRequest& request) {
  request.validate();
  std::vector<verify::VerificationResult> out;
  for (const auto& item : request.items) {
    verify::VerificationResult r;
    r.attempt_id = item.attempt_id;
    if (item.source.find("MOCK_ERROR") != std::string::npos)
      r.failure_kind = verify::FailureKind::compile_error;
    else if (verify::contains_sorry_token(item.source))
      r.failure_kind = verify::FailureKind::contains_sorry;
    else
      r.failure_kind = verify::FailureKind::none;
    r.correct = r.failure_kind == verify::FailureKind::none;
    r.reward = r.correct ? 1 : 0;
    out.push_back(std::move(r));
  }
  items_ += request.items.size();
  return out;
}

}  // namespace leanrl::test
