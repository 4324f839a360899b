#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/repl/pool.hpp"
#include "leanrl/verify/verifier.hpp"

namespace leanrl::test {

std::filesystem::path fixture(std::string_view name);

repl::LaunchSpec mock_launch(std::vector<std::string> extra_args = {});
repl::PoolOptions mock_pool(int workers, std::vector<std::string> extra_args = {});

// Removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Mock REPL transcript file: one received command per row.
std::vector<nlohmann::json> read_transcript(const std::filesystem::path& path);

// Header-only commands (environment loads) in a transcript.
std::size_t count_header_loads(const std::vector<nlohmann::json>& rows);

// In-process verifier: a source is correct unless it carries the mock REPL's
// MOCK_ERROR marker or a sorry token.
class MarkerVerifier : public verify::VerifierClient {
 public:
  std::vector<verify::VerificationResult> verify(const verify::VerificationRequest& request) override;
  std::size_t items_seen() const { return items_; }

 private:
  std::atomic<std::size_t> items_{0};
};

inline const std::string kStdHeader =
    "import Mathlib\nimport Aesop\nset_option maxHeartbeats 400000\n";

}  // namespace leanrl::test
