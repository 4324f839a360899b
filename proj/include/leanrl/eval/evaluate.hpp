#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "leanrl/eval/benchmark.hpp"
#include "leanrl/eval/ledger.hpp"
#include "leanrl/pattern/trace.hpp"
#include "leanrl/rl/policy.hpp"
#include "leanrl/verify/verifier.hpp"

namespace leanrl::eval {

struct EvalConfig {
  std::int64_t budget = 32;
  std::int64_t max_tokens = 32768;
  double temperature = 1.0;
  // Off by default: unbiased pass@k needs the full budget on every statement.
  bool early_stop = false;
  // Completions requested from the policy per call.
  std::int64_t chunk = 8;
  int parallelism = 4;
  std::optional<std::string> subset;
  verify::Mode verify_mode = verify::Mode::final_proof_only;
  std::optional<std::int64_t> verify_timeout_ms;
  pattern::Delimiters delimiters;
  // Streamed as statements finish, one append per attempt.
  std::optional<std::filesystem::path> ledger_path;

  void validate() const;
};

nlohmann::json to_json(const EvalConfig& c);
EvalConfig eval_config_from_json(const nlohmann::json& j);

// Attempts whose completion has no final proof, or whose verification
// throws, are recorded as incorrect. PolicyUnavailable propagates.
AttemptLedger evaluate(const std::vector<BenchmarkStatement>& bench, rl::PolicyClient& policy,
                       verify::VerifierClient& verifier, const EvalConfig& config);

}  // namespace leanrl::eval
