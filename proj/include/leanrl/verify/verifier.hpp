#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/common/error.hpp"
#include "leanrl/repl/pool.hpp"
#include "leanrl/repl/protocol.hpp"

namespace leanrl::verify {

LEANRL_DEFINE_ERROR(ServiceUnavailable);
LEANRL_DEFINE_ERROR(BadRequest);

inline constexpr const char* kSchemaVersion = "1";

enum class Mode { full_source, final_proof_only };
enum class FailureKind { none, compile_error, contains_sorry, timeout, crash };

std::string_view to_string(Mode m);
std::string_view to_string(FailureKind k);
Mode mode_from_string(std::string_view s);
FailureKind failure_kind_from_string(std::string_view s);

struct VerificationItem {
  std::string attempt_id;
  std::string source;
};

struct VerificationRequest {
  std::vector<VerificationItem> items;
  std::optional<std::int64_t> timeout_ms;
  Mode mode = Mode::full_source;

  // Non-empty items, unique attempt ids, timeout >= 1000 ms when given.
  void validate() const;
};

struct VerificationResult {
  std::string attempt_id;
  bool correct = false;
  int reward = 0;
  std::vector<repl::Message> messages;
  std::vector<repl::Sorry> sorries;
  std::int64_t elapsed_ms = 0;
  bool cache_hit = false;
  FailureKind failure_kind = FailureKind::crash;

  bool operator==(const VerificationResult&) const = default;
};

nlohmann::json to_json(const VerificationRequest& r);
nlohmann::json to_json(const VerificationResult& r);
VerificationRequest request_from_json(const nlohmann::json& j);
VerificationResult result_from_json(const nlohmann::json& j);

// Binary reward semantics: correct iff no error-severity message, no
// sorries, no textual sorry/admit token, and the command finished.
// Warnings never fail a proof.
VerificationResult classify(std::string attempt_id, std::string_view source,
                            const repl::ReplOutcome& outcome);

// Anything that can verify a batch: the in-process Verifier or a remote
// service reached over HTTP.
class VerifierClient {
 public:
  virtual ~VerifierClient() = default;
  virtual std::vector<VerificationResult> verify(const VerificationRequest& request) = 0;
};

struct VerifierOptions {
  // Prepended to sources in final_proof_only mode; duplicate imports collapse
  // in header canonicalization.
  std::string standard_header =
      "import Mathlib\nimport Aesop\nset_option maxHeartbeats 400000\n"
      "open BigOperators Real Nat Topology Rat\n";
  // Upper bound on concurrent REPL submissions per batch; 0 = pool size.
  int fan_out = 0;
};

struct RequestCounters {
  std::uint64_t requests = 0;
  std::uint64_t items = 0;
  std::uint64_t rejected = 0;
};

// Batch verification over a ReplPool. Results come back in request order;
// item-level failures never abort the batch.
class Verifier : public VerifierClient {
 public:
  Verifier(repl::ReplPool& pool, VerifierOptions options = {});

  std::vector<VerificationResult> verify(const VerificationRequest& request) override;

  repl::ReplPool& pool() { return pool_; }
  const VerifierOptions& options() const { return options_; }
  RequestCounters counters() const;
  void count_rejected();

 private:
  repl::ReplPool& pool_;
  VerifierOptions options_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> items_{0};
  std::atomic<std::uint64_t> rejected_{0};
};

}  // namespace leanrl::verify
