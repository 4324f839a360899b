#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "leanrl/common/error.hpp"

namespace leanrl::rl {

LEANRL_DEFINE_ERROR(PolicyUnavailable);

struct GenerationRequest {
  std::string problem_id;
  std::string prompt;
  int k = 8;
  int max_tokens = 32768;
  double temperature = 1.0;
};

struct Completion {
  std::string text;
  double logp_old = 0.0;  // sum of token log-probs under the sampling policy
};

// The model side of the loop. generate() samples k completions from the
// sampling policy; score() returns summed log-probs of given texts under the
// current policy. Implementations must be safe for concurrent calls.
class PolicyClient {
 public:
  virtual ~PolicyClient() = default;
  virtual std::vector<Completion> generate(const GenerationRequest& request) = 0;
  virtual std::vector<double> score(const std::string& prompt,
                                    std::span<const std::string> texts) = 0;
};

// Prompt shown to the policy: the informal statement as Lean comments, then
// the formal statement.
std::string build_prompt(const std::string& informal_text, const std::string& statement);

struct ScriptedCompletion {
  std::string text;
  double logp_old = 0.0;
  double logp_new = 0.0;
};

// Replays fixed completions. Scripts are keyed by problem id, "*" is the
// fallback; each problem cycles through its script across calls.
// JSONL rows: {"problem_id", "text", "logp_old"?, "logp_new"?}.
class ScriptedPolicy : public PolicyClient {
 public:
  ScriptedPolicy() = default;
  explicit ScriptedPolicy(std::map<std::string, std::vector<ScriptedCompletion>> scripts);
  static std::unique_ptr<ScriptedPolicy> from_jsonl(const std::filesystem::path& path);

  void add(const std::string& problem_id, ScriptedCompletion completion);

  std::vector<Completion> generate(const GenerationRequest& request) override;
  std::vector<double> score(const std::string& prompt, std::span<const std::string> texts) override;

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<ScriptedCompletion>> scripts_;
  std::unordered_map<std::string, std::size_t> cursor_;
  std::unordered_map<std::string, double> logp_new_by_text_;
};

struct SyntheticPolicyOptions {
  double success_prob = 0.5;   // per completion
  double format_ok_prob = 1.0; // otherwise the think block is omitted
  double logp_shift = 0.0;     // logp_new - logp_old for every completion
  std::uint64_t seed = 0;
};

// Stochastic stand-in for a prover. Each completion is a well-formed trace
// whose final proof is the prompt with its trailing `sorry` replaced; with
// probability 1 - success_prob the proof carries the mock REPL's MOCK_ERROR
// marker. Draws derive from (seed, problem id, per-problem call index), so
// a run is reproducible when each problem's requests are issued in order.
class SyntheticPolicy : public PolicyClient {
 public:
  explicit SyntheticPolicy(SyntheticPolicyOptions options) : options_(options) {}

  std::vector<Completion> generate(const GenerationRequest& request) override;
  std::vector<double> score(const std::string& prompt, std::span<const std::string> texts) override;

  static double logp_of(const std::string& text);
  static std::string make_trace(const std::string& prompt, bool correct, bool well_formed);

 private:
  SyntheticPolicyOptions options_;
  std::mutex mu_;
  std::unordered_map<std::string, std::uint64_t> calls_;
};

// Remote policy over HTTP:
//   POST /generate {problem_id, prompt, k, max_tokens, temperature}
//        -> {"completions": [{"text", "logp"}]}
//   POST /score {prompt, texts} -> {"logps": [...]}
class HttpPolicyClient : public PolicyClient {
 public:
  explicit HttpPolicyClient(std::string base_url, int timeout_s = 3600);
  std::vector<Completion> generate(const GenerationRequest& request) override;
  std::vector<double> score(const std::string& prompt, std::span<const std::string> texts) override;

 private:
  std::string base_url_;
  int timeout_s_;
};

}  // namespace leanrl::rl
