#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/common/error.hpp"
#include "leanrl/common/rng.hpp"
#include "leanrl/curation/store.hpp"
#include "leanrl/pattern/format.hpp"
#include "leanrl/pattern/trace.hpp"
#include "leanrl/rl/policy.hpp"
#include "leanrl/verify/verifier.hpp"

namespace leanrl::rl {

LEANRL_DEFINE_ERROR(EmptyProblemSet);

// Which rollouts enter the log Z estimate.
enum class LogZScope { all_rollouts, format_passing };

struct RolloutConfig {
  int batch_problems = 1000;       // N
  int rollouts_per_problem = 8;    // k
  double tau = 0.4;                // KL coefficient
  double drop_prob = 0.5;          // omega, applied to reward-0 samples
  double coverage_threshold = 0.6;
  double learning_rate = 2e-6;     // provenance only; the optimizer is external
  std::uint64_t seed = 0;
  LogZScope log_z_scope = LogZScope::all_rollouts;
  int max_tokens = 32768;
  double temperature = 1.0;
  int generation_parallelism = 4;
  int verification_parallelism = 4;
  verify::Mode verify_mode = verify::Mode::final_proof_only;
  std::optional<std::int64_t> verify_timeout_ms;
  pattern::Delimiters delimiters;

  void validate() const;
};

nlohmann::json to_json(const RolloutConfig& c);
RolloutConfig rollout_config_from_json(const nlohmann::json& j);

// Sample-level verification outcome: a verify::FailureKind name, or
// "no_final_proof" when the completion had nothing to verify.
inline constexpr const char* kNoFinalProof = "no_final_proof";

struct RolloutSample {
  std::string problem_id;
  std::string attempt_id;
  pattern::ReasoningTrace trace;
  int reward = 0;
  std::string verdict;
  pattern::FormatVerdict format;
  double logp_new = 0.0;
  double logp_old = 0.0;
  bool retained = false;
  std::string drop_reason;  // "format" or "negative" when not retained
  std::optional<double> objective_term;
};

struct RolloutGroup {
  std::string problem_id;
  std::vector<RolloutSample> samples;
  double log_z_hat = 0.0;

  int successes() const;
};

struct IterationStats {
  std::int64_t iteration = 0;
  std::size_t problems = 0;
  std::size_t samples = 0;
  std::size_t retained = 0;
  double pass_rate = 0.0;
  double mean_token_length = 0.0;
  double format_pass_rate = 0.0;
  double retained_fraction = 0.0;
  double mean_objective = 0.0;  // over retained samples
  bool sampled_with_replacement = false;
  double elapsed_s = 0.0;
};

nlohmann::json to_json(const IterationStats& s);

struct BatchSample {
  std::vector<curation::ProblemRecord> problems;
  bool with_replacement = false;
};

// Uniform sample of N active problems without replacement, in seeded order.
// Falls back to sampling with replacement (flagged) when fewer than N are
// active. Throws EmptyProblemSet when none are.
BatchSample sample_batch(const curation::ProblemStore& store, int n, Rng& rng);

// Where a group sits in the run; drop decisions are a pure function of
// (seed, iteration, group_index, sample index).
struct FilterContext {
  std::uint64_t seed = 0;
  std::int64_t iteration = 0;
  std::uint64_t group_index = 0;
};

// Format-failing samples are excluded; each remaining reward-0 sample is
// dropped with probability drop_prob; reward-1 samples passing format are
// always kept. Objective terms are then set for retained samples only.
void apply_filters(RolloutGroup& group, const RolloutConfig& cfg, const FilterContext& ctx);

// Sets log_z_hat from the group's rewards according to cfg.log_z_scope.
void estimate_log_z(RolloutGroup& group, const RolloutConfig& cfg);

IterationStats iteration_stats(const std::vector<RolloutGroup>& groups, std::int64_t iteration);

struct IterationResult {
  std::vector<RolloutGroup> groups;
  IterationStats stats;
};

// One RL iteration: sample N problems, request k rollouts each, verify final
// proofs, check format, estimate log Z per group, filter, and compute
// objective terms. Generation and verification run as a two-stage pipeline,
// so groups are verified while later groups are still being generated.
IterationResult run_iteration(const RolloutConfig& cfg, const curation::ProblemStore& store,
                              PolicyClient& policy, verify::VerifierClient& verifier,
                              std::int64_t iteration);

// Feeds each group's success count back into the store's solve history.
void record_solves(curation::ProblemStore& store, const std::vector<RolloutGroup>& groups,
                   std::int64_t iteration);

// One JSONL row per retained sample.
std::vector<nlohmann::json> retained_rows(const std::vector<RolloutGroup>& groups);
void write_retained_samples(const std::filesystem::path& path,
                            const std::vector<RolloutGroup>& groups);
void append_iteration_log(const std::filesystem::path& path, const IterationStats& stats);

}  // namespace leanrl::rl
