#include "leanrl/rl/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

#include "leanrl/common/jsonl.hpp"
#include "leanrl/rl/objective.hpp"

namespace leanrl::rl {

using nlohmann::json;

namespace {

// Substream tags for derive_seed.
constexpr std::uint64_t kBatchStream = 0x6261746368ULL;  // "batch"
constexpr std::uint64_t kDropStream = 0x64726f70ULL;     // "drop"

template <typename T>
class Channel {
 public:
  void push(T value) {
    {
      std::lock_guard lk(mu_);
      items_.push_back(std::move(value));
    }
    cv_.notify_one();
  }
  void close() {
    {
      std::lock_guard lk(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }
  std::optional<T> pop() {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
  bool closed_ = false;
};

class FirstError {
 public:
  void capture() {
    std::lock_guard lk(mu_);
    if (!error_) error_ = std::current_exception();
  }
  bool set() const {
    std::lock_guard lk(mu_);
    return error_ != nullptr;
  }
  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  mutable std::mutex mu_;
  std::exception_ptr error_;
};

std::string_view scope_name(LogZScope s) {
  return s == LogZScope::all_rollouts ? "all_rollouts" : "format_passing";
}

}  // namespace

void RolloutConfig::validate() const {
  if (batch_problems < 1) throw InvalidArgument("batch_problems must be >= 1");
  if (rollouts_per_problem < 1) throw InvalidArgument("rollouts_per_problem must be >= 1");
  if (tau < 0) throw InvalidArgument("tau must be >= 0");
  if (drop_prob < 0 || drop_prob > 1) throw InvalidArgument("drop_prob must be in [0, 1]");
  if (coverage_threshold < 0 || coverage_threshold > 1)
    throw InvalidArgument("coverage_threshold must be in [0, 1]");
  if (generation_parallelism < 1 || verification_parallelism < 1)
    throw InvalidArgument("parallelism must be >= 1");
}

json to_json(const RolloutConfig& c) {
  json j{{"batch_problems", c.batch_problems},
         {"rollouts_per_problem", c.rollouts_per_problem},
         {"tau", c.tau},
         {"drop_prob", c.drop_prob},
         {"coverage_threshold", c.coverage_threshold},
         {"learning_rate", c.learning_rate},
         {"seed", c.seed},
         {"log_z_scope", scope_name(c.log_z_scope)},
         {"max_tokens", c.max_tokens},
         {"temperature", c.temperature},
         {"generation_parallelism", c.generation_parallelism},
         {"verification_parallelism", c.verification_parallelism},
         {"verify_mode", verify::to_string(c.verify_mode)}};
  j["verify_timeout_ms"] = c.verify_timeout_ms ? json(*c.verify_timeout_ms) : json(nullptr);
  return j;
}

RolloutConfig rollout_config_from_json(const json& j) {
  RolloutConfig c;
  c.batch_problems = j.value("batch_problems", c.batch_problems);
  c.rollouts_per_problem = j.value("rollouts_per_problem", c.rollouts_per_problem);
  c.tau = j.value("tau", c.tau);
  c.drop_prob = j.value("drop_prob", c.drop_prob);
  c.coverage_threshold = j.value("coverage_threshold", c.coverage_threshold);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.seed = j.value("seed", c.seed);
  const auto scope = j.value("log_z_scope", std::string("all_rollouts"));
  if (scope == "all_rollouts") c.log_z_scope = LogZScope::all_rollouts;
  else if (scope == "format_passing") c.log_z_scope = LogZScope::format_passing;
  else throw InvalidArgument("unknown log_z_scope '" + scope + "'");
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.temperature = j.value("temperature", c.temperature);
  c.generation_parallelism = j.value("generation_parallelism", c.generation_parallelism);
  c.verification_parallelism = j.value("verification_parallelism", c.verification_parallelism);
  if (j.contains("verify_mode"))
    c.verify_mode = verify::mode_from_string(j["verify_mode"].get<std::string>());
  if (j.contains("verify_timeout_ms") && !j["verify_timeout_ms"].is_null())
    c.verify_timeout_ms = j["verify_timeout_ms"].get<std::int64_t>();
  c.validate();
  return c;
}

int RolloutGroup::successes() const {
  int c = 0;
  for (const auto& s : samples) c += s.reward;
  return c;
}

json to_json(const IterationStats& s) {
  return json{{"iteration", s.iteration},
              {"problems", s.problems},
              {"samples", s.samples},
              {"retained", s.retained},
              {"pass_rate", s.pass_rate},
              {"mean_token_length", s.mean_token_length},
              {"format_pass_rate", s.format_pass_rate},
              {"retained_fraction", s.retained_fraction},
              {"mean_objective", s.mean_objective},
              {"sampled_with_replacement", s.sampled_with_replacement},
              {"elapsed_s", s.elapsed_s}};
}

BatchSample sample_batch(const curation::ProblemStore& store, int n, Rng& rng) {
  if (n < 1) throw InvalidArgument("batch size must be >= 1");
  auto active = store.ids_in_state(curation::ProblemState::active);
  if (active.empty()) throw EmptyProblemSet("no active problems to sample from");

  BatchSample batch;
  const auto want = static_cast<std::size_t>(n);
  if (active.size() >= want) {
    // Partial Fisher-Yates: the first `want` slots are a uniform ordered sample.
    for (std::size_t i = 0; i < want; ++i) {
      const auto j = i + rng.below(active.size() - i);
      std::swap(active[i], active[j]);
    }
    active.resize(want);
  } else {
    batch.with_replacement = true;
    std::vector<std::string> picks;
    for (std::size_t i = 0; i < want; ++i) picks.push_back(active[rng.below(active.size())]);
    active = std::move(picks);
  }
  batch.problems.reserve(want);
  for (const auto& id : active) batch.problems.push_back(store.get(id));
  return batch;
}

void estimate_log_z(RolloutGroup& group, const RolloutConfig& cfg) {
  std::vector<int> rewards;
  for (const auto& s : group.samples) {
    if (cfg.log_z_scope == LogZScope::all_rollouts || s.format.passes_filter)
      rewards.push_back(s.reward);
  }
  group.log_z_hat = log_z_hat(rewards);
}

void apply_filters(RolloutGroup& group, const RolloutConfig& cfg, const FilterContext& ctx) {
  for (std::size_t j = 0; j < group.samples.size(); ++j) {
    auto& s = group.samples[j];
    s.objective_term.reset();
    s.drop_reason.clear();
    if (!s.format.passes_filter) {
      s.retained = false;
      s.drop_reason = "format";
      continue;
    }
    if (s.reward == 0) {
      Rng rng(derive_seed(ctx.seed, {static_cast<std::uint64_t>(ctx.iteration), ctx.group_index,
                                     static_cast<std::uint64_t>(j), kDropStream}));
      s.retained = !rng.bernoulli(cfg.drop_prob);
      if (!s.retained) {
        s.drop_reason = "negative";
        continue;
      }
    } else {
      s.retained = true;
    }
    s.objective_term = objective_term(s.reward, group.log_z_hat, cfg.tau, s.logp_new, s.logp_old);
  }
}

IterationStats iteration_stats(const std::vector<RolloutGroup>& groups, std::int64_t iteration) {
  IterationStats st;
  st.iteration = iteration;
  st.problems = groups.size();
  double tokens = 0, objective = 0;
  std::size_t rewards = 0, formatted = 0;
  for (const auto& g : groups) {
    for (const auto& s : g.samples) {
      ++st.samples;
      rewards += static_cast<std::size_t>(s.reward);
      formatted += s.format.passes_filter ? 1 : 0;
      tokens += static_cast<double>(s.trace.token_count);
      if (s.retained) {
        ++st.retained;
        objective += s.objective_term.value_or(0.0);
      }
    }
  }
  if (st.samples > 0) {
    const auto n = static_cast<double>(st.samples);
    st.pass_rate = static_cast<double>(rewards) / n;
    st.mean_token_length = tokens / n;
    st.format_pass_rate = static_cast<double>(formatted) / n;
    st.retained_fraction = static_cast<double>(st.retained) / n;
  }
  if (st.retained > 0) st.mean_objective = objective / static_cast<double>(st.retained);
  return st;
}

IterationResult run_iteration(const RolloutConfig& cfg, const curation::ProblemStore& store,
                              PolicyClient& policy, verify::VerifierClient& verifier,
                              std::int64_t iteration) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Rng batch_rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(iteration), kBatchStream}));
  auto batch = sample_batch(store, cfg.batch_problems, batch_rng);
  const std::size_t n = batch.problems.size();
  const auto k = static_cast<std::size_t>(cfg.rollouts_per_problem);

  std::vector<RolloutGroup> groups(n);
  std::vector<std::string> prompts(n);
  Channel<std::size_t> generated;
  FirstError error;
  std::atomic<std::size_t> next{0};

  auto generate_stage = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || error.set()) return;
      try {
        const auto& problem = batch.problems[i];
        prompts[i] = build_prompt(problem.informal_text, problem.statement);
        GenerationRequest req{problem.problem_id, prompts[i], cfg.rollouts_per_problem,
                              cfg.max_tokens, cfg.temperature};
        auto completions = policy.generate(req);
        if (completions.size() != k)
          throw PolicyUnavailable("policy returned " + std::to_string(completions.size()) +
                                  " completions, expected " + std::to_string(k));
        std::vector<std::string> texts;
        for (const auto& c : completions) texts.push_back(c.text);
        const auto logp_new = policy.score(prompts[i], texts);
        if (logp_new.size() != k) throw PolicyUnavailable("policy scored the wrong number of texts");

        auto& group = groups[i];
        group.problem_id = problem.problem_id;
        group.samples.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
          auto& s = group.samples[j];
          s.problem_id = problem.problem_id;
          s.attempt_id = std::to_string(iteration) + ":" + std::to_string(i) + ":" + std::to_string(j);
          s.trace = pattern::parse_trace(std::move(completions[j].text), cfg.delimiters);
          s.logp_old = completions[j].logp_old;
          s.logp_new = logp_new[j];
        }
        generated.push(i);
      } catch (...) {
        error.capture();
        return;
      }
    }
  };

  pattern::FormatConfig format_cfg;
  format_cfg.coverage_threshold = cfg.coverage_threshold;

  auto verify_stage = [&] {
    while (auto item = generated.pop()) {
      if (error.set()) continue;
      try {
        auto& group = groups[*item];
        verify::VerificationRequest req;
        req.mode = cfg.verify_mode;
        req.timeout_ms = cfg.verify_timeout_ms;
        std::vector<std::size_t> verified;
        for (std::size_t j = 0; j < group.samples.size(); ++j) {
          auto& s = group.samples[j];
          s.format = pattern::check_format(s.trace, format_cfg);
          if (s.trace.final_proof && !s.trace.final_proof->code.empty()) {
            req.items.push_back({s.attempt_id, s.trace.final_proof->code});
            verified.push_back(j);
          } else {
            s.reward = 0;
            s.verdict = kNoFinalProof;
          }
        }
        if (!req.items.empty()) {
          const auto results = verifier.verify(req);
          for (std::size_t r = 0; r < verified.size(); ++r) {
            auto& s = group.samples[verified[r]];
            s.reward = results.at(r).reward;
            s.verdict = verify::to_string(results.at(r).failure_kind);
          }
        }
        estimate_log_z(group, cfg);
        apply_filters(group, cfg, {cfg.seed, iteration, static_cast<std::uint64_t>(*item)});
      } catch (...) {
        error.capture();
      }
    }
  };

  {
    std::vector<std::jthread> verifiers;
    for (int t = 0; t < cfg.verification_parallelism; ++t) verifiers.emplace_back(verify_stage);
    {
      std::vector<std::jthread> generators;
      for (int t = 0; t < cfg.generation_parallelism; ++t) generators.emplace_back(generate_stage);
    }
    generated.close();
  }
  error.rethrow();

  IterationResult result;
  result.stats = iteration_stats(groups, iteration);
  result.stats.sampled_with_replacement = batch.with_replacement;
  result.stats.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.groups = std::move(groups);
  return result;
}

void record_solves(curation::ProblemStore& store, const std::vector<RolloutGroup>& groups,
                   std::int64_t iteration) {
  for (const auto& g : groups) {
    store.record_solve(g.problem_id,
                       {iteration, g.successes(), static_cast<int>(g.samples.size())});
  }
}

std::vector<json> retained_rows(const std::vector<RolloutGroup>& groups) {
  std::vector<json> rows;
  for (const auto& g : groups) {
    for (const auto& s : g.samples) {
      if (!s.retained) continue;
      rows.push_back({{"problem_id", s.problem_id},
                      {"attempt_id", s.attempt_id},
                      {"reward", s.reward},
                      {"log_Z_hat", g.log_z_hat},
                      {"logp_new", s.logp_new},
                      {"logp_old", s.logp_old},
                      {"objective_term", s.objective_term.value_or(0.0)},
                      {"coverage_ratio", s.format.coverage_ratio}});
    }
  }
  return rows;
}

void write_retained_samples(const std::filesystem::path& path,
                            const std::vector<RolloutGroup>& groups) {
  write_jsonl(path, retained_rows(groups));
}

void append_iteration_log(const std::filesystem::path& path, const IterationStats& stats) {
  append_jsonl(path, to_json(stats));
}

}  // namespace leanrl::rl
