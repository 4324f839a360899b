#include "leanrl/eval/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "leanrl/common/jsonl.hpp"

namespace leanrl::eval {

using nlohmann::json;

void EvalConfig::validate() const {
  if (budget < 1) throw InvalidArgument("budget must be >= 1");
  if (max_tokens < 1) throw InvalidArgument("max_tokens must be >= 1");
  if (chunk < 1) throw InvalidArgument("chunk must be >= 1");
  if (parallelism < 1) throw InvalidArgument("parallelism must be >= 1");
}

json to_json(const EvalConfig& c) {
  return json{{"budget", c.budget},
              {"max_tokens", c.max_tokens},
              {"temperature", c.temperature},
              {"early_stop", c.early_stop},
              {"chunk", c.chunk},
              {"parallelism", c.parallelism},
              {"subset", c.subset ? json(*c.subset) : json(nullptr)},
              {"verify_mode", verify::to_string(c.verify_mode)},
              {"verify_timeout_ms", c.verify_timeout_ms ? json(*c.verify_timeout_ms) : json(nullptr)},
              {"ledger_path", c.ledger_path ? json(c.ledger_path->string()) : json(nullptr)}};
}

EvalConfig eval_config_from_json(const json& j) {
  EvalConfig c;
  c.budget = j.value("budget", c.budget);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.temperature = j.value("temperature", c.temperature);
  c.early_stop = j.value("early_stop", c.early_stop);
  c.chunk = j.value("chunk", c.chunk);
  c.parallelism = j.value("parallelism", c.parallelism);
  if (j.contains("subset") && !j["subset"].is_null()) c.subset = j["subset"].get<std::string>();
  if (j.contains("verify_mode")) c.verify_mode = verify::mode_from_string(j["verify_mode"].get<std::string>());
  if (j.contains("verify_timeout_ms") && !j["verify_timeout_ms"].is_null())
    c.verify_timeout_ms = j["verify_timeout_ms"].get<std::int64_t>();
  if (j.contains("ledger_path") && !j["ledger_path"].is_null())
    c.ledger_path = j["ledger_path"].get<std::string>();
  c.validate();
  return c;
}

namespace {

std::vector<Attempt> run_statement(const BenchmarkStatement& s, rl::PolicyClient& policy,
                                   verify::VerifierClient& verifier, const EvalConfig& cfg) {
  std::vector<Attempt> attempts;
  const auto prompt = rl::build_prompt(s.informal_text, s.statement);
  while (static_cast<std::int64_t>(attempts.size()) < cfg.budget) {
    const auto want = std::min(cfg.chunk, cfg.budget - static_cast<std::int64_t>(attempts.size()));
    rl::GenerationRequest req{s.name, prompt, static_cast<int>(want), static_cast<int>(cfg.max_tokens),
                              cfg.temperature};
    auto completions = policy.generate(req);
    if (completions.empty()) throw rl::PolicyUnavailable("policy returned no completions");
    if (static_cast<std::int64_t>(completions.size()) > want) completions.resize(want);

    const auto base = static_cast<std::int64_t>(attempts.size());
    verify::VerificationRequest vreq;
    vreq.mode = cfg.verify_mode;
    vreq.timeout_ms = cfg.verify_timeout_ms;
    std::vector<std::size_t> verified;
    for (std::size_t j = 0; j < completions.size(); ++j) {
      auto trace = pattern::parse_trace(std::move(completions[j].text), cfg.delimiters);
      attempts.push_back({base + static_cast<std::int64_t>(j) + 1, false,
                          static_cast<std::int64_t>(trace.token_count)});
      if (trace.final_proof && !trace.final_proof->code.empty()) {
        vreq.items.push_back({s.name + ":" + std::to_string(base + static_cast<std::int64_t>(j) + 1),
                              trace.final_proof->code});
        verified.push_back(j);
      }
    }
    if (!vreq.items.empty()) {
      try {
        const auto results = verifier.verify(vreq);
        for (std::size_t r = 0; r < verified.size() && r < results.size(); ++r)
          attempts[base + static_cast<std::int64_t>(verified[r])].correct = results[r].correct;
      } catch (const Error&) {
        // Left as incorrect.
      }
    }
    if (cfg.early_stop) {
      const auto hit = std::find_if(attempts.begin() + base, attempts.end(),
                                    [](const Attempt& a) { return a.correct; });
      if (hit != attempts.end()) {
        attempts.erase(hit + 1, attempts.end());
        break;
      }
    }
  }
  return attempts;
}

}  // namespace

AttemptLedger evaluate(const std::vector<BenchmarkStatement>& bench, rl::PolicyClient& policy,
                       verify::VerifierClient& verifier, const EvalConfig& cfg) {
  cfg.validate();
  const auto selected = cfg.subset ? filter_subset(bench, *cfg.subset) : bench;
  std::vector<std::vector<Attempt>> per_statement(selected.size());

  std::mutex ledger_mu;
  std::mutex error_mu;
  std::exception_ptr error;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= selected.size()) return;
      {
        std::lock_guard lk(error_mu);
        if (error) return;
      }
      try {
        per_statement[i] = run_statement(selected[i], policy, verifier, cfg);
        if (cfg.ledger_path) {
          std::lock_guard lk(ledger_mu);
          for (const auto& a : per_statement[i]) append_jsonl(*cfg.ledger_path, ledger_row(selected[i].name, a));
        }
      } catch (...) {
        std::lock_guard lk(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism), selected.size());
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  AttemptLedger ledger;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    ledger.ensure(selected[i].name);
    for (const auto& a : per_statement[i]) ledger.insert(selected[i].name, a);
  }
  return ledger;
}

}  // namespace leanrl::eval
