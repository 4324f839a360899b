#include "leanrl/verify/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_set>

#include "leanrl/verify/sorry_scan.hpp"

namespace leanrl::verify {

using nlohmann::json;

std::string_view to_string(Mode m) {
  return m == Mode::full_source ? "full_source" : "final_proof_only";
}

std::string_view to_string(FailureKind k) {
  switch (k) {
    case FailureKind::none: return "none";
    case FailureKind::compile_error: return "compile_error";
    case FailureKind::contains_sorry: return "contains_sorry";
    case FailureKind::timeout: return "timeout";
    case FailureKind::crash: return "crash";
  }
  return "crash";
}

Mode mode_from_string(std::string_view s) {
  if (s == "full_source") return Mode::full_source;
  if (s == "final_proof_only") return Mode::final_proof_only;
  throw BadRequest("unknown mode '" + std::string(s) + "'");
}

FailureKind failure_kind_from_string(std::string_view s) {
  for (auto k : {FailureKind::none, FailureKind::compile_error, FailureKind::contains_sorry,
                 FailureKind::timeout, FailureKind::crash}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown failure_kind '" + std::string(s) + "'");
}

void VerificationRequest::validate() const {
  if (items.empty()) throw BadRequest("items must be non-empty");
  std::unordered_set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.attempt_id).second)
      throw BadRequest("duplicate attempt_id '" + item.attempt_id + "'");
    if (item.source.empty()) throw BadRequest("empty source for '" + item.attempt_id + "'");
  }
  if (timeout_ms && *timeout_ms < 1000) throw BadRequest("timeout_ms must be >= 1000");
}

json to_json(const VerificationRequest& r) {
  json j{{"version", kSchemaVersion}, {"mode", to_string(r.mode)}, {"items", json::array()}};
  for (const auto& item : r.items)
    j["items"].push_back({{"attempt_id", item.attempt_id}, {"source", item.source}});
  if (r.timeout_ms) j["timeout_ms"] = *r.timeout_ms;
  return j;
}

VerificationRequest request_from_json(const json& j) {
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array())
    throw BadRequest("request must be an object with an 'items' array");
  VerificationRequest r;
  try {
    for (const auto& item : j["items"])
      r.items.push_back({item.at("attempt_id").get<std::string>(), item.at("source").get<std::string>()});
    if (j.contains("timeout_ms") && !j["timeout_ms"].is_null())
      r.timeout_ms = j["timeout_ms"].get<std::int64_t>();
    if (j.contains("mode")) r.mode = mode_from_string(j["mode"].get<std::string>());
  } catch (const json::exception& e) {
    throw BadRequest(std::string("malformed request: ") + e.what());
  }
  return r;
}

json to_json(const VerificationResult& r) {
  json j{{"attempt_id", r.attempt_id},
         {"correct", r.correct},
         {"reward", r.reward},
         {"messages", json::array()},
         {"sorries", json::array()},
         {"elapsed_ms", r.elapsed_ms},
         {"cache_hit", r.cache_hit},
         {"failure_kind", to_string(r.failure_kind)}};
  for (const auto& m : r.messages) j["messages"].push_back(repl::to_json(m));
  for (const auto& s : r.sorries) j["sorries"].push_back(repl::to_json(s));
  return j;
}

VerificationResult result_from_json(const json& j) {
  VerificationResult r;
  r.attempt_id = j.at("attempt_id").get<std::string>();
  r.correct = j.at("correct").get<bool>();
  r.reward = j.at("reward").get<int>();
  for (const auto& m : j.value("messages", json::array())) r.messages.push_back(repl::message_from_json(m));
  for (const auto& s : j.value("sorries", json::array())) r.sorries.push_back(repl::sorry_from_json(s));
  r.elapsed_ms = j.value("elapsed_ms", std::int64_t{0});
  r.cache_hit = j.value("cache_hit", false);
  r.failure_kind = failure_kind_from_string(j.at("failure_kind").get<std::string>());
  return r;
}

VerificationResult classify(std::string attempt_id, std::string_view source,
                            const repl::ReplOutcome& outcome) {
  VerificationResult r;
  r.attempt_id = std::move(attempt_id);
  r.messages = outcome.response.messages;
  r.sorries = outcome.response.sorries;
  r.elapsed_ms = outcome.response.elapsed_ms;
  r.cache_hit = outcome.cache_hit;

  if (outcome.kind == repl::OutcomeKind::timeout) r.failure_kind = FailureKind::timeout;
  else if (outcome.kind == repl::OutcomeKind::crash) r.failure_kind = FailureKind::crash;
  else if (outcome.response.has_errors()) r.failure_kind = FailureKind::compile_error;
  else if (!outcome.response.sorries.empty() || contains_sorry_token(source))
    r.failure_kind = FailureKind::contains_sorry;
  else r.failure_kind = FailureKind::none;

  r.correct = r.failure_kind == FailureKind::none;
  r.reward = r.correct ? 1 : 0;
  return r;
}

Verifier::Verifier(repl::ReplPool& pool, VerifierOptions options)
    : pool_(pool), options_(std::move(options)) {}

RequestCounters Verifier::counters() const {
  return {requests_.load(), items_.load(), rejected_.load()};
}

void Verifier::count_rejected() { ++rejected_; }

std::vector<VerificationResult> Verifier::verify(const VerificationRequest& request) {
  request.validate();
  if (!pool_.alive()) throw ServiceUnavailable("REPL pool is not running");
  ++requests_;
  items_ += request.items.size();

  const std::optional<std::chrono::milliseconds> timeout =
      request.timeout_ms ? std::optional(std::chrono::milliseconds(*request.timeout_ms))
                         : std::nullopt;

  std::vector<std::string> sources;
  sources.reserve(request.items.size());
  for (const auto& item : request.items) {
    if (request.mode == Mode::final_proof_only) {
      sources.push_back(options_.standard_header + "\n" + item.source);
    } else {
      sources.push_back(item.source);
    }
  }

  std::vector<VerificationResult> results(request.items.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= request.items.size()) return;
      repl::ReplOutcome outcome;
      try {
        outcome = pool_.submit(sources[i], timeout);
      } catch (const repl::PoolShutdown&) {
        // Items that never reached a worker are reported as crashes.
        outcome.kind = repl::OutcomeKind::crash;
      }
      results[i] = classify(request.items[i].attempt_id, sources[i], outcome);
    }
  };

  const int width = options_.fan_out > 0 ? options_.fan_out : pool_.worker_count();
  const std::size_t threads =
      std::min<std::size_t>(request.items.size(), static_cast<std::size_t>(std::max(1, width)));
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 1; t < threads; ++t) workers.emplace_back(worker);
    worker();
  }
  return results;
}

}  // namespace leanrl::verify
