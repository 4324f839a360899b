#include "leanrl/repl/pool.hpp"

#include <signal.h>

#include <algorithm>
#include <csignal>

namespace leanrl::repl {

using Clock = std::chrono::steady_clock;

ReplPool::ReplPool(PoolOptions options) : options_(std::move(options)), started_(Clock::now()) {
  if (options_.worker_count < 1) throw InvalidArgument("worker_count must be >= 1");
  if (options_.cache_capacity < 1) throw InvalidArgument("cache_capacity must be >= 1");
  // A worker dying mid-write must surface as a crash, not kill the server.
  std::signal(SIGPIPE, SIG_IGN);

  std::string first_failure;
  for (int i = 0; i < options_.worker_count; ++i) {
    auto slot = std::make_unique<Slot>(options_.cache_capacity);
    slot->id = i;
    try {
      slot->process = std::make_unique<ReplProcess>(options_.launch, i);
      slot->state = WorkerState::idle;
      slot->spawn_time = std::chrono::system_clock::now();
    } catch (const SpawnFailure& e) {
      if (first_failure.empty()) first_failure = e.what();
      ++spawn_failures_;
    }
    slots_.push_back(std::move(slot));
  }
  const bool any_live = std::any_of(slots_.begin(), slots_.end(),
                                    [](const auto& s) { return s->state == WorkerState::idle; });
  if (!any_live) throw SpawnFailure(first_failure);
}

ReplPool::~ReplPool() {
  shutdown();
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] {
    return std::none_of(slots_.begin(), slots_.end(),
                        [](const auto& s) { return s->state == WorkerState::busy; });
  });
}

void ReplPool::shutdown() {
  std::lock_guard lk(mu_);
  shutdown_ = true;
  for (auto& slot : slots_) {
    if (slot->state == WorkerState::busy) {
      // The owning thread sees EOF and unwinds; it reaps the child itself.
      if (slot->process && slot->process->pid() > 0) ::kill(slot->process->pid(), SIGKILL);
    } else {
      slot->process.reset();
      slot->state = WorkerState::dead;
      slot->envs.clear();
    }
  }
  cv_.notify_all();
}

bool ReplPool::alive() const {
  std::lock_guard lk(mu_);
  if (shutdown_) return false;
  return std::any_of(slots_.begin(), slots_.end(),
                     [](const auto& s) { return s->state != WorkerState::dead; });
}

std::size_t ReplPool::queue_depth() const {
  std::lock_guard lk(mu_);
  return waiting_;
}

ReplPool::Slot& ReplPool::acquire(const ImportHeaderKey& key, int avoid_worker) {
  std::unique_lock lk(mu_);
  ++waiting_;
  bool tried_respawn = false;
  for (;;) {
    if (shutdown_) {
      --waiting_;
      throw PoolShutdown("pool is shut down");
    }

    Slot* best = nullptr;
    auto better = [&](Slot* candidate) {
      if (!best) return true;
      const bool cand_avoid = candidate->id == avoid_worker;
      const bool best_avoid = best->id == avoid_worker;
      if (cand_avoid != best_avoid) return best_avoid;
      if (!key.empty()) {
        const bool cand_has = candidate->envs.contains(key);
        const bool best_has = best->envs.contains(key);
        if (cand_has != best_has) return cand_has;
      }
      return candidate->served < best->served;
    };
    for (auto& slot : slots_) {
      if (slot->state == WorkerState::idle && better(slot.get())) best = slot.get();
    }
    if (best) {
      best->state = WorkerState::busy;
      --waiting_;
      return *best;
    }

    Slot* dead = nullptr;
    bool any_busy = false;
    for (auto& slot : slots_) {
      if (slot->state == WorkerState::dead && !dead) dead = slot.get();
      if (slot->state == WorkerState::busy) any_busy = true;
    }
    if (dead && !tried_respawn) {
      tried_respawn = true;
      dead->state = WorkerState::busy;
      lk.unlock();
      const bool ok = respawn(*dead);
      lk.lock();
      if (ok) {
        --waiting_;
        return *dead;
      }
      dead->state = WorkerState::dead;
      cv_.notify_all();
      if (!any_busy) {
        --waiting_;
        throw PoolShutdown("no live REPL workers");
      }
      continue;
    }
    if (!any_busy) {
      --waiting_;
      throw PoolShutdown("no live REPL workers");
    }
    cv_.wait(lk);
  }
}

void ReplPool::release(Slot& slot, bool count_served) {
  std::lock_guard lk(mu_);
  if (count_served) ++slot.served;
  if (shutdown_) {
    slot.process.reset();
    slot.envs.clear();
    slot.state = WorkerState::dead;
  } else {
    slot.state = slot.process ? WorkerState::idle : WorkerState::dead;
  }
  cv_.notify_all();
}

bool ReplPool::respawn(Slot& slot) {
  slot.process.reset();
  {
    std::lock_guard lk(mu_);
    if (shutdown_) return false;
  }
  std::unique_ptr<ReplProcess> fresh;
  try {
    fresh = std::make_unique<ReplProcess>(options_.launch, slot.id);
  } catch (const SpawnFailure&) {
    std::lock_guard lk(mu_);
    ++spawn_failures_;
    slot.envs.clear();
    return false;
  }
  std::lock_guard lk(mu_);
  slot.process = std::move(fresh);
  slot.envs.clear();
  slot.transcript.clear();
  slot.spawn_time = std::chrono::system_clock::now();
  return true;
}

bool ReplPool::exchange(Slot& slot, const std::string& frame, Clock::time_point deadline,
                        ReplResponse& out, RunStatus& status) {
  if (options_.record_transcripts) {
    std::lock_guard lk(mu_);
    slot.transcript.push_back(frame);
  }
  if (!slot.process || !slot.process->write_all(frame)) {
    status = RunStatus::crash;
    return false;
  }
  auto read = slot.process->read_frame(deadline);
  if (read.status == ReadStatus::timeout) {
    status = RunStatus::timeout;
    return false;
  }
  if (read.status == ReadStatus::closed) {
    status = RunStatus::crash;
    return false;
  }
  try {
    out = decode_response(read.frame);
  } catch (const ParseError&) {
    // Garbage on the wire means the worker is no longer trustworthy.
    status = RunStatus::crash;
    return false;
  }
  status = RunStatus::ok;
  return true;
}

ReplPool::RunStatus ReplPool::run_on(Slot& slot, const SplitSource& split,
                                     std::chrono::milliseconds timeout, ReplResponse& out,
                                     bool& cache_hit) {
  const auto deadline = Clock::now() + timeout;
  RunStatus status = RunStatus::ok;
  cache_hit = false;

  if (split.key.empty()) {
    exchange(slot, encode_command(split.body, std::nullopt), deadline, out, status);
    return status;
  }

  std::optional<EnvHandle> env;
  {
    std::lock_guard lk(mu_);
    env = slot.envs.get(split.key);
    if (env) {
      ++hits_;
      cache_hit = true;
    } else {
      ++misses_;
    }
  }

  if (!env) {
    ReplResponse header_response;
    if (!exchange(slot, encode_command(split.key.serialize(), std::nullopt), deadline,
                  header_response, status)) {
      return status;
    }
    if (header_response.has_errors() || !header_response.env) {
      // A header that does not elaborate is never cached; report it as the verdict.
      out = std::move(header_response);
      return RunStatus::ok;
    }
    env = header_response.env;
    {
      std::lock_guard lk(mu_);
      slot.envs.put(split.key, *env);
    }
    if (split.body.find_first_not_of(" \t\r\n") == std::string::npos) {
      out = std::move(header_response);
      return RunStatus::ok;
    }
  }

  exchange(slot, encode_command(split.body, env), deadline, out, status);
  return status;
}

void ReplPool::record_completion() {
  const auto now = Clock::now();
  std::lock_guard lk(mu_);
  ++completed_;
  recent_.push_back(now);
  while (!recent_.empty() && now - recent_.front() > options_.throughput_window) recent_.pop_front();
}

ReplOutcome ReplPool::submit(std::string_view source,
                             std::optional<std::chrono::milliseconds> timeout) {
  const auto split = canonicalize_header(source);
  const auto budget = timeout.value_or(options_.default_timeout);
  {
    std::lock_guard lk(mu_);
    if (shutdown_) throw PoolShutdown("pool is shut down");
    ++submissions_;
  }

  ReplOutcome outcome;
  int avoid = -1;
  for (int attempt = 1;; ++attempt) {
    Slot& slot = acquire(split.key, avoid);
    outcome.worker_id = slot.id;
    outcome.attempts = attempt;

    ReplResponse response;
    bool hit = false;
    const auto t0 = Clock::now();
    const RunStatus status = run_on(slot, split, budget, response, hit);
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();

    if (status == RunStatus::ok) {
      release(slot, true);
      record_completion();
      outcome.kind = OutcomeKind::ok;
      outcome.response = std::move(response);
      outcome.response.elapsed_ms = elapsed;
      outcome.cache_hit = hit;
      return outcome;
    }

    {
      std::lock_guard lk(mu_);
      if (status == RunStatus::timeout) ++timeouts_;
      else ++crashes_;
    }
    respawn(slot);
    release(slot, true);

    if (status == RunStatus::timeout) {
      record_completion();
      outcome.kind = OutcomeKind::timeout;
      outcome.response = ReplResponse{};
      outcome.response.elapsed_ms = elapsed;
      return outcome;
    }
    if (attempt > options_.crash_retries) {
      record_completion();
      outcome.kind = OutcomeKind::crash;
      outcome.response = ReplResponse{};
      outcome.response.elapsed_ms = elapsed;
      return outcome;
    }
    avoid = slot.id;
  }
}

PoolMetrics ReplPool::metrics() const {
  std::lock_guard lk(mu_);
  PoolMetrics m;
  m.submissions = submissions_;
  m.completed = completed_;
  m.cache_hits = hits_;
  m.cache_misses = misses_;
  m.timeouts = timeouts_;
  m.crashes = crashes_;
  m.spawn_failures = spawn_failures_;
  const auto lookups = hits_ + misses_;
  m.cache_hit_rate = lookups == 0 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(lookups);
  for (const auto& slot : slots_) {
    if (slot->state != WorkerState::dead) ++m.live_workers;
  }
  const auto now = Clock::now();
  std::size_t in_window = 0;
  for (auto t : recent_) {
    if (now - t <= options_.throughput_window) ++in_window;
  }
  const double span = std::chrono::duration<double>(
                          std::min<Clock::duration>(now - started_, options_.throughput_window))
                          .count();
  m.throughput_per_s = span > 0.0 ? static_cast<double>(in_window) / span : 0.0;
  return m;
}

std::vector<WorkerSnapshot> ReplPool::workers() const {
  std::lock_guard lk(mu_);
  std::vector<WorkerSnapshot> out;
  for (const auto& slot : slots_) {
    out.push_back({slot->id, slot->state, slot->served, slot->envs.keys_by_recency(),
                   slot->spawn_time});
  }
  return out;
}

std::vector<std::string> ReplPool::transcript(int worker_id) const {
  std::lock_guard lk(mu_);
  if (worker_id < 0 || worker_id >= static_cast<int>(slots_.size())) return {};
  return slots_[static_cast<std::size_t>(worker_id)]->transcript;
}

}  // namespace leanrl::repl
