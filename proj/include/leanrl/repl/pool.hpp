#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leanrl/common/error.hpp"
#include "leanrl/repl/header_key.hpp"
#include "leanrl/repl/lru_cache.hpp"
#include "leanrl/repl/process.hpp"
#include "leanrl/repl/protocol.hpp"

namespace leanrl::repl {

// Raised by submit() once shutdown() has been called, or when no worker can
// be kept alive.
LEANRL_DEFINE_ERROR(PoolShutdown);

struct PoolOptions {
  LaunchSpec launch;
  int worker_count = 1;
  std::size_t cache_capacity = 8;  // environments per worker
  std::chrono::milliseconds default_timeout{60000};
  int crash_retries = 1;
  std::chrono::milliseconds throughput_window{10000};
  bool record_transcripts = false;
};

enum class WorkerState { idle, busy, dead };

enum class OutcomeKind { ok, timeout, crash };

struct ReplOutcome {
  OutcomeKind kind = OutcomeKind::ok;
  ReplResponse response;
  bool cache_hit = false;
  int worker_id = -1;
  int attempts = 1;
};

struct PoolMetrics {
  double throughput_per_s = 0.0;
  double cache_hit_rate = 0.0;
  int live_workers = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t crashes = 0;
  std::uint64_t submissions = 0;
  std::uint64_t completed = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t spawn_failures = 0;
};

struct WorkerSnapshot {
  int worker_id = 0;
  WorkerState state = WorkerState::dead;
  std::uint64_t commands_served = 0;
  std::vector<ImportHeaderKey> cached_keys;  // most recent first
  std::chrono::system_clock::time_point spawn_time;
};

// A pool of REPL subprocesses with one environment cache per worker.
//
// Env handles are process-local, so caching is per worker; dispatch prefers
// an idle worker already holding the submission's header (affinity), then the
// least-used idle worker. Safe for concurrent submit() from many threads; the
// calling thread drives the worker's I/O while it owns the worker.
class ReplPool {
 public:
  // Starts all workers. Workers that fail to start are left dead and retried
  // on demand; if none start, throws SpawnFailure.
  explicit ReplPool(PoolOptions options);
  ~ReplPool();

  ReplPool(const ReplPool&) = delete;
  ReplPool& operator=(const ReplPool&) = delete;

  ReplOutcome submit(std::string_view source,
                     std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  PoolMetrics metrics() const;
  std::vector<WorkerSnapshot> workers() const;
  std::size_t queue_depth() const;
  bool alive() const;
  int worker_count() const { return static_cast<int>(slots_.size()); }
  std::chrono::milliseconds default_timeout() const { return options_.default_timeout; }

  // Raw request frames written to a worker since it was last (re)spawned.
  // Requires record_transcripts.
  std::vector<std::string> transcript(int worker_id) const;

  // Kills every worker; blocked and later submissions raise PoolShutdown.
  void shutdown();

 private:
  struct Slot {
    int id = 0;
    WorkerState state = WorkerState::dead;
    std::unique_ptr<ReplProcess> process;
    LruCache<ImportHeaderKey, EnvHandle, ImportHeaderKeyHash> envs;
    std::uint64_t served = 0;
    std::chrono::system_clock::time_point spawn_time;
    std::vector<std::string> transcript;
    explicit Slot(std::size_t capacity) : envs(capacity) {}
  };

  enum class RunStatus { ok, timeout, crash };

  Slot& acquire(const ImportHeaderKey& key, int avoid_worker);
  void release(Slot& slot, bool count_served);
  bool respawn(Slot& slot);  // called with the slot owned (busy), lock not held
  RunStatus run_on(Slot& slot, const SplitSource& split, std::chrono::milliseconds timeout,
                   ReplResponse& out, bool& cache_hit);
  bool exchange(Slot& slot, const std::string& frame,
                std::chrono::steady_clock::time_point deadline, ReplResponse& out,
                RunStatus& status);
  void record_completion();

  PoolOptions options_;
  std::vector<std::unique_ptr<Slot>> slots_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool shutdown_ = false;
  std::size_t waiting_ = 0;

  std::uint64_t submissions_ = 0;
  std::uint64_t completed_ = 0;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t timeouts_ = 0;
  std::uint64_t crashes_ = 0;
  std::uint64_t spawn_failures_ = 0;
  std::deque<std::chrono::steady_clock::time_point> recent_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace leanrl::repl
