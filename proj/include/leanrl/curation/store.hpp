#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/common/error.hpp"

namespace leanrl::curation {

LEANRL_DEFINE_ERROR(UnknownProblem);
LEANRL_DEFINE_ERROR(IllegalTransition);

enum class Provenance { human, auto_formalized };
enum class ProblemState { active, pruned, flagged_error, annotation_queue };

std::string_view to_string(Provenance p);
std::string_view to_string(ProblemState s);
Provenance provenance_from_string(std::string_view s);
ProblemState state_from_string(std::string_view s);

struct SolveRecord {
  std::int64_t iteration = 0;
  int successes = 0;
  int attempts = 0;
  double fraction() const { return attempts == 0 ? 0.0 : double(successes) / double(attempts); }
  bool operator==(const SolveRecord&) const = default;
};

struct ProblemRecord {
  std::string problem_id;
  std::string source_id;  // original id; differs from problem_id for resampled copies
  std::string statement;  // Lean source ending in a placeholder proof
  std::string informal_text;
  Provenance provenance = Provenance::auto_formalized;
  int difficulty_bin = 0;
  ProblemState state = ProblemState::active;
  std::deque<SolveRecord> solve_history;  // oldest first, bounded

  bool operator==(const ProblemRecord&) const = default;
};

nlohmann::json to_json(const ProblemRecord& r);
ProblemRecord record_from_json(const nlohmann::json& j);

struct StoreEvent {
  std::uint64_t seq = 0;
  std::string problem_id;
  ProblemState from = ProblemState::active;
  ProblemState to = ProblemState::active;
  std::string reason;
};
nlohmann::json to_json(const StoreEvent& e);

struct StoreOptions {
  std::size_t history_capacity = 16;
  // Allows pruned -> active. Annotation import (annotation_queue -> active)
  // is always allowed.
  bool allow_readmission = false;
};

// The RL problem set. Every record is in exactly one state; state changes go
// through transition() and are logged append-only (in memory, and to the
// event log file when one is attached). One writer at a time; readers get
// copies.
class ProblemStore {
 public:
  explicit ProblemStore(StoreOptions options = {});

  // Adds a new active record. Throws InvalidArgument on a duplicate id.
  void add(ProblemRecord record);

  ProblemRecord get(const std::string& problem_id) const;
  bool contains(const std::string& problem_id) const;
  std::size_t size() const;
  std::vector<ProblemRecord> snapshot() const;
  std::vector<ProblemRecord> in_state(ProblemState state) const;
  std::vector<std::string> ids_in_state(ProblemState state) const;
  std::size_t count(ProblemState state) const;

  void transition(const std::string& problem_id, ProblemState to, const std::string& reason);
  void record_solve(const std::string& problem_id, SolveRecord solve);
  void replace_statement(const std::string& problem_id, std::string statement,
                         std::string informal_text);

  std::vector<StoreEvent> events() const;
  const StoreOptions& options() const { return options_; }

  void attach_event_log(const std::filesystem::path& path);
  void save_snapshot(const std::filesystem::path& path) const;
  static std::unique_ptr<ProblemStore> load_snapshot(const std::filesystem::path& path, StoreOptions options = {});

 private:
  bool allowed(ProblemState from, ProblemState to) const;

  StoreOptions options_;
  mutable std::shared_mutex mu_;
  std::vector<ProblemRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<StoreEvent> events_;
  std::optional<std::filesystem::path> event_log_;
};

}  // namespace leanrl::curation
