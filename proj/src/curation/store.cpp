#include "leanrl/curation/store.hpp"

#include <algorithm>

#include "leanrl/common/jsonl.hpp"

namespace leanrl::curation {

using nlohmann::json;

std::string_view to_string(Provenance p) { return p == Provenance::human ? "human" : "auto"; }

std::string_view to_string(ProblemState s) {
  switch (s) {
    case ProblemState::active: return "active";
    case ProblemState::pruned: return "pruned";
    case ProblemState::flagged_error: return "flagged_error";
    case ProblemState::annotation_queue: return "annotation_queue";
  }
  return "active";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "human") return Provenance::human;
  if (s == "auto") return Provenance::auto_formalized;
  throw ParseError("unknown provenance '" + std::string(s) + "'");
}

ProblemState state_from_string(std::string_view s) {
  for (auto st : {ProblemState::active, ProblemState::pruned, ProblemState::flagged_error,
                  ProblemState::annotation_queue})
    if (to_string(st) == s) return st;
  throw ParseError("unknown problem state '" + std::string(s) + "'");
}

json to_json(const ProblemRecord& r) {
  json history = json::array();
  for (const auto& h : r.solve_history)
    history.push_back({{"iteration", h.iteration}, {"successes", h.successes}, {"attempts", h.attempts}});
  return json{{"problem_id", r.problem_id},
              {"source_id", r.source_id},
              {"statement", r.statement},
              {"informal_text", r.informal_text},
              {"provenance", to_string(r.provenance)},
              {"difficulty_bin", r.difficulty_bin},
              {"state", to_string(r.state)},
              {"solve_history", history}};
}

ProblemRecord record_from_json(const json& j) {
  ProblemRecord r;
  r.problem_id = j.at("problem_id").get<std::string>();
  r.source_id = j.value("source_id", r.problem_id);
  r.statement = j.value("statement", std::string());
  r.informal_text = j.value("informal_text", std::string());
  r.provenance = provenance_from_string(j.value("provenance", std::string("auto")));
  r.difficulty_bin = j.value("difficulty_bin", 0);
  r.state = state_from_string(j.value("state", std::string("active")));
  for (const auto& h : j.value("solve_history", json::array()))
    r.solve_history.push_back({h.at("iteration").get<std::int64_t>(), h.at("successes").get<int>(),
                               h.at("attempts").get<int>()});
  return r;
}

json to_json(const StoreEvent& e) {
  return json{{"seq", e.seq},         {"problem_id", e.problem_id}, {"from", to_string(e.from)},
              {"to", to_string(e.to)}, {"reason", e.reason}};
}

ProblemStore::ProblemStore(StoreOptions options) : options_(options) {}

void ProblemStore::add(ProblemRecord record) {
  std::unique_lock lk(mu_);
  if (index_.count(record.problem_id))
    throw InvalidArgument("duplicate problem_id '" + record.problem_id + "'");
  if (record.source_id.empty()) record.source_id = record.problem_id;
  while (record.solve_history.size() > options_.history_capacity) record.solve_history.pop_front();
  index_.emplace(record.problem_id, records_.size());
  records_.push_back(std::move(record));
}

ProblemRecord ProblemStore::get(const std::string& id) const {
  std::shared_lock lk(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownProblem("unknown problem '" + id + "'");
  return records_[it->second];
}

bool ProblemStore::contains(const std::string& id) const {
  std::shared_lock lk(mu_);
  return index_.count(id) != 0;
}

std::size_t ProblemStore::size() const {
  std::shared_lock lk(mu_);
  return records_.size();
}

std::vector<ProblemRecord> ProblemStore::snapshot() const {
  std::shared_lock lk(mu_);
  return records_;
}

std::vector<ProblemRecord> ProblemStore::in_state(ProblemState state) const {
  std::shared_lock lk(mu_);
  std::vector<ProblemRecord> out;
  for (const auto& r : records_)
    if (r.state == state) out.push_back(r);
  return out;
}

std::vector<std::string> ProblemStore::ids_in_state(ProblemState state) const {
  std::shared_lock lk(mu_);
  std::vector<std::string> out;
  for (const auto& r : records_)
    if (r.state == state) out.push_back(r.problem_id);
  return out;
}

std::size_t ProblemStore::count(ProblemState state) const {
  std::shared_lock lk(mu_);
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(),
                                                [&](const auto& r) { return r.state == state; }));
}

bool ProblemStore::allowed(ProblemState from, ProblemState to) const {
  if (from == ProblemState::active) return to != ProblemState::active;
  if (to != ProblemState::active) {
    // A flagged statement still goes to annotators.
    return from == ProblemState::flagged_error && to == ProblemState::annotation_queue;
  }
  if (from == ProblemState::annotation_queue) return true;
  if (from == ProblemState::pruned) return options_.allow_readmission;
  return false;
}

void ProblemStore::transition(const std::string& id, ProblemState to, const std::string& reason) {
  std::unique_lock lk(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownProblem("unknown problem '" + id + "'");
  auto& record = records_[it->second];
  if (record.state == to) return;
  if (!allowed(record.state, to))
    throw IllegalTransition(id + ": " + std::string(to_string(record.state)) + " -> " +
                            std::string(to_string(to)));
  StoreEvent e{events_.size() + 1, id, record.state, to, reason};
  record.state = to;
  events_.push_back(e);
  if (event_log_) append_jsonl(*event_log_, to_json(e));
}

void ProblemStore::record_solve(const std::string& id, SolveRecord solve) {
  std::unique_lock lk(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownProblem("unknown problem '" + id + "'");
  auto& history = records_[it->second].solve_history;
  history.push_back(solve);
  while (history.size() > options_.history_capacity) history.pop_front();
}

void ProblemStore::replace_statement(const std::string& id, std::string statement,
                                     std::string informal_text) {
  std::unique_lock lk(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownProblem("unknown problem '" + id + "'");
  auto& r = records_[it->second];
  r.statement = std::move(statement);
  if (!informal_text.empty()) r.informal_text = std::move(informal_text);
  r.solve_history.clear();
}

std::vector<StoreEvent> ProblemStore::events() const {
  std::shared_lock lk(mu_);
  return events_;
}

void ProblemStore::attach_event_log(const std::filesystem::path& path) {
  std::unique_lock lk(mu_);
  event_log_ = path;
}

void ProblemStore::save_snapshot(const std::filesystem::path& path) const {
  std::shared_lock lk(mu_);
  json j{{"version", 1}, {"records", json::array()}, {"event_count", events_.size()}};
  for (const auto& r : records_) j["records"].push_back(to_json(r));
  write_text_file(path, j.dump(1) + "\n");
}

std::unique_ptr<ProblemStore> ProblemStore::load_snapshot(const std::filesystem::path& path,
                                                          StoreOptions options) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  auto store = std::make_unique<ProblemStore>(options);
  for (const auto& r : j.at("records")) store->add(record_from_json(r));
  return store;
}

}  // namespace leanrl::curation
