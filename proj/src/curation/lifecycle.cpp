#include "leanrl/curation/lifecycle.hpp"

#include <algorithm>

#include "leanrl/common/jsonl.hpp"

namespace leanrl::curation {

using nlohmann::json;

namespace {

template <typename Pred>
bool last_n_all(const std::deque<SolveRecord>& history, int n, Pred pred) {
  if (n < 1 || history.size() < static_cast<std::size_t>(n)) return false;
  return std::all_of(history.end() - n, history.end(), pred);
}

}  // namespace

std::vector<std::string> adaptive_prune(ProblemStore& store, const PruneOptions& options) {
  if (options.window < 1) throw InvalidArgument("prune window must be >= 1");
  std::vector<std::string> pruned;
  for (const auto& r : store.in_state(ProblemState::active)) {
    if (last_n_all(r.solve_history, options.window,
                   [&](const SolveRecord& s) { return s.attempts > 0 && s.fraction() >= options.threshold; })) {
      store.transition(r.problem_id, ProblemState::pruned, "consistently_solved");
      pruned.push_back(r.problem_id);
    }
  }
  return pruned;
}

std::vector<std::string> readmit(ProblemStore& store, const std::vector<std::string>& ids) {
  const auto targets = ids.empty() ? store.ids_in_state(ProblemState::pruned) : ids;
  for (const auto& id : targets) store.transition(id, ProblemState::active, "readmitted");
  return targets;
}

std::vector<std::string> route_to_annotation(ProblemStore& store, const AnnotationCriteria& criteria) {
  std::vector<std::string> queued;
  if (criteria.include_flagged) {
    for (const auto& id : store.ids_in_state(ProblemState::flagged_error)) {
      store.transition(id, ProblemState::annotation_queue, "flagged_error");
      queued.push_back(id);
    }
  }
  if (criteria.unsolved_span > 0) {
    for (const auto& r : store.in_state(ProblemState::active)) {
      if (last_n_all(r.solve_history, criteria.unsolved_span,
                     [](const SolveRecord& s) { return s.successes == 0; })) {
        store.transition(r.problem_id, ProblemState::annotation_queue, "unsolved_span");
        queued.push_back(r.problem_id);
      }
    }
  }
  return queued;
}

json to_json(const AnnotationRow& r) {
  return json{{"problem_id", r.problem_id},
              {"statement", r.statement},
              {"informal_text", r.informal_text},
              {"reason", r.reason}};
}

AnnotationRow annotation_row_from_json(const json& j) {
  try {
    return {j.at("problem_id").get<std::string>(), j.at("statement").get<std::string>(),
            j.value("informal_text", std::string()), j.value("reason", std::string())};
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad annotation row: ") + e.what());
  }
}

std::vector<AnnotationRow> annotation_queue(const ProblemStore& store) {
  std::unordered_map<std::string, std::string> reason;
  for (const auto& e : store.events())
    if (e.to == ProblemState::annotation_queue) reason[e.problem_id] = e.reason;
  std::vector<AnnotationRow> rows;
  for (const auto& r : store.in_state(ProblemState::annotation_queue))
    rows.push_back({r.problem_id, r.statement, r.informal_text, reason[r.problem_id]});
  return rows;
}

void export_annotations(const ProblemStore& store, const std::filesystem::path& path) {
  std::vector<json> rows;
  for (const auto& r : annotation_queue(store)) rows.push_back(to_json(r));
  write_jsonl(path, rows);
}

std::vector<std::string> import_annotations(ProblemStore& store, const std::filesystem::path& path) {
  std::vector<AnnotationRow> rows;
  for (const auto& j : read_jsonl(path)) rows.push_back(annotation_row_from_json(j));
  // Validate everything first so a bad row leaves the store untouched.
  for (const auto& row : rows) {
    if (store.get(row.problem_id).state != ProblemState::annotation_queue)
      throw IllegalTransition("'" + row.problem_id + "' is not in the annotation queue");
  }
  std::vector<std::string> ids;
  for (const auto& row : rows) {
    store.replace_statement(row.problem_id, row.statement, row.informal_text);
    store.transition(row.problem_id, ProblemState::active, "annotation_import");
    ids.push_back(row.problem_id);
  }
  return ids;
}

}  // namespace leanrl::curation
