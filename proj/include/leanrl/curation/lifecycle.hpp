#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/curation/store.hpp"

namespace leanrl::curation {

struct PruneOptions {
  int window = 2;
  double threshold = 7.0 / 8.0;
};

// Active records whose last `window` solve records all reach the threshold.
std::vector<std::string> adaptive_prune(ProblemStore& store, const PruneOptions& options = {});

// pruned -> active; the store must allow readmission. Empty ids means all.
std::vector<std::string> readmit(ProblemStore& store, const std::vector<std::string>& ids = {});

struct AnnotationCriteria {
  bool include_flagged = true;
  // Active records with zero successes in each of their last `unsolved_span`
  // solve records. 0 disables the rule.
  int unsolved_span = 5;
};

std::vector<std::string> route_to_annotation(ProblemStore& store,
                                             const AnnotationCriteria& criteria = {});

// Rows: {"problem_id", "statement", "informal_text", "reason"}.
struct AnnotationRow {
  std::string problem_id;
  std::string statement;
  std::string informal_text;
  std::string reason;
};

nlohmann::json to_json(const AnnotationRow& r);
AnnotationRow annotation_row_from_json(const nlohmann::json& j);

std::vector<AnnotationRow> annotation_queue(const ProblemStore& store);
void export_annotations(const ProblemStore& store, const std::filesystem::path& path);
// Applies annotated statements and returns the queued records to active.
std::vector<std::string> import_annotations(ProblemStore& store, const std::filesystem::path& path);

}  // namespace leanrl::curation
