#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/common/error.hpp"

namespace leanrl::eval {

LEANRL_DEFINE_ERROR(DuplicateName);
LEANRL_DEFINE_ERROR(MalformedStatement);

struct BenchmarkStatement {
  std::string name;
  std::string statement;
  std::string informal_text;
  std::set<std::string> subset_tags;
  bool corrected = false;
  bool operator==(const BenchmarkStatement&) const = default;
};

// Benchmark rows: {"name", "statement", "informal_text", "subset_tags"}.
// Patch rows: {"name", "corrected_statement"} and optionally
// "original_statement", which must then match the benchmark text.
BenchmarkStatement benchmark_statement_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchmarkStatement& s);

std::vector<BenchmarkStatement> load_benchmark(
    const std::filesystem::path& path,
    const std::optional<std::filesystem::path>& patch_path = std::nullopt);

// Same, from rows already in memory.
std::vector<BenchmarkStatement> build_benchmark(const std::vector<nlohmann::json>& rows,
                                                const std::vector<nlohmann::json>& patches);

std::vector<BenchmarkStatement> filter_subset(const std::vector<BenchmarkStatement>& bench,
                                              const std::string& tag);

}  // namespace leanrl::eval
