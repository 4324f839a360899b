#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/eval/benchmark.hpp"
#include "leanrl/eval/ledger.hpp"

namespace leanrl::eval {

enum class ReportFormat { csv, json, markdown_table };

std::string_view to_string(ReportFormat f);
ReportFormat report_format_from_string(std::string_view s);

struct PassRow {
  std::int64_t k = 0;
  std::int64_t solved = 0;  // statements solved within the first k attempts
  double cumulative = 0.0;
  std::optional<double> unbiased;  // absent when some statement has < k attempts
  bool operator==(const PassRow&) const = default;
};

struct SubsetReport {
  std::string tag;
  std::int64_t statements = 0;
  std::vector<PassRow> rows;
  bool operator==(const SubsetReport&) const = default;
};

struct PassAtKReport {
  std::string system;
  std::string model_size;
  std::string benchmark = "miniF2F";
  std::int64_t statements = 0;
  double mean_token_length = 0.0;
  std::vector<PassRow> rows;
  std::vector<SubsetReport> subsets;
  bool operator==(const PassAtKReport&) const = default;
};

struct ReportMeta {
  std::string system = "leanrl";
  std::string model_size = "-";
  std::string benchmark = "miniF2F";
  std::vector<std::string> subset_tags = {"IMO", "AIME"};
};

// Every benchmark statement counts, attempted or not; unattempted ones are
// unsolved. Ledger names outside the benchmark are ignored.
PassAtKReport compute_report(const AttemptLedger& ledger,
                             const std::vector<BenchmarkStatement>& bench,
                             const std::vector<std::int64_t>& ks, const ReportMeta& meta = {});

// Default ks: powers of two up to the smallest per-statement attempt count.
std::vector<std::int64_t> default_ks(const AttemptLedger& ledger);

// Percentage with two decimals, e.g. 197/244 -> "80.74%".
std::string format_percent(double fraction);

std::string render_report(const PassAtKReport& report, ReportFormat format);
void emit_report(const PassAtKReport& report, ReportFormat format,
                 const std::filesystem::path& path);

nlohmann::json to_json(const PassAtKReport& r);
PassAtKReport report_from_json(const nlohmann::json& j);
PassAtKReport load_report(const std::filesystem::path& path);

}  // namespace leanrl::eval
