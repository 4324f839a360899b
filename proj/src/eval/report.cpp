#include "leanrl/eval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "leanrl/common/jsonl.hpp"
#include "leanrl/kernels/passk_kernels.hpp"

namespace leanrl::eval {

using nlohmann::json;

namespace {

std::vector<PassRow> pass_rows(const AttemptLedger& ledger,
                               const std::vector<const BenchmarkStatement*>& statements,
                               const std::vector<std::int64_t>& ks) {
  std::vector<std::int64_t> first;
  std::vector<kernels::AttemptCounts> counts;
  for (const auto* s : statements) {
    const auto& attempts = ledger.attempts(s->name);
    std::int64_t c = 0;
    for (const auto& a : attempts) c += a.correct ? 1 : 0;
    first.push_back(ledger.first_success(s->name));
    counts.push_back({static_cast<std::int64_t>(attempts.size()), c});
  }
  const auto curve = kernels::cumulative_curve_parallel(first, ks);

  std::vector<PassRow> rows;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    PassRow row;
    row.k = ks[j];
    row.cumulative = curve[j];
    for (const auto f : first) row.solved += (f > 0 && f <= ks[j]) ? 1 : 0;
    const bool enough = std::all_of(counts.begin(), counts.end(),
                                    [&](const auto& c) { return c.n >= ks[j]; });
    if (enough && !counts.empty()) {
      const auto values = kernels::unbiased_batch_parallel(counts, ks[j]);
      double sum = 0.0;
      for (const double v : values) sum += v;
      row.unbiased = sum / static_cast<double>(values.size());
    }
    rows.push_back(row);
  }
  return rows;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

const PassRow* row_for(const std::vector<PassRow>& rows, std::int64_t k) {
  for (const auto& r : rows)
    if (r.k == k) return &r;
  return nullptr;
}

std::string render_markdown(const PassAtKReport& r) {
  std::ostringstream out;
  out << "| Prover system | Model size | Sample budget | " << r.benchmark << "-test |\n";
  out << "| --- | --- | --- | --- |\n";
  for (const auto& row : r.rows)
    out << "| " << r.system << " | " << r.model_size << " | " << row.k << " | "
        << format_percent(row.cumulative) << " |\n";
  if (r.subsets.empty()) return out.str();

  out << "\n| Benchmark | Sample budget | " << r.benchmark;
  for (const auto& s : r.subsets) out << " | " << r.benchmark << '/' << s.tag;
  out << " |\n| --- | --- | ---";
  for (std::size_t i = 0; i < r.subsets.size(); ++i) out << " | ---";
  out << " |\n";
  for (const auto& row : r.rows) {
    out << "| " << r.system << " | " << row.k << " | " << format_percent(row.cumulative);
    for (const auto& s : r.subsets) {
      const auto* sr = row_for(s.rows, row.k);
      out << " | " << (sr ? format_percent(sr->cumulative) : "-");
    }
    out << " |\n";
  }
  return out.str();
}

void csv_rows(std::ostringstream& out, const PassAtKReport& r, const std::string& subset,
              std::int64_t statements, const std::vector<PassRow>& rows) {
  for (const auto& row : rows) {
    out << r.system << ',' << r.model_size << ',' << r.benchmark << ',' << subset << ','
        << statements << ',' << row.k << ',' << row.solved << ',' << fmt_double(row.cumulative)
        << ',' << (row.unbiased ? fmt_double(*row.unbiased) : "") << '\n';
  }
}

std::string render_csv(const PassAtKReport& r) {
  std::ostringstream out;
  out << "system,model_size,benchmark,subset,statements,sample_budget,solved,cumulative,unbiased\n";
  csv_rows(out, r, "all", r.statements, r.rows);
  for (const auto& s : r.subsets) csv_rows(out, r, s.tag, s.statements, s.rows);
  return out.str();
}

json rows_json(const std::vector<PassRow>& rows) {
  json a = json::array();
  for (const auto& row : rows) {
    a.push_back({{"k", row.k},
                 {"solved", row.solved},
                 {"cumulative", row.cumulative},
                 {"unbiased", row.unbiased ? json(*row.unbiased) : json(nullptr)}});
  }
  return a;
}

std::vector<PassRow> rows_from_json(const json& a) {
  std::vector<PassRow> rows;
  for (const auto& j : a) {
    PassRow row;
    row.k = j.at("k").get<std::int64_t>();
    row.solved = j.value("solved", std::int64_t{0});
    row.cumulative = j.at("cumulative").get<double>();
    if (j.contains("unbiased") && !j["unbiased"].is_null()) row.unbiased = j["unbiased"].get<double>();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string_view to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
    case ReportFormat::markdown_table: return "markdown_table";
  }
  return "csv";
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  if (s == "markdown_table" || s == "markdown" || s == "md") return ReportFormat::markdown_table;
  throw InvalidArgument("unknown report format '" + std::string(s) + "'");
}

PassAtKReport compute_report(const AttemptLedger& ledger,
                             const std::vector<BenchmarkStatement>& bench,
                             const std::vector<std::int64_t>& ks, const ReportMeta& meta) {
  for (const auto k : ks)
    if (k < 1) throw InvalidArgument("k must be >= 1");
  PassAtKReport r;
  r.system = meta.system;
  r.model_size = meta.model_size;
  r.benchmark = meta.benchmark;

  std::vector<const BenchmarkStatement*> all;
  std::vector<std::string> names;
  for (const auto& s : bench) {
    all.push_back(&s);
    names.push_back(s.name);
  }
  r.statements = static_cast<std::int64_t>(all.size());
  r.mean_token_length = ledger.subset(names).mean_token_length();
  r.rows = pass_rows(ledger, all, ks);

  for (const auto& tag : meta.subset_tags) {
    std::vector<const BenchmarkStatement*> members;
    for (const auto* s : all)
      if (s->subset_tags.count(tag)) members.push_back(s);
    if (members.empty()) continue;
    r.subsets.push_back({tag, static_cast<std::int64_t>(members.size()), pass_rows(ledger, members, ks)});
  }
  return r;
}

std::vector<std::int64_t> default_ks(const AttemptLedger& ledger) {
  std::int64_t most = 0;
  for (const auto& [_, v] : ledger.statements()) most = std::max(most, static_cast<std::int64_t>(v.size()));
  std::vector<std::int64_t> ks;
  for (std::int64_t k = 1; k <= most; k *= 2) ks.push_back(k);
  if (ks.empty()) ks.push_back(1);
  else if (ks.back() != most) ks.push_back(most);
  return ks;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
  return buf;
}

std::string render_report(const PassAtKReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::csv: return render_csv(report);
    case ReportFormat::json: return to_json(report).dump(2) + "\n";
    case ReportFormat::markdown_table: return render_markdown(report);
  }
  return {};
}

void emit_report(const PassAtKReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  write_text_file(path, render_report(report, format));
}

json to_json(const PassAtKReport& r) {
  json subsets = json::array();
  for (const auto& s : r.subsets)
    subsets.push_back({{"tag", s.tag}, {"statements", s.statements}, {"rows", rows_json(s.rows)}});
  return json{{"system", r.system},
              {"model_size", r.model_size},
              {"benchmark", r.benchmark},
              {"statements", r.statements},
              {"mean_token_length", r.mean_token_length},
              {"rows", rows_json(r.rows)},
              {"subsets", subsets}};
}

PassAtKReport report_from_json(const json& j) {
  try {
    PassAtKReport r;
    r.system = j.at("system").get<std::string>();
    r.model_size = j.at("model_size").get<std::string>();
    r.benchmark = j.value("benchmark", std::string("miniF2F"));
    r.statements = j.at("statements").get<std::int64_t>();
    r.mean_token_length = j.value("mean_token_length", 0.0);
    r.rows = rows_from_json(j.at("rows"));
    for (const auto& s : j.value("subsets", json::array()))
      r.subsets.push_back({s.at("tag").get<std::string>(), s.at("statements").get<std::int64_t>(),
                           rows_from_json(s.at("rows"))});
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

PassAtKReport load_report(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace leanrl::eval
