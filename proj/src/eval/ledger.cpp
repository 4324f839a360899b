#include "leanrl/eval/ledger.hpp"

#include <algorithm>

#include "leanrl/common/jsonl.hpp"

namespace leanrl::eval {

using nlohmann::json;

std::int64_t AttemptLedger::append(const std::string& name, bool correct,
                                   std::int64_t token_length) {
  auto& v = by_name_[name];
  const auto index = static_cast<std::int64_t>(v.size()) + 1;
  v.push_back({index, correct, token_length});
  return index;
}

void AttemptLedger::insert(const std::string& name, const Attempt& attempt) {
  auto& v = by_name_[name];
  if (attempt.attempt_index != static_cast<std::int64_t>(v.size()) + 1)
    throw LedgerCorrupt("attempt indices for '" + name + "' are not dense from 1 (got " +
                        std::to_string(attempt.attempt_index) + ")");
  v.push_back(attempt);
}

const std::vector<Attempt>& AttemptLedger::attempts(const std::string& name) const {
  static const std::vector<Attempt> none;
  const auto it = by_name_.find(name);
  return it == by_name_.end() ? none : it->second;
}

std::size_t AttemptLedger::attempt_count() const {
  std::size_t n = 0;
  for (const auto& [_, v] : by_name_) n += v.size();
  return n;
}

std::int64_t AttemptLedger::min_attempts() const {
  if (by_name_.empty()) return 0;
  std::size_t m = by_name_.begin()->second.size();
  for (const auto& [_, v] : by_name_) m = std::min(m, v.size());
  return static_cast<std::int64_t>(m);
}

std::int64_t AttemptLedger::first_success(const std::string& name) const {
  for (const auto& a : attempts(name))
    if (a.correct) return a.attempt_index;
  return 0;
}

double AttemptLedger::mean_token_length() const {
  const auto n = attempt_count();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (const auto& [_, v] : by_name_)
    for (const auto& a : v) sum += static_cast<double>(a.token_length);
  return sum / static_cast<double>(n);
}

AttemptLedger AttemptLedger::subset(const std::vector<std::string>& names) const {
  AttemptLedger out;
  for (const auto& n : names) {
    if (const auto it = by_name_.find(n); it != by_name_.end()) out.by_name_[n] = it->second;
  }
  return out;
}

json ledger_row(const std::string& name, const Attempt& a) {
  return json{{"name", name},
              {"attempt_index", a.attempt_index},
              {"correct", a.correct},
              {"token_length", a.token_length}};
}

AttemptLedger load_ledger(const std::filesystem::path& path) {
  std::map<std::string, std::vector<Attempt>> rows;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      rows[j.at("name").get<std::string>()].push_back(
          {j.at("attempt_index").get<std::int64_t>(), j.at("correct").get<bool>(),
           j.value("token_length", std::int64_t{0})});
    } catch (const json::exception& e) {
      throw LedgerCorrupt(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  // Concurrent writers interleave rows; order within a statement is restored
  // by index before the density check.
  AttemptLedger ledger;
  for (auto& [name, v] : rows) {
    std::sort(v.begin(), v.end(),
              [](const Attempt& a, const Attempt& b) { return a.attempt_index < b.attempt_index; });
    for (const auto& a : v) ledger.insert(name, a);
  }
  return ledger;
}

void save_ledger(const std::filesystem::path& path, const AttemptLedger& ledger) {
  std::vector<json> rows;
  for (const auto& [name, v] : ledger.statements())
    for (const auto& a : v) rows.push_back(ledger_row(name, a));
  write_jsonl(path, rows);
}

}  // namespace leanrl::eval
