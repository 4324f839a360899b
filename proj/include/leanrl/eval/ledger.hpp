#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leanrl/common/error.hpp"

namespace leanrl::eval {

LEANRL_DEFINE_ERROR(LedgerCorrupt);

struct Attempt {
  std::int64_t attempt_index = 0;  // 1-based, dense per statement
  bool correct = false;
  std::int64_t token_length = 0;
  bool operator==(const Attempt&) const = default;
};

// Ledger rows: {"name", "attempt_index", "correct", "token_length"}.
// Attempts of one statement are treated as exchangeable draws.
class AttemptLedger {
 public:
  // Appends with the next dense index and returns it.
  std::int64_t append(const std::string& name, bool correct, std::int64_t token_length);
  // Inserts a row read from disk; indices must arrive dense from 1.
  void insert(const std::string& name, const Attempt& attempt);
  void ensure(const std::string& name) { by_name_[name]; }

  const std::map<std::string, std::vector<Attempt>>& statements() const { return by_name_; }
  const std::vector<Attempt>& attempts(const std::string& name) const;
  std::size_t statement_count() const { return by_name_.size(); }
  std::size_t attempt_count() const;
  std::int64_t min_attempts() const;
  // 0 when the statement was never solved.
  std::int64_t first_success(const std::string& name) const;
  double mean_token_length() const;

  AttemptLedger subset(const std::vector<std::string>& names) const;
  bool operator==(const AttemptLedger&) const = default;

 private:
  std::map<std::string, std::vector<Attempt>> by_name_;
};

nlohmann::json ledger_row(const std::string& name, const Attempt& a);
AttemptLedger load_ledger(const std::filesystem::path& path);
// Rows sorted by name then attempt index.
void save_ledger(const std::filesystem::path& path, const AttemptLedger& ledger);

}  // namespace leanrl::eval
