#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "leanrl/curation/store.hpp"
#include "leanrl/curation/text_client.hpp"

namespace leanrl::curation {

LEANRL_DEFINE_ERROR(RaterUnavailable);

PromptTemplate default_rater_template();

// Last number in the text lying in [0, 1]; nullopt when there is none.
std::optional<double> parse_rating(const std::string& text);
int rating_to_bin(double rating, int bins);

struct BuildOptions {
  int bins = 10;
  std::uint64_t seed = 0;
  // Allowed (max - min) / mean spread of per-bin occupancy; reported only.
  double balance_tolerance = 0.1;
  int rating_parallelism = 4;
  PromptTemplate rater_template = default_rater_template();
  StoreOptions store;
};

struct BuildReport {
  std::size_t human_distinct = 0;
  std::size_t auto_count = 0;
  std::size_t human_entries = 0;
  std::size_t repeats = 0;
  std::vector<std::size_t> bin_occupancy;
  double bin_spread = 0.0;
  bool balanced = false;
};

nlohmann::json to_json(const BuildReport& r);

// Rates and bins every record, then brings the human side to exactly |auto|
// entries. Each distinct human record appears at least once when
// |human| <= |auto|; extra copies are drawn from whichever bin is currently
// least occupied, uniformly within it, and get ids "<id>#r<n>". When
// |human| > |auto| the human side is subsampled without replacement, again
// filling the least occupied bin first.
std::unique_ptr<ProblemStore> build_store(std::vector<ProblemRecord> human,
                                          std::vector<ProblemRecord> autos, RaterClient& rater,
                                          const BuildOptions& options, BuildReport* report = nullptr);

}  // namespace leanrl::curation
