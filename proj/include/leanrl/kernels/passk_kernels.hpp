#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace leanrl::kernels {

struct AttemptCounts {
  std::int64_t n = 0;  // attempts
  std::int64_t c = 0;  // successes
};

// Per-statement unbiased pass@k for a whole benchmark.
std::vector<double> unbiased_batch_serial(std::span<const AttemptCounts> counts, std::int64_t k);
std::vector<double> unbiased_batch_parallel(std::span<const AttemptCounts> counts, std::int64_t k);

// first_success[i] is the 1-based index of statement i's first correct
// attempt, or 0 if none. Returns the cumulative pass rate for each k.
std::vector<double> cumulative_curve_serial(std::span<const std::int64_t> first_success,
                                            std::span<const std::int64_t> ks);
std::vector<double> cumulative_curve_parallel(std::span<const std::int64_t> first_success,
                                              std::span<const std::int64_t> ks);

}  // namespace leanrl::kernels
