#include "leanrl/kernels/passk_kernels.hpp"

#include "leanrl/eval/passk.hpp"

namespace leanrl::kernels {

std::vector<double> unbiased_batch_serial(std::span<const AttemptCounts> counts, std::int64_t k) {
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    out[i] = eval::unbiased_pass_at_k(counts[i].n, counts[i].c, k);
  return out;
}

std::vector<double> unbiased_batch_parallel(std::span<const AttemptCounts> counts,
                                            std::int64_t k) {
  std::vector<double> out(counts.size());
  const auto size = static_cast<std::int64_t>(counts.size());
  // Exceptions cannot leave an OpenMP region; check preconditions up front.
  for (const auto& c : counts)
    if (c.n < k) throw eval::InsufficientAttempts("statement has fewer than k attempts");
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < size; ++i) out[i] = eval::unbiased_pass_at_k(counts[i].n, counts[i].c, k);
  return out;
}

std::vector<double> cumulative_curve_serial(std::span<const std::int64_t> first_success,
                                            std::span<const std::int64_t> ks) {
  std::vector<double> out(ks.size(), 0.0);
  if (first_success.empty()) return out;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    std::int64_t solved = 0;
    for (const auto f : first_success) solved += (f > 0 && f <= ks[j]) ? 1 : 0;
    out[j] = static_cast<double>(solved) / static_cast<double>(first_success.size());
  }
  return out;
}

std::vector<double> cumulative_curve_parallel(std::span<const std::int64_t> first_success,
                                              std::span<const std::int64_t> ks) {
  std::vector<double> out(ks.size(), 0.0);
  if (first_success.empty()) return out;
  const auto size = static_cast<std::int64_t>(first_success.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const std::int64_t k = ks[j];
    std::int64_t solved = 0;
#pragma omp parallel for reduction(+ : solved) schedule(static)
    for (std::int64_t i = 0; i < size; ++i)
      solved += (first_success[i] > 0 && first_success[i] <= k) ? 1 : 0;
    out[j] = static_cast<double>(solved) / static_cast<double>(size);
  }
  return out;
}

}  // namespace leanrl::kernels
