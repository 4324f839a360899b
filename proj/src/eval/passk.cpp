#include "leanrl/eval/passk.hpp"

#include <optional>
#include <string>

namespace leanrl::eval {

namespace {

using u128 = unsigned __int128;

std::optional<u128> binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return u128{0};
  if (k > n - k) k = n - k;
  u128 r = 1;
  const u128 limit = ~u128{0};
  for (std::int64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i is exact at every step; guard the multiply.
    const auto f = static_cast<u128>(n - k + i);
    if (r > limit / f) return std::nullopt;
    r = r * f / static_cast<u128>(i);
  }
  return r;
}

double product_form(std::int64_t n, std::int64_t c, std::int64_t k) {
  double miss = 1.0;
  for (std::int64_t i = n - c + 1; i <= n; ++i)
    miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  return 1.0 - miss;
}

}  // namespace

double unbiased_pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (c < 0 || c > n) throw InvalidArgument("successes must lie in [0, n]");
  if (n < k)
    throw InsufficientAttempts("need at least k=" + std::to_string(k) + " attempts, have " +
                               std::to_string(n));
  if (c == 0) return 0.0;
  if (n - c < k) return 1.0;
  const auto total = binomial(n, k);
  if (!total) return product_form(n, c, k);
  const auto misses = *binomial(n - c, k);
  return static_cast<double>(*total - misses) / static_cast<double>(*total);
}

double cumulative_pass_at_k(const AttemptLedger& ledger, std::int64_t k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (ledger.statement_count() == 0) return 0.0;
  std::size_t solved = 0;
  for (const auto& [name, attempts] : ledger.statements()) {
    const auto first = ledger.first_success(name);
    if (first > 0 && first <= k) ++solved;
  }
  return static_cast<double>(solved) / static_cast<double>(ledger.statement_count());
}

double unbiased_pass_at_k(const AttemptLedger& ledger, std::int64_t k) {
  if (ledger.statement_count() == 0) return 0.0;
  double sum = 0.0;
  for (const auto& [name, attempts] : ledger.statements()) {
    std::int64_t c = 0;
    for (const auto& a : attempts) c += a.correct ? 1 : 0;
    sum += unbiased_pass_at_k(static_cast<std::int64_t>(attempts.size()), c, k);
  }
  return sum / static_cast<double>(ledger.statement_count());
}

PassAtK pass_at_k(const AttemptLedger& ledger, std::int64_t k) {
  return {cumulative_pass_at_k(ledger, k), unbiased_pass_at_k(ledger, k)};
}

}  // namespace leanrl::eval
