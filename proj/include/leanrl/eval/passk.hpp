#pragma once

#include <cstdint>

#include "leanrl/common/error.hpp"
#include "leanrl/eval/ledger.hpp"

namespace leanrl::eval {

LEANRL_DEFINE_ERROR(InsufficientAttempts);

// 1 - C(n-c, k) / C(n, k), evaluated as (C(n,k) - C(n-c,k)) / C(n,k) with
// exact 128-bit binomials so that small cases equal a subset count divided
// by the subset total. Falls back to the product form when C(n,k) does not
// fit. Throws InsufficientAttempts when n < k.
double unbiased_pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k);

// Fraction of statements with a success among their first k attempts.
double cumulative_pass_at_k(const AttemptLedger& ledger, std::int64_t k);
// Mean of the per-statement unbiased estimates over all n attempts.
double unbiased_pass_at_k(const AttemptLedger& ledger, std::int64_t k);

struct PassAtK {
  double cumulative = 0.0;
  double unbiased = 0.0;
};

PassAtK pass_at_k(const AttemptLedger& ledger, std::int64_t k);

}  // namespace leanrl::eval
