#pragma once

#include <span>

#include "leanrl/common/error.hpp"

namespace leanrl::rl {

LEANRL_DEFINE_ERROR(NonFiniteLogProb);

// Empirical mean of binary rewards; the group's estimate of log Z.
// An empty span yields 0.
double log_z_hat(std::span<const int> rewards);

// Per-sample objective term
//   r - tau * log_Z_hat - tau * (logp_new - logp_old)
// where the log-ratio is log pi_theta / pi_old of the whole completion.
// Throws NonFiniteLogProb if either log-prob is NaN or infinite.
double objective_term(int reward, double log_z_hat, double tau, double logp_new, double logp_old);

}  // namespace leanrl::rl
