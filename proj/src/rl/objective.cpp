#include "leanrl/rl/objective.hpp"

#include <cmath>

namespace leanrl::rl {

double log_z_hat(std::span<const int> rewards) {
  if (rewards.empty()) return 0.0;
  long successes = 0;
  for (int r : rewards) successes += r;
  return static_cast<double>(successes) / static_cast<double>(rewards.size());
}

double objective_term(int reward, double log_z, double tau, double logp_new, double logp_old) {
  if (!std::isfinite(logp_new) || !std::isfinite(logp_old))
    throw NonFiniteLogProb("log-probabilities must be finite");
  return static_cast<double>(reward) - tau * log_z - tau * (logp_new - logp_old);
}

}  // namespace leanrl::rl
