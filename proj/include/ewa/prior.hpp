#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ewa/rng.hpp"
#include "ewa/types.hpp"

namespace ewa {

// Heavy-tailed sparsity prior: unnormalized density
//   pi(beta) proportional to prod_i 1/(tau^2 + beta_i^2)^2
// restricted to the l1 ball of radius c1.
struct PriorConfig {
  double tau = 1.0;
  double c1 = 1e6;
};

// Returns a warning message when c1 <= 2*d*tau, the regime where the prior
// support is too small for the oracle-inequality theory.  Not an error.
std::optional<std::string> theory_warning(const PriorConfig& cfg, Index d);

// -2 sum_i log(tau^2 + beta_i^2) when ||beta||_1 <= c1, -infinity otherwise.
// The normalizing constant is never added.
double log_prior_unnormalized(const CoefVector& beta, const PriorConfig& cfg);

// Component i: -4*beta_i / (tau^2 + beta_i^2).  Throws NumericalError when
// beta lies outside the support, where the density is zero.
CoefVector grad_log_prior(const CoefVector& beta, const PriorConfig& cfg);

// Draws d iid components from the exact per-coordinate law of the prior,
// (tau/sqrt(3)) * t_3, and rejects whole vectors until ||beta||_1 <= c1.
// Throws NumericalError after 10^6 rejected attempts.
CoefVector sample_prior(const PriorConfig& cfg, Index d, rng::Engine& engine);

}  // namespace ewa
