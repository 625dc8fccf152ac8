#pragma once

#include <cstdint>
#include <vector>

#include "ewa/gibbs.hpp"
#include "ewa/rng.hpp"
#include "ewa/types.hpp"

namespace ewa {

struct SamplerConfig {
  double step_size = 1e-3;        // h
  std::int64_t n_iter = 30000;
  std::int64_t burn_in = 5000;    // must be < n_iter
  bool adapt = false;             // MALA only; step size frozen after burn-in
  double target_acceptance = 0.5;
  std::int64_t thin = 1;          // store every thin-th iterate
  std::uint64_t seed = 0;
};

// One realized chain.  samples holds every thin-th iterate of the full run,
// burn-in segment included; burn_in is the index of the first stored sample
// past the configured burn-in.  step_size_trace has one entry per iteration.
// acceptance_rate is the post-burn-in acceptance fraction for MALA and 1.0
// by convention for LMC.
struct Chain {
  std::vector<CoefVector> samples;
  std::int64_t burn_in = 0;
  double acceptance_rate = 1.0;
  std::vector<double> step_size_trace;
  std::uint64_t seed = 0;
};

// Unadjusted Langevin: beta <- beta + h * grad log target + sqrt(2h) * noise.
// A step that leaves the support or produces a non-finite target is rolled
// back and retried with h halved for that step only.
Chain lmc_run(const LogDensityTarget& target, const CoefVector& init, const SamplerConfig& cfg);

// Metropolis-adjusted Langevin with the Gaussian transition density
//   log q(x'|x) = -||x' - x - h grad(x)||^2 / (4h) + const.
// Proposals outside the support are always rejected.  With cfg.adapt, h is
// scaled by 1.1 or 0.9 every 100 iterations during burn-in whenever the
// acceptance rate over the last 100 iterations leaves target_acceptance
// +- 0.05; h is frozen after burn-in.
Chain mala_run(const LogDensityTarget& target, const CoefVector& init, const SamplerConfig& cfg);

// Log acceptance ratio for proposal y from x given target values/gradients at
// both points; the acceptance probability is exp(min(0, ratio)).
double mala_log_accept_ratio(const CoefVector& x, const ValueGrad& at_x, const CoefVector& y,
                             const ValueGrad& at_y, double h);

// Coordinate-wise mean of samples with index >= chain.burn_in.
CoefVector posterior_mean(const Chain& chain);

// Uniform draw from the post-burn-in samples.
CoefVector sample_classifier(const Chain& chain, rng::Engine& engine);

}  // namespace ewa
