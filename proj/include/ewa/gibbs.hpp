#pragma once

#include <functional>

#include "ewa/model.hpp"
#include "ewa/prior.hpp"
#include "ewa/types.hpp"

namespace ewa {

enum class LossKind { hinge, logistic };

// Inverse temperature, surrogate loss, and prior defining the pseudo-posterior
//   log target(beta) = -lambda * risk(beta) + log prior(beta) + const.
struct GibbsConfig {
  double lambda = 1.0;
  LossKind loss = LossKind::hinge;
  PriorConfig prior;
};

struct ValueGrad {
  double value = 0.0;
  CoefVector grad;
};

// Sampler-facing closure over one dataset and one GibbsConfig.  gradient may
// only be called where log_density is finite.  value_and_gradient shares the
// margin computation between the two; when the point is outside the prior
// support it returns value = -infinity with a zero grad that must not be used.
struct LogDensityTarget {
  std::function<double(const CoefVector&)> log_density;
  std::function<CoefVector(const CoefVector&)> gradient;
  std::function<ValueGrad(const CoefVector&)> value_and_gradient;
};

// -lambda * risk + log_prior_unnormalized; -infinity outside the support.
double log_target(const CoefVector& beta, const LabeledDataset& data, const GibbsConfig& cfg);

// -lambda * grad risk + grad log prior.  The hinge subgradient uses the strict
// indicator {margin < 1}, so a kink point contributes zero.  Throws outside
// the prior support.
CoefVector grad_log_target(const CoefVector& beta, const LabeledDataset& data,
                           const GibbsConfig& cfg);

// Bundles the two functions above over owned copies of data and cfg.
LogDensityTarget make_gibbs_target(LabeledDataset data, GibbsConfig cfg);

}  // namespace ewa
