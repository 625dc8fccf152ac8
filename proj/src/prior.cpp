#include "ewa/prior.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace ewa {

namespace {

void require_valid(const PriorConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("prior tau must be positive");
  if (!(cfg.c1 > 0.0)) throw std::invalid_argument("prior c1 must be positive");
}

bool in_support(const CoefVector& beta, const PriorConfig& cfg) {
  return beta.lpNorm<1>() <= cfg.c1;
}

}  // namespace

std::optional<std::string> theory_warning(const PriorConfig& cfg, Index d) {
  require_valid(cfg);
  if (cfg.c1 > 2.0 * static_cast<double>(d) * cfg.tau) return std::nullopt;
  return "prior support radius c1=" + std::to_string(cfg.c1) +
         " does not exceed 2*d*tau=" + std::to_string(2.0 * static_cast<double>(d) * cfg.tau) +
         "; the oracle-inequality guarantees assume a larger support";
}

double log_prior_unnormalized(const CoefVector& beta, const PriorConfig& cfg) {
  require_valid(cfg);
  if (!in_support(beta, cfg)) return -std::numeric_limits<double>::infinity();
  const double tau2 = cfg.tau * cfg.tau;
  double sum = 0.0;
  for (Index i = 0; i < beta.size(); ++i) sum += std::log(tau2 + beta[i] * beta[i]);
  return -2.0 * sum;
}

CoefVector grad_log_prior(const CoefVector& beta, const PriorConfig& cfg) {
  require_valid(cfg);
  if (!in_support(beta, cfg))
    throw NumericalError("prior gradient requested outside the support ||beta||_1 <= c1");
  const double tau2 = cfg.tau * cfg.tau;
  CoefVector grad(beta.size());
  for (Index i = 0; i < beta.size(); ++i)
    grad[i] = -4.0 * beta[i] / (tau2 + beta[i] * beta[i]);
  return grad;
}

CoefVector sample_prior(const PriorConfig& cfg, Index d, rng::Engine& engine) {
  require_valid(cfg);
  if (d < 1) throw std::invalid_argument("sample_prior requires d >= 1");
  // The density 1/(tau^2+b^2)^2 is the law of (tau/sqrt(3))*S with S ~ t_3.
  const double scale = cfg.tau / std::sqrt(3.0);
  std::student_t_distribution<double> t3(3.0);
  CoefVector beta(d);
  constexpr int kBudget = 1'000'000;
  for (int attempt = 0; attempt < kBudget; ++attempt) {
    double l1 = 0.0;
    Index drawn = 0;
    while (drawn < d && l1 <= cfg.c1) {
      beta[drawn] = scale * t3(engine);
      l1 += std::abs(beta[drawn]);
      ++drawn;
    }
    if (drawn == d && l1 <= cfg.c1) return beta;
  }
  throw NumericalError("prior sampling rejection budget exceeded: c1=" + std::to_string(cfg.c1) +
                       " is too small for d=" + std::to_string(d) +
                       " at tau=" + std::to_string(cfg.tau));
}

}  // namespace ewa
