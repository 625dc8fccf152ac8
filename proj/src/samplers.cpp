#include "ewa/samplers.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ewa {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_valid(const SamplerConfig& cfg) {
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("sampler step_size must be positive");
  if (cfg.n_iter < 1) throw std::invalid_argument("sampler n_iter must be at least 1");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.n_iter)
    throw std::invalid_argument("sampler burn_in must satisfy 0 <= burn_in < n_iter");
  if (cfg.thin < 1 || cfg.thin > cfg.n_iter)
    throw std::invalid_argument("sampler thin must satisfy 1 <= thin <= n_iter");
  if (!(cfg.target_acceptance > 0.0 && cfg.target_acceptance < 1.0))
    throw std::invalid_argument("target_acceptance must lie in (0,1)");
}

ValueGrad eval_init(const LogDensityTarget& target, const CoefVector& init) {
  ValueGrad vg = target.value_and_gradient(init);
  if (!std::isfinite(vg.value))
    throw NumericalError("sampler initial point has non-finite log target");
  if (!vg.grad.allFinite())
    throw NumericalError("sampler initial point has non-finite gradient");
  return vg;
}

bool valid_state(const CoefVector& x, const ValueGrad& vg) {
  return x.allFinite() && std::isfinite(vg.value) && vg.grad.allFinite();
}

}  // namespace

double mala_log_accept_ratio(const CoefVector& x, const ValueGrad& at_x, const CoefVector& y,
                             const ValueGrad& at_y, double h) {
  const double log_q_forward = -(y - x - h * at_x.grad).squaredNorm() / (4.0 * h);
  const double log_q_backward = -(x - y - h * at_y.grad).squaredNorm() / (4.0 * h);
  return at_y.value + log_q_backward - at_x.value - log_q_forward;
}

Chain lmc_run(const LogDensityTarget& target, const CoefVector& init, const SamplerConfig& cfg) {
  require_valid(cfg);
  ValueGrad vg = eval_init(target, init);
  CoefVector x = init;
  const Index d = init.size();

  Chain chain;
  chain.seed = cfg.seed;
  chain.burn_in = cfg.burn_in / cfg.thin;
  chain.acceptance_rate = 1.0;
  chain.samples.reserve(static_cast<std::size_t>(cfg.n_iter / cfg.thin));
  chain.step_size_trace.reserve(static_cast<std::size_t>(cfg.n_iter));

  rng::Engine engine = rng::make_engine(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CoefVector noise(d), proposal(d);

  for (std::int64_t s = 1; s <= cfg.n_iter; ++s) {
    double h = cfg.step_size;
    ValueGrad next;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200)
        throw NumericalError("LMC step size underflow while retreating into the support");
      for (Index i = 0; i < d; ++i) noise[i] = gauss(engine);
      proposal = x + h * vg.grad + std::sqrt(2.0 * h) * noise;
      next = target.value_and_gradient(proposal);
      if (valid_state(proposal, next)) break;
      h *= 0.5;
    }
    x = proposal;
    vg = next;
    chain.step_size_trace.push_back(h);
    if (s % cfg.thin == 0) chain.samples.push_back(x);
  }
  return chain;
}

Chain mala_run(const LogDensityTarget& target, const CoefVector& init, const SamplerConfig& cfg) {
  require_valid(cfg);
  ValueGrad vg = eval_init(target, init);
  CoefVector x = init;
  const Index d = init.size();

  Chain chain;
  chain.seed = cfg.seed;
  chain.burn_in = cfg.burn_in / cfg.thin;
  chain.samples.reserve(static_cast<std::size_t>(cfg.n_iter / cfg.thin));
  chain.step_size_trace.reserve(static_cast<std::size_t>(cfg.n_iter));

  rng::Engine engine = rng::make_engine(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  CoefVector noise(d), proposal(d);

  double h = cfg.step_size;
  std::int64_t accepted_window = 0;
  std::int64_t accepted_tail = 0;

  for (std::int64_t s = 1; s <= cfg.n_iter; ++s) {
    chain.step_size_trace.push_back(h);
    for (Index i = 0; i < d; ++i) noise[i] = gauss(engine);
    proposal = x + h * vg.grad + std::sqrt(2.0 * h) * noise;

    bool accept = false;
    if (proposal.allFinite()) {
      const ValueGrad at_proposal = target.value_and_gradient(proposal);
      if (at_proposal.value != kNegInf && std::isfinite(at_proposal.value) &&
          at_proposal.grad.allFinite()) {
        const double log_alpha = mala_log_accept_ratio(x, vg, proposal, at_proposal, h);
        if (log_alpha >= 0.0 || std::log(unif(engine)) < log_alpha) {
          accept = true;
          x = proposal;
          vg = at_proposal;
        }
      }
    }
    if (accept) {
      ++accepted_window;
      if (s > cfg.burn_in) ++accepted_tail;
    }
    if (s % cfg.thin == 0) chain.samples.push_back(x);

    if (cfg.adapt && s <= cfg.burn_in && s % 100 == 0) {
      const double rate = static_cast<double>(accepted_window) / 100.0;
      accepted_window = 0;
      if (rate > cfg.target_acceptance + 0.05)
        h *= 1.1;
      else if (rate < cfg.target_acceptance - 0.05)
        h *= 0.9;
    }
  }
  chain.acceptance_rate =
      static_cast<double>(accepted_tail) / static_cast<double>(cfg.n_iter - cfg.burn_in);
  return chain;
}

CoefVector posterior_mean(const Chain& chain) {
  if (chain.burn_in < 0 ||
      static_cast<std::size_t>(chain.burn_in) >= chain.samples.size())
    throw NumericalError("chain has no post-burn-in samples");
  const std::size_t first = static_cast<std::size_t>(chain.burn_in);
  CoefVector sum = CoefVector::Zero(chain.samples[first].size());
  for (std::size_t k = first; k < chain.samples.size(); ++k) sum += chain.samples[k];
  return sum / static_cast<double>(chain.samples.size() - first);
}

CoefVector sample_classifier(const Chain& chain, rng::Engine& engine) {
  if (chain.burn_in < 0 ||
      static_cast<std::size_t>(chain.burn_in) >= chain.samples.size())
    throw NumericalError("chain has no post-burn-in samples");
  std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(chain.burn_in),
                                                  chain.samples.size() - 1);
  return chain.samples[pick(engine)];
}

}  // namespace ewa
