#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ewa/samplers.hpp"

using namespace ewa;

namespace {

LogDensityTarget constant_target() {
  LogDensityTarget t;
  t.log_density = [](const CoefVector&) { return 0.0; };
  t.gradient = [](const CoefVector& b) { return CoefVector::Zero(b.size()); };
  t.value_and_gradient = [](const CoefVector& b) {
    return ValueGrad{0.0, CoefVector::Zero(b.size())};
  };
  return t;
}

LogDensityTarget gaussian_target() {
  LogDensityTarget t;
  t.log_density = [](const CoefVector& b) { return -0.5 * b.squaredNorm(); };
  t.gradient = [](const CoefVector& b) { return CoefVector(-b); };
  t.value_and_gradient = [](const CoefVector& b) {
    return ValueGrad{-0.5 * b.squaredNorm(), CoefVector(-b)};
  };
  return t;
}

LogDensityTarget prior_target(PriorConfig pc) {
  LogDensityTarget t;
  t.log_density = [pc](const CoefVector& b) { return log_prior_unnormalized(b, pc); };
  t.gradient = [pc](const CoefVector& b) { return grad_log_prior(b, pc); };
  t.value_and_gradient = [pc](const CoefVector& b) {
    ValueGrad vg;
    vg.value = log_prior_unnormalized(b, pc);
    vg.grad = std::isfinite(vg.value) ? grad_log_prior(b, pc) : CoefVector::Zero(b.size());
    return vg;
  };
  return t;
}

LabeledDataset random_dataset(std::mt19937_64& eng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  LabeledDataset data;
  data.features.resize(n, d);
  data.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.features(i, j) = gauss(eng);
    data.labels[i] = (eng() & 1u) ? 1.0 : -1.0;
  }
  return data;
}

}  // namespace

TEST_CASE("LMC on a flat target is pure diffusion with variance 2h") {
  const LogDensityTarget target = constant_target();
  SamplerConfig cfg;
  cfg.step_size = 1e-4;
  cfg.n_iter = 1;
  cfg.burn_in = 0;
  const CoefVector init = CoefVector::Zero(5);
  std::vector<double> increments;
  increments.reserve(50000);
  for (int rep = 0; rep < 10000; ++rep) {
    cfg.seed = 1000 + rep;
    const Chain chain = lmc_run(target, init, cfg);
    for (int i = 0; i < 5; ++i) increments.push_back(chain.samples[0][i]);
  }
  double mean = 0.0;
  for (double v : increments) mean += v;
  mean /= increments.size();
  double var = 0.0;
  for (double v : increments) var += (v - mean) * (v - mean);
  var /= increments.size() - 1;
  CHECK(std::abs(mean) < 2e-4);
  CHECK(var == doctest::Approx(2.0 * cfg.step_size).epsilon(0.10));
}

TEST_CASE("ULA tracks the standard Gaussian at small step size") {
  const LogDensityTarget target = gaussian_target();
  SamplerConfig cfg;
  cfg.step_size = 1e-3;
  cfg.n_iter = 200000;
  cfg.burn_in = 0;
  cfg.seed = 31;
  const Chain chain = lmc_run(target, CoefVector::Zero(1), cfg);
  double mean = 0.0;
  for (const auto& s : chain.samples) mean += s[0];
  mean /= chain.samples.size();
  double var = 0.0;
  for (const auto& s : chain.samples) var += (s[0] - mean) * (s[0] - mean);
  var /= chain.samples.size() - 1;
  CHECK(var >= 0.9);
  CHECK(var <= 1.1);
}

TEST_CASE("chains are bit-identical for a fixed seed") {
  auto eng = rng::make_engine(5);
  const LabeledDataset data = random_dataset(eng, 20, 4);
  GibbsConfig gibbs;
  const LogDensityTarget target = make_gibbs_target(data, gibbs);
  SamplerConfig cfg;
  cfg.step_size = 0.05;
  cfg.n_iter = 500;
  cfg.burn_in = 100;
  cfg.adapt = true;
  cfg.seed = 42;
  const CoefVector init = CoefVector::Zero(4);

  for (auto run : {lmc_run, mala_run}) {
    const Chain a = run(target, init, cfg);
    const Chain b = run(target, init, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k] == b.samples[k]);
    CHECK(a.step_size_trace == b.step_size_trace);
    CHECK(a.acceptance_rate == b.acceptance_rate);
  }
}

TEST_CASE("acceptance ratio is zero for a degenerate self-proposal") {
  const CoefVector x = CoefVector::Zero(3);
  const ValueGrad at{-1.25, CoefVector::Zero(3)};
  const double log_alpha = mala_log_accept_ratio(x, at, x, at, 0.2);
  CHECK(log_alpha == 0.0);
  CHECK(std::exp(std::min(0.0, log_alpha)) == 1.0);
}

TEST_CASE("acceptance ratio is skew-symmetric in its endpoints") {
  auto eng = rng::make_engine(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    CoefVector x(4), y(4);
    ValueGrad vx, vy;
    vx.grad.resize(4);
    vy.grad.resize(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = gauss(eng);
      y[i] = gauss(eng);
      vx.grad[i] = gauss(eng);
      vy.grad[i] = gauss(eng);
    }
    vx.value = gauss(eng);
    vy.value = gauss(eng);
    const double fwd = mala_log_accept_ratio(x, vx, y, vy, 0.3);
    const double bwd = mala_log_accept_ratio(y, vy, x, vx, 0.3);
    CHECK(fwd == doctest::Approx(-bwd).epsilon(1e-12));
  }
}

TEST_CASE("MALA samples the prior: quantiles match the quadrature CDF") {
  PriorConfig pc;
  const LogDensityTarget target = prior_target(pc);
  SamplerConfig cfg;
  cfg.step_size = 1.0;
  cfg.n_iter = 220000;
  cfg.burn_in = 20000;
  cfg.adapt = true;
  cfg.seed = 7;
  const Chain chain = mala_run(target, CoefVector::Zero(1), cfg);
  std::vector<double> draws;
  draws.reserve(chain.samples.size());
  for (std::size_t k = static_cast<std::size_t>(chain.burn_in); k < chain.samples.size(); ++k)
    draws.push_back(chain.samples[k][0]);
  std::sort(draws.begin(), draws.end());
  // Quantiles of the normalized density (2/pi)/(1+b^2)^2, solved to 17 digits.
  const double expected[5] = {-0.94555214347029657, -0.44161079170532838, 0.0,
                              0.44161079170532838, 0.94555214347029657};
  const double levels[5] = {0.1, 0.25, 0.5, 0.75, 0.9};
  for (int q = 0; q < 5; ++q) {
    const double observed = draws[static_cast<std::size_t>(levels[q] * draws.size())];
    CHECK(std::abs(observed - expected[q]) <= 0.05);
  }
}

TEST_CASE("frozen-step MALA occupancy passes a chi-square check") {
  PriorConfig pc;
  const LogDensityTarget target = prior_target(pc);
  SamplerConfig cfg;
  cfg.step_size = 0.8;
  cfg.n_iter = 200000;
  cfg.burn_in = 1000;
  cfg.thin = 25;
  cfg.seed = 13;
  const Chain chain = mala_run(target, CoefVector::Zero(1), cfg);
  // Equal-mass 20-bin edges of the target CDF, solved to 17 digits.
  const double edges[19] = {
      -1.3587150125838553,   -0.94555214347029657, -0.72155972536823297,
      -0.56492125293754941,  -0.44161079170532838, -0.33739756644903134,
      -0.2449129208948147,   -0.15973588137465057, -0.078865007167676228,
      0.0,                   0.078865007167676228, 0.15973588137465057,
      0.2449129208948147,    0.33739756644903134,  0.44161079170532838,
      0.56492125293754941,   0.72155972536823297,  0.94555214347029657,
      1.3587150125838553};
  std::vector<int> counts(20, 0);
  std::size_t used = 0;
  for (std::size_t k = static_cast<std::size_t>(chain.burn_in); k < chain.samples.size(); ++k) {
    const double v = chain.samples[k][0];
    const int bin =
        static_cast<int>(std::upper_bound(std::begin(edges), std::end(edges), v) -
                         std::begin(edges));
    ++counts[bin];
    ++used;
  }
  const double expected = static_cast<double>(used) / 20.0;
  double chi2 = 0.0;
  for (int b = 0; b < 20; ++b)
    chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
  // chi-square(19) critical value at p = 0.001.
  CHECK(chi2 < 43.820);
}

TEST_CASE("adaptation moves the step during burn-in and freezes it after") {
  const LogDensityTarget target = gaussian_target();
  SamplerConfig cfg;
  cfg.step_size = 10.0;
  cfg.n_iter = 4000;
  cfg.burn_in = 2000;
  cfg.adapt = true;
  cfg.seed = 3;
  const Chain chain = mala_run(target, CoefVector::Zero(3), cfg);
  CHECK(chain.step_size_trace.size() == 4000);
  const double frozen = chain.step_size_trace[cfg.burn_in];
  for (std::size_t s = cfg.burn_in; s < chain.step_size_trace.size(); ++s)
    CHECK(chain.step_size_trace[s] == frozen);
  CHECK(frozen != chain.step_size_trace.front());
  CHECK(chain.acceptance_rate >= 0.3);
  CHECK(chain.acceptance_rate <= 0.7);
}

TEST_CASE("chains never leave the prior support") {
  PriorConfig pc;
  pc.c1 = 2.0;
  const LogDensityTarget target = prior_target(pc);
  SamplerConfig cfg;
  cfg.step_size = 0.5;
  cfg.n_iter = 2000;
  cfg.burn_in = 100;
  cfg.seed = 11;
  const CoefVector init = CoefVector::Zero(3);

  const Chain lmc = lmc_run(target, init, cfg);
  bool halved = false;
  for (double h : lmc.step_size_trace) {
    CHECK(h <= cfg.step_size);
    if (h < cfg.step_size) halved = true;
  }
  CHECK(halved);
  for (const auto& s : lmc.samples) CHECK(s.lpNorm<1>() <= pc.c1);

  const Chain mala = mala_run(target, init, cfg);
  for (const auto& s : mala.samples) CHECK(s.lpNorm<1>() <= pc.c1);
}

TEST_CASE("posterior mean averages the post-burn-in segment") {
  Chain chain;
  CoefVector a(2), b(2);
  a << 1.0, 0.0;
  b << 3.0, 0.0;
  chain.samples = {a, b};
  chain.burn_in = 0;
  CoefVector mean = posterior_mean(chain);
  CHECK(mean[0] == doctest::Approx(2.0));
  CHECK(mean[1] == doctest::Approx(0.0));

  chain.burn_in = 1;
  mean = posterior_mean(chain);
  CHECK(mean[0] == doctest::Approx(3.0));

  chain.burn_in = 2;
  CHECK_THROWS_AS(posterior_mean(chain), NumericalError);
}

TEST_CASE("sample_classifier draws uniformly from the tail") {
  Chain chain;
  CoefVector a(1), b(1);
  a << -1.0;
  b << 4.0;
  chain.samples = {a, b};
  chain.burn_in = 1;
  auto eng = rng::make_engine(2);
  CHECK(sample_classifier(chain, eng)[0] == 4.0);

  chain.burn_in = 0;
  int count_a = 0;
  for (int k = 0; k < 10000; ++k) {
    const CoefVector draw = sample_classifier(chain, eng);
    const bool is_a = draw == a;
    CHECK((is_a || draw == b));
    if (is_a) ++count_a;
  }
  CHECK(std::abs(count_a / 10000.0 - 0.5) <= 0.02);
}

TEST_CASE("thinning stores every thin-th iterate and scales burn_in") {
  const LogDensityTarget target = gaussian_target();
  SamplerConfig cfg;
  cfg.step_size = 0.1;
  cfg.n_iter = 1000;
  cfg.burn_in = 500;
  cfg.thin = 10;
  cfg.seed = 9;
  const Chain chain = mala_run(target, CoefVector::Zero(2), cfg);
  CHECK(chain.samples.size() == 100);
  CHECK(chain.burn_in == 50);
  CHECK_NOTHROW(posterior_mean(chain));
}

TEST_CASE("invalid configurations and initial points are rejected") {
  const LogDensityTarget target = gaussian_target();
  const CoefVector init = CoefVector::Zero(2);
  SamplerConfig cfg;

  SamplerConfig bad = cfg;
  bad.step_size = 0.0;
  CHECK_THROWS_AS(lmc_run(target, init, bad), std::invalid_argument);
  bad = cfg;
  bad.burn_in = bad.n_iter;
  CHECK_THROWS_AS(mala_run(target, init, bad), std::invalid_argument);
  bad = cfg;
  bad.thin = 0;
  CHECK_THROWS_AS(mala_run(target, init, bad), std::invalid_argument);

  PriorConfig pc;
  pc.c1 = 1.0;
  const LogDensityTarget prior = prior_target(pc);
  CoefVector outside(2);
  outside << 5.0, 5.0;
  SamplerConfig small;
  small.n_iter = 10;
  small.burn_in = 0;
  CHECK_THROWS_AS(lmc_run(prior, outside, small), NumericalError);
  CHECK_THROWS_AS(mala_run(prior, outside, small), NumericalError);

  LogDensityTarget nan_grad = gaussian_target();
  nan_grad.value_and_gradient = [](const CoefVector& b) {
    return ValueGrad{0.0, CoefVector::Constant(b.size(), std::nan(""))};
  };
  CHECK_THROWS_AS(lmc_run(nan_grad, init, small), NumericalError);
}
