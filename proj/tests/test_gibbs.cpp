#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ewa/gibbs.hpp"
#include "ewa/rng.hpp"

using namespace ewa;

namespace {

LabeledDataset fixture() {
  LabeledDataset data;
  data.features.resize(4, 2);
  data.features << 1.0, 0.5,
                  -0.2, 0.4,
                   2.0, -1.0,
                   0.5, 1.0;
  data.labels.resize(4);
  data.labels << 1.0, -1.0, 1.0, 1.0;
  return data;
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

CoefVector random_vec(std::mt19937_64& eng, Eigen::Index d, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  CoefVector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = gauss(eng);
  return v;
}

}  // namespace

TEST_CASE("vanishing lambda reduces the target to the prior") {
  auto eng = rng::make_engine(1);
  const LabeledDataset data = random_dataset(eng, 25, 4);
  GibbsConfig cfg;
  cfg.lambda = 1e-300;
  for (int trial = 0; trial < 20; ++trial) {
    const CoefVector beta = random_vec(eng, 4);
    CHECK(std::abs(log_target(beta, data, cfg) -
                   log_prior_unnormalized(beta, cfg.prior)) < 1e-290);
    CHECK((grad_log_target(beta, data, cfg) - grad_log_prior(beta, cfg.prior)).norm() <
          1e-290);
  }
}

TEST_CASE("at equal prior value the smaller hinge risk wins") {
  auto eng = rng::make_engine(2);
  const LabeledDataset data = random_dataset(eng, 25, 3);
  GibbsConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    const CoefVector a = random_vec(eng, 3);
    CoefVector b(3);
    b << a[2], a[0], a[1];
    const double ra = hinge_risk(a, data), rb = hinge_risk(b, data);
    if (ra == rb) continue;
    // The prior is permutation invariant, so the target order follows the risks.
    const double ta = log_target(a, data, cfg), tb = log_target(b, data, cfg);
    if (ra < rb)
      CHECK(ta > tb);
    else
      CHECK(tb > ta);
  }
}

TEST_CASE("fixture target value composes the two closed forms") {
  const LabeledDataset data = fixture();
  GibbsConfig cfg;
  cfg.lambda = 2.0;
  CoefVector beta(2);
  beta << 1.0, -1.0;
  // -2 * 0.6 - 4 log 2
  CHECK(log_target(beta, data, cfg) ==
        doctest::Approx(-3.9725887222397812).epsilon(1e-14));
}

TEST_CASE("target is minus infinity outside the prior support") {
  const LabeledDataset data = fixture();
  GibbsConfig cfg;
  cfg.prior.c1 = 0.5;
  CoefVector beta(2);
  beta << 1.0, -1.0;
  CHECK(log_target(beta, data, cfg) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(grad_log_target(beta, data, cfg), NumericalError);
}

TEST_CASE("lambda enters the target linearly through the risk") {
  auto eng = rng::make_engine(4);
  const LabeledDataset data = random_dataset(eng, 30, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const CoefVector beta = random_vec(eng, 5);
    for (LossKind loss : {LossKind::hinge, LossKind::logistic}) {
      GibbsConfig c1, c2;
      c1.loss = c2.loss = loss;
      c1.lambda = 3.0;
      c2.lambda = 0.5;
      const double risk =
          loss == LossKind::hinge ? hinge_risk(beta, data) : logistic_risk(beta, data);
      CHECK(log_target(beta, data, c1) - log_target(beta, data, c2) ==
            doctest::Approx(-(c1.lambda - c2.lambda) * risk).epsilon(1e-12));
    }
  }
}

TEST_CASE("hinge gradient equals prior gradient when every margin exceeds one") {
  CoefVector beta(2);
  beta << 2.0, 1.0;
  LabeledDataset data;
  data.features.resize(3, 2);
  data.labels.resize(3);
  data.labels << 1.0, -1.0, 1.0;
  // Rows proportional to y * beta give margins 1.2 exactly.
  for (int i = 0; i < 3; ++i)
    data.features.row(i) = data.labels[i] * 1.2 * beta.transpose() / beta.squaredNorm();
  GibbsConfig cfg;
  cfg.lambda = 5.0;
  CHECK((grad_log_target(beta, data, cfg) - grad_log_prior(beta, cfg.prior)).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("hinge gradient matches finite differences away from the kink") {
  auto eng = rng::make_engine(6);
  const double step = 1e-6;
  int checked = 0;
  while (checked < 100) {
    const LabeledDataset data = random_dataset(eng, 15, 4);
    const CoefVector beta = random_vec(eng, 4);
    const Eigen::VectorXd m = margins(beta, data);
    bool near_kink = false;
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (std::abs(m[i] - 1.0) < 1e-3) near_kink = true;
    if (near_kink) continue;
    GibbsConfig cfg;
    cfg.lambda = 2.0;
    const CoefVector grad = grad_log_target(beta, data, cfg);
    CoefVector fd(4);
    for (int i = 0; i < 4; ++i) {
      CoefVector hi = beta, lo = beta;
      hi[i] += step;
      lo[i] -= step;
      fd[i] = (log_target(hi, data, cfg) - log_target(lo, data, cfg)) / (2.0 * step);
    }
    CHECK((fd - grad).norm() / std::max(1.0, grad.norm()) <= 1e-5);
    ++checked;
  }
}

TEST_CASE("logistic gradient matches finite differences everywhere") {
  auto eng = rng::make_engine(7);
  const double step = 1e-6;
  GibbsConfig cfg;
  cfg.loss = LossKind::logistic;
  cfg.lambda = 2.0;
  for (int trial = 0; trial < 100; ++trial) {
    const LabeledDataset data = random_dataset(eng, 15, 4);
    const CoefVector beta = random_vec(eng, 4);
    const CoefVector grad = grad_log_target(beta, data, cfg);
    CoefVector fd(4);
    for (int i = 0; i < 4; ++i) {
      CoefVector hi = beta, lo = beta;
      hi[i] += step;
      lo[i] -= step;
      fd[i] = (log_target(hi, data, cfg) - log_target(lo, data, cfg)) / (2.0 * step);
    }
    CHECK((fd - grad).norm() / std::max(1.0, grad.norm()) <= 1e-6);
  }
}

TEST_CASE("hinge risk is linear along segments that avoid the kink") {
  auto eng = rng::make_engine(8);
  int checked = 0;
  while (checked < 50) {
    const LabeledDataset data = random_dataset(eng, 12, 3);
    const CoefVector a = random_vec(eng, 3);
    const CoefVector b = random_vec(eng, 3);
    const Eigen::VectorXd ma = margins(a, data);
    const Eigen::VectorXd mb = margins(b, data);
    bool crosses = false;
    for (Eigen::Index i = 0; i < ma.size(); ++i)
      if ((ma[i] - 1.0) * (mb[i] - 1.0) <= 0.0) crosses = true;
    if (crosses) continue;
    const double ra = hinge_risk(a, data);
    const double rb = hinge_risk(b, data);
    for (double t : {0.25, 0.5, 0.75}) {
      const CoefVector mid = (1.0 - t) * a + t * b;
      CHECK(hinge_risk(mid, data) ==
            doctest::Approx((1.0 - t) * ra + t * rb).epsilon(1e-12));
    }
    ++checked;
  }
}

TEST_CASE("bundled target agrees with the free functions and shares margins") {
  auto eng = rng::make_engine(9);
  const LabeledDataset data = random_dataset(eng, 20, 4);
  GibbsConfig cfg;
  cfg.lambda = 1.5;
  const LogDensityTarget target = make_gibbs_target(data, cfg);
  for (int trial = 0; trial < 20; ++trial) {
    const CoefVector beta = random_vec(eng, 4);
    const ValueGrad vg = target.value_and_gradient(beta);
    CHECK(vg.value == doctest::Approx(log_target(beta, data, cfg)));
    CHECK((vg.grad - grad_log_target(beta, data, cfg)).norm() == doctest::Approx(0.0));
    CHECK(target.log_density(beta) == doctest::Approx(vg.value));
  }

  GibbsConfig tiny = cfg;
  tiny.prior.c1 = 0.1;
  const LogDensityTarget clipped = make_gibbs_target(data, tiny);
  const ValueGrad vg = clipped.value_and_gradient(CoefVector::Ones(4));
  CHECK(vg.value == -std::numeric_limits<double>::infinity());
}

TEST_CASE("dimension mismatch is reported") {
  const LabeledDataset data = fixture();
  GibbsConfig cfg;
  CHECK_THROWS_AS(log_target(CoefVector::Zero(3), data, cfg), DimensionError);
  CHECK_THROWS_AS(grad_log_target(CoefVector::Zero(3), data, cfg), DimensionError);
}
