#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ewa/model.hpp"
#include "ewa/rng.hpp"

using namespace ewa;

namespace {

// Four labeled rows in two dimensions with hand-checked margins at
// beta = (1, -1): 0.5, 0.6, 3.0, -0.5.
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

}  // namespace

TEST_CASE("fixture risks match hand-computed values") {
  const LabeledDataset data = fixture();
  CoefVector beta(2);
  beta << 1.0, -1.0;

  const Eigen::VectorXd m = margins(beta, data);
  CHECK(m[0] == doctest::Approx(0.5));
  CHECK(m[1] == doctest::Approx(0.6));
  CHECK(m[2] == doctest::Approx(3.0));
  CHECK(m[3] == doctest::Approx(-0.5));

  CHECK(zero_one_risk(beta, data) == doctest::Approx(0.25));
  CHECK(hinge_risk(beta, data) == doctest::Approx(0.6));
  CHECK(misclassification_rate(beta, data) == doctest::Approx(0.25));

  const RiskReport report = evaluate_risks(beta, data);
  CHECK(report.zero_one == doctest::Approx(0.25));
  CHECK(report.hinge == doctest::Approx(0.6));
  CHECK(report.logistic == doctest::Approx(logistic_risk(beta, data)));
}

TEST_CASE("logistic risk at margins +1 and -1 matches quadrature value") {
  LabeledDataset data;
  data.features.resize(2, 1);
  data.features << 1.0, 1.0;
  data.labels.resize(2);
  data.labels << 1.0, -1.0;
  CoefVector beta(1);
  beta << 1.0;
  // (log(1+e^-1) + log(1+e^1)) / 2, evaluated at 30-digit precision.
  CHECK(logistic_risk(beta, data) ==
        doctest::Approx(0.8132616875182228).epsilon(1e-12));
}

TEST_CASE("zero coefficient vector gives logistic risk log 2 and zero-one 0") {
  auto eng = rng::make_engine(7);
  const LabeledDataset data = random_dataset(eng, 50, 6);
  const CoefVector beta = CoefVector::Zero(6);
  CHECK(logistic_risk(beta, data) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(hinge_risk(beta, data) == doctest::Approx(1.0));
  // Zero margin counts as a correct prediction.
  CHECK(zero_one_risk(beta, data) == doctest::Approx(0.0));
}

TEST_CASE("hinge risk dominates zero-one risk") {
  auto eng = rng::make_engine(42);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const LabeledDataset data = random_dataset(eng, 20, 4);
    CoefVector beta(4);
    for (int j = 0; j < 4; ++j) beta[j] = gauss(eng);
    CHECK(hinge_risk(beta, data) >= zero_one_risk(beta, data));
  }
}

TEST_CASE("risks are invariant under row permutation") {
  auto eng = rng::make_engine(11);
  const LabeledDataset data = random_dataset(eng, 30, 5);
  CoefVector beta(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int j = 0; j < 5; ++j) beta[j] = gauss(eng);

  std::vector<Eigen::Index> order(30);
  for (Eigen::Index i = 0; i < 30; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), eng);
  LabeledDataset shuffled;
  shuffled.features.resize(30, 5);
  shuffled.labels.resize(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    shuffled.features.row(i) = data.features.row(order[i]);
    shuffled.labels[i] = data.labels[order[i]];
  }

  CHECK(zero_one_risk(beta, shuffled) == doctest::Approx(zero_one_risk(beta, data)));
  CHECK(hinge_risk(beta, shuffled) ==
        doctest::Approx(hinge_risk(beta, data)).epsilon(1e-13));
  CHECK(logistic_risk(beta, shuffled) ==
        doctest::Approx(logistic_risk(beta, data)).epsilon(1e-13));
}

TEST_CASE("prediction at the decision boundary returns +1") {
  CoefVector beta(2);
  beta << 1.0, -1.0;
  Eigen::VectorXd x(2);
  x << 1.0, 1.0;
  CHECK(predict(beta, x) == 1);
  x << 2.0, 1.0;
  CHECK(predict(beta, x) == 1);
  x << 0.0, 1.0;
  CHECK(predict(beta, x) == -1);
}

TEST_CASE("dimension mismatch raises an error naming both sizes") {
  const LabeledDataset data = fixture();
  const CoefVector beta = CoefVector::Zero(3);
  CHECK_THROWS_AS(margins(beta, data), DimensionError);
  CHECK_THROWS_AS(misclassification_rate(beta, data), DimensionError);
  CHECK_THROWS_AS(predict(beta, Eigen::VectorXd::Zero(2)), DimensionError);
  try {
    margins(beta, data);
  } catch (const DimensionError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
  }
}

TEST_CASE("dataset validation rejects malformed inputs") {
  LabeledDataset data = fixture();
  CHECK_NOTHROW(validate_dataset(data));

  LabeledDataset bad_label = fixture();
  bad_label.labels[2] = 0.0;
  CHECK_THROWS_AS(validate_dataset(bad_label), DataError);

  LabeledDataset short_labels = fixture();
  short_labels.labels.resize(3);
  CHECK_THROWS_AS(validate_dataset(short_labels), DataError);

  LabeledDataset nan_feature = fixture();
  nan_feature.features(1, 1) = std::nan("");
  CHECK_THROWS_AS(validate_dataset(nan_feature), DataError);

  LabeledDataset empty;
  empty.features.resize(0, 2);
  empty.labels.resize(0);
  CHECK_THROWS_AS(validate_dataset(empty), DataError);
}
