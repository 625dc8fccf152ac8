#include "ewa/model.hpp"

#include <cmath>

namespace ewa {

namespace {

void require_dim(const CoefVector& beta, const LabeledDataset& data) {
  if (beta.size() != data.d()) throw DimensionError(data.d(), beta.size());
}

}  // namespace

void validate_dataset(const LabeledDataset& data) {
  if (data.n() < 1) throw DataError("dataset has no rows");
  if (data.d() < 1) throw DataError("dataset has no features");
  if (data.labels.size() != data.n())
    throw DataError("label count " + std::to_string(data.labels.size()) +
                    " does not match row count " + std::to_string(data.n()));
  for (Index i = 0; i < data.labels.size(); ++i) {
    const double y = data.labels[i];
    if (y != 1.0 && y != -1.0)
      throw DataError("label at row " + std::to_string(i + 1) + " is not -1 or +1");
  }
  if (!data.features.allFinite()) throw DataError("features contain a non-finite value");
}

Eigen::VectorXd margins(const CoefVector& beta, const LabeledDataset& data) {
  require_dim(beta, data);
  return (data.features * beta).cwiseProduct(data.labels);
}

double zero_one_risk(const CoefVector& beta, const LabeledDataset& data) {
  const Eigen::VectorXd m = margins(beta, data);
  Index wrong = 0;
  for (Index i = 0; i < m.size(); ++i)
    if (m[i] < 0.0) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(data.n());
}

double hinge_risk(const CoefVector& beta, const LabeledDataset& data) {
  const Eigen::VectorXd m = margins(beta, data);
  double sum = 0.0;
  for (Index i = 0; i < m.size(); ++i) sum += std::max(1.0 - m[i], 0.0);
  return sum / static_cast<double>(data.n());
}

double logistic_risk(const CoefVector& beta, const LabeledDataset& data) {
  const Eigen::VectorXd m = margins(beta, data);
  double sum = 0.0;
  for (Index i = 0; i < m.size(); ++i)
    sum += std::max(-m[i], 0.0) + std::log1p(std::exp(-std::abs(m[i])));
  return sum / static_cast<double>(data.n());
}

RiskReport evaluate_risks(const CoefVector& beta, const LabeledDataset& data) {
  return RiskReport{zero_one_risk(beta, data), hinge_risk(beta, data),
                    logistic_risk(beta, data)};
}

int predict(const CoefVector& beta, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (beta.size() != x.size()) throw DimensionError(x.size(), beta.size());
  return beta.dot(x) >= 0.0 ? 1 : -1;
}

double misclassification_rate(const CoefVector& beta, const LabeledDataset& test) {
  if (test.n() < 1) throw DataError("empty test set");
  require_dim(beta, test);
  const Eigen::VectorXd scores = test.features * beta;
  Index wrong = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] >= 0.0 ? 1 : -1;
    if (static_cast<double>(pred) != test.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.n());
}

}  // namespace ewa
