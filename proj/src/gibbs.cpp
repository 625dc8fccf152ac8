#include "ewa/gibbs.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace ewa {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double risk_from_margins(const Eigen::VectorXd& m, LossKind loss) {
  double sum = 0.0;
  if (loss == LossKind::hinge) {
    for (Index i = 0; i < m.size(); ++i) sum += std::max(1.0 - m[i], 0.0);
  } else {
    for (Index i = 0; i < m.size(); ++i)
      sum += std::max(-m[i], 0.0) + std::log1p(std::exp(-std::abs(m[i])));
  }
  return sum / static_cast<double>(m.size());
}

// -(1/n) X^T (w .* y) with w_i = 1{m_i < 1} (hinge) or sigmoid(-m_i) (logistic).
CoefVector risk_gradient(const Eigen::VectorXd& m, const LabeledDataset& data, LossKind loss) {
  Eigen::VectorXd w(m.size());
  if (loss == LossKind::hinge) {
    for (Index i = 0; i < m.size(); ++i) w[i] = m[i] < 1.0 ? 1.0 : 0.0;
  } else {
    for (Index i = 0; i < m.size(); ++i) w[i] = sigmoid(-m[i]);
  }
  return -(data.features.transpose() * w.cwiseProduct(data.labels)) /
         static_cast<double>(data.n());
}

}  // namespace

double log_target(const CoefVector& beta, const LabeledDataset& data, const GibbsConfig& cfg) {
  const double lp = log_prior_unnormalized(beta, cfg.prior);
  if (lp == -std::numeric_limits<double>::infinity()) {
    if (beta.size() != data.d()) throw DimensionError(data.d(), beta.size());
    return lp;
  }
  const Eigen::VectorXd m = margins(beta, data);
  return -cfg.lambda * risk_from_margins(m, cfg.loss) + lp;
}

CoefVector grad_log_target(const CoefVector& beta, const LabeledDataset& data,
                           const GibbsConfig& cfg) {
  const Eigen::VectorXd m = margins(beta, data);
  return -cfg.lambda * risk_gradient(m, data, cfg.loss) + grad_log_prior(beta, cfg.prior);
}

LogDensityTarget make_gibbs_target(LabeledDataset data, GibbsConfig cfg) {
  auto shared = std::make_shared<const LabeledDataset>(std::move(data));
  LogDensityTarget target;
  target.log_density = [shared, cfg](const CoefVector& beta) {
    return log_target(beta, *shared, cfg);
  };
  target.gradient = [shared, cfg](const CoefVector& beta) {
    return grad_log_target(beta, *shared, cfg);
  };
  target.value_and_gradient = [shared, cfg](const CoefVector& beta) {
    ValueGrad out;
    const double lp = log_prior_unnormalized(beta, cfg.prior);
    if (lp == -std::numeric_limits<double>::infinity()) {
      if (beta.size() != shared->d()) throw DimensionError(shared->d(), beta.size());
      out.value = lp;
      out.grad = CoefVector::Zero(beta.size());
      return out;
    }
    const Eigen::VectorXd m = margins(beta, *shared);
    out.value = -cfg.lambda * risk_from_margins(m, cfg.loss) + lp;
    out.grad = -cfg.lambda * risk_gradient(m, *shared, cfg.loss) +
               grad_log_prior(beta, cfg.prior);
    return out;
  };
  return target;
}

}  // namespace ewa
