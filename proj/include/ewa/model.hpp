#pragma once

#include "ewa/types.hpp"

namespace ewa {

// Margins y_i * (beta^T x_i); shared by all risks and their gradients.
Eigen::VectorXd margins(const CoefVector& beta, const LabeledDataset& data);

// Fraction of strictly negative margins.  A margin of exactly zero counts
// as correctly classified (strict inequality in the indicator).
double zero_one_risk(const CoefVector& beta, const LabeledDataset& data);

// Mean positive part of (1 - margin); exactly 0 when every margin >= 1.
double hinge_risk(const CoefVector& beta, const LabeledDataset& data);

// Mean log(1 + exp(-margin)), evaluated in a branch that cannot overflow:
// max(-m, 0) + log1p(exp(-|m|)).
double logistic_risk(const CoefVector& beta, const LabeledDataset& data);

RiskReport evaluate_risks(const CoefVector& beta, const LabeledDataset& data);

// Linear classifier sign(beta^T x); the tie at zero resolves to +1.
int predict(const CoefVector& beta, const Eigen::Ref<const Eigen::VectorXd>& x);

// Fraction of rows where predict() disagrees with the stored label.
double misclassification_rate(const CoefVector& beta, const LabeledDataset& test);

}  // namespace ewa
