#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace ewa {

using CoefVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// An operation received a coefficient vector whose dimension does not match
// the data it is evaluated against.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(Index expected, Index actual)
      : std::invalid_argument("dimension mismatch: expected d=" + std::to_string(expected) +
                              ", got d=" + std::to_string(actual)) {}
};

// Malformed or inconsistent input data: bad label alphabet, non-finite
// features, unparseable files, degenerate splits.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-finite objective, exhausted rejection budget,
// gradient undefined at the requested point.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A binary classification sample: n rows of d features, labels in {-1,+1}.
// Producers (loaders, generators) must leave instances satisfying
// validate_dataset(); consumers treat them as read-only.
struct LabeledDataset {
  Matrix features;         // n x d
  Eigen::VectorXd labels;  // length n, every entry exactly -1 or +1

  Index n() const { return features.rows(); }
  Index d() const { return features.cols(); }
};

// Throws DataError unless n >= 1, d >= 1, labels are exactly +-1 and every
// feature value is finite.
void validate_dataset(const LabeledDataset& data);

// The three empirical risks of one coefficient vector on one dataset.
// zero_one <= hinge always holds (pointwise majorization).
struct RiskReport {
  double zero_one = 0.0;
  double hinge = 0.0;
  double logistic = 0.0;
};

}  // namespace ewa
