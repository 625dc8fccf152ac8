#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ewa/rng.hpp"
#include "ewa/types.hpp"

namespace ewa {

struct LassoConfig {
  std::vector<double> penalty_grid;  // strictly positive, descending; empty = default grid
  int grid_size = 50;                // default grid length when penalty_grid is empty
  std::int64_t max_iter = 5000;
  double tol = 1e-8;                 // relative objective change per iteration
  int folds = 10;
  bool fit_intercept = false;        // intercept is never penalized
};

// sign(z) * max(|z| - t, 0), the proximal operator of t*|.|.
double soft_threshold(double z, double t);

// Smallest penalty at which the all-zero vector is optimal:
// the sup-norm of the logistic risk gradient at beta = 0.
double lambda_max(const LabeledDataset& data);

// size log-spaced penalties from lambda_max down to lambda_max * 1e-4.
std::vector<double> default_penalty_grid(const LabeledDataset& data, int size = 50);

struct LassoFit {
  CoefVector beta;
  double intercept = 0.0;
};

// Minimizes logistic_risk(beta) + penalty * ||beta||_1 by accelerated proximal
// gradient with backtracking; momentum restarts keep the objective sequence
// non-increasing (recorded in objective_trace when given).  Stops once the
// relative objective change drops below cfg.tol and the KKT residuals are
// within 10 * cfg.tol, or at cfg.max_iter.  warm_start, when given, seeds the
// iteration (used for pathwise fits along a penalty grid).
LassoFit logistic_lasso_fit_affine(const LabeledDataset& data, double penalty,
                                   const LassoConfig& cfg,
                                   std::vector<double>* objective_trace = nullptr,
                                   const LassoFit* warm_start = nullptr);

// The cfg.fit_intercept = false case, returning just the coefficients.
CoefVector logistic_lasso_fit(const LabeledDataset& data, double penalty,
                              const LassoConfig& cfg);

struct CvSelection {
  double penalty = 0.0;
  CoefVector beta;
  double intercept = 0.0;
  std::vector<double> grid;                 // penalties actually searched
  std::vector<double> mean_misclassification;  // per grid entry, over usable folds
  std::vector<std::string> warnings;        // one entry per skipped degenerate fold
};

// K-fold cross-validation over the penalty grid, minimizing mean validation
// misclassification; ties resolve to the larger penalty.  A fold whose
// training part is single-class is skipped with a warning; if every fold is
// degenerate a DataError is thrown.  Refits on the full data at the winner.
CvSelection cv_select(const LabeledDataset& data, const LassoConfig& cfg, rng::Engine& engine);

}  // namespace ewa
