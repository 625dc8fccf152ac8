#include "ewa/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ewa/model.hpp"

namespace ewa {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct SmoothEval {
  double value = 0.0;
  CoefVector grad_beta;
  double grad_b = 0.0;
};

SmoothEval eval_logistic(const LabeledDataset& data, const CoefVector& beta, double b,
                         bool intercept) {
  const double n = static_cast<double>(data.n());
  Eigen::VectorXd m = data.features * beta;
  if (intercept) m.array() += b;
  m = m.cwiseProduct(data.labels);

  SmoothEval out;
  Eigen::VectorXd w(m.size());
  for (Index i = 0; i < m.size(); ++i) {
    out.value += std::max(-m[i], 0.0) + std::log1p(std::exp(-std::abs(m[i])));
    w[i] = sigmoid(-m[i]) * data.labels[i];
  }
  out.value /= n;
  out.grad_beta = -(data.features.transpose() * w) / n;
  if (intercept) out.grad_b = -w.sum() / n;
  return out;
}

double smooth_value(const LabeledDataset& data, const CoefVector& beta, double b,
                    bool intercept) {
  const double n = static_cast<double>(data.n());
  Eigen::VectorXd m = data.features * beta;
  if (intercept) m.array() += b;
  m = m.cwiseProduct(data.labels);
  double value = 0.0;
  for (Index i = 0; i < m.size(); ++i)
    value += std::max(-m[i], 0.0) + std::log1p(std::exp(-std::abs(m[i])));
  return value / n;
}

void require_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("penalty grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0)) throw std::invalid_argument("penalty grid entries must be positive");
    if (k > 0 && !(grid[k] < grid[k - 1]))
      throw std::invalid_argument("penalty grid must be strictly descending");
  }
}

double misclassification_affine(const LassoFit& fit, const LabeledDataset& data) {
  Eigen::VectorXd scores = data.features * fit.beta;
  scores.array() += fit.intercept;
  Index wrong = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    const double pred = scores[i] >= 0.0 ? 1.0 : -1.0;
    if (pred != data.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.n());
}

}  // namespace

double soft_threshold(double z, double t) {
  if (t < 0.0) throw std::invalid_argument("soft_threshold requires t >= 0");
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double lambda_max(const LabeledDataset& data) {
  return ((data.features.transpose() * data.labels) / (2.0 * static_cast<double>(data.n())))
      .cwiseAbs()
      .maxCoeff();
}

std::vector<double> default_penalty_grid(const LabeledDataset& data, int size) {
  if (size < 2) throw std::invalid_argument("penalty grid size must be at least 2");
  const double top = lambda_max(data);
  if (!(top > 0.0)) throw NumericalError("lambda_max is zero; data has no signal to penalize");
  std::vector<double> grid(size);
  for (int k = 0; k < size; ++k)
    grid[k] = top * std::pow(1e-4, static_cast<double>(k) / (size - 1));
  return grid;
}

LassoFit logistic_lasso_fit_affine(const LabeledDataset& data, double penalty,
                                   const LassoConfig& cfg,
                                   std::vector<double>* objective_trace,
                                   const LassoFit* warm_start) {
  if (!(penalty > 0.0)) throw std::invalid_argument("penalty must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const Index d = data.d();
  const bool ib = cfg.fit_intercept;

  CoefVector cur = CoefVector::Zero(d);
  double cur_b = 0.0;
  if (warm_start && warm_start->beta.size() == d) {
    cur = warm_start->beta;
    if (ib) cur_b = warm_start->intercept;
  }
  CoefVector prev = cur;
  double prev_b = cur_b;
  double obj_cur = smooth_value(data, cur, cur_b, ib) + penalty * cur.lpNorm<1>();
  if (!std::isfinite(obj_cur)) throw NumericalError("non-finite logistic objective");
  if (objective_trace) objective_trace->push_back(obj_cur);

  double t = 4.0;
  std::int64_t momentum_k = 1;
  const double kkt_tol = 10.0 * cfg.tol;

  for (std::int64_t iter = 0; iter < cfg.max_iter; ++iter) {
    const double omega =
        static_cast<double>(momentum_k - 1) / static_cast<double>(momentum_k + 2);
    CoefVector z = cur + omega * (cur - prev);
    double z_b = cur_b + omega * (cur_b - prev_b);

    auto backtracked_step = [&](const CoefVector& at, double at_b, CoefVector& next,
                                double& next_b) -> double {
      const SmoothEval se = eval_logistic(data, at, at_b, ib);
      if (!std::isfinite(se.value)) throw NumericalError("non-finite logistic objective");
      for (int shrink = 0; shrink < 200; ++shrink) {
        next.resize(d);
        for (Index i = 0; i < d; ++i)
          next[i] = soft_threshold(at[i] - t * se.grad_beta[i], t * penalty);
        next_b = ib ? at_b - t * se.grad_b : 0.0;
        const double f_next = smooth_value(data, next, next_b, ib);
        const CoefVector diff = next - at;
        const double diff_b = next_b - at_b;
        const double quad = se.value + se.grad_beta.dot(diff) + se.grad_b * diff_b +
                            (diff.squaredNorm() + diff_b * diff_b) / (2.0 * t);
        if (std::isfinite(f_next) && f_next <= quad + 1e-15) return f_next;
        t *= 0.5;
      }
      throw NumericalError("backtracking line search failed to find a finite step");
    };

    CoefVector next;
    double next_b = 0.0;
    double f_next = backtracked_step(z, z_b, next, next_b);
    double obj_next = f_next + penalty * next.lpNorm<1>();

    if (obj_next > obj_cur) {
      // Momentum overshoot: restart from the current point, which cannot increase.
      momentum_k = 1;
      f_next = backtracked_step(cur, cur_b, next, next_b);
      obj_next = f_next + penalty * next.lpNorm<1>();
    } else {
      ++momentum_k;
    }

    prev = cur;
    prev_b = cur_b;
    cur = next;
    cur_b = next_b;
    const double obj_prev = obj_cur;
    obj_cur = obj_next;
    if (objective_trace) objective_trace->push_back(obj_cur);

    const double rel_change = (obj_prev - obj_cur) / std::max(1.0, std::abs(obj_prev));
    if (rel_change < cfg.tol) {
      const SmoothEval se = eval_logistic(data, cur, cur_b, ib);
      bool kkt = !ib || std::abs(se.grad_b) <= kkt_tol;
      for (Index i = 0; i < d && kkt; ++i) {
        if (cur[i] != 0.0)
          kkt = std::abs(se.grad_beta[i] + penalty * (cur[i] > 0.0 ? 1.0 : -1.0)) <= kkt_tol;
        else
          kkt = std::abs(se.grad_beta[i]) <= penalty + kkt_tol;
      }
      if (kkt) break;
    }
  }
  return LassoFit{cur, cur_b};
}

CoefVector logistic_lasso_fit(const LabeledDataset& data, double penalty,
                              const LassoConfig& cfg) {
  LassoConfig plain = cfg;
  plain.fit_intercept = false;
  return logistic_lasso_fit_affine(data, penalty, plain).beta;
}

CvSelection cv_select(const LabeledDataset& data, const LassoConfig& cfg, rng::Engine& engine) {
  if (cfg.folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (data.n() < cfg.folds)
    throw DataError("cross-validation needs n >= folds, got n=" + std::to_string(data.n()) +
                    ", folds=" + std::to_string(cfg.folds));
  const std::vector<double> grid =
      cfg.penalty_grid.empty() ? default_penalty_grid(data, cfg.grid_size) : cfg.penalty_grid;
  require_grid(grid);

  std::vector<Index> order(static_cast<std::size_t>(data.n()));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), engine);
  std::vector<int> fold_of(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    fold_of[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % cfg.folds);

  CvSelection out;
  out.grid = grid;
  std::vector<double> score_sum(grid.size(), 0.0);
  int usable_folds = 0;

  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<Index> train_rows, valid_rows;
    for (Index i = 0; i < data.n(); ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? valid_rows : train_rows).push_back(i);

    LabeledDataset train, valid;
    train.features.resize(static_cast<Index>(train_rows.size()), data.d());
    train.labels.resize(static_cast<Index>(train_rows.size()));
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      train.features.row(static_cast<Index>(r)) = data.features.row(train_rows[r]);
      train.labels[static_cast<Index>(r)] = data.labels[train_rows[r]];
    }
    valid.features.resize(static_cast<Index>(valid_rows.size()), data.d());
    valid.labels.resize(static_cast<Index>(valid_rows.size()));
    for (std::size_t r = 0; r < valid_rows.size(); ++r) {
      valid.features.row(static_cast<Index>(r)) = data.features.row(valid_rows[r]);
      valid.labels[static_cast<Index>(r)] = data.labels[valid_rows[r]];
    }

    const double first = train.labels[0];
    bool single_class = true;
    for (Index i = 1; i < train.labels.size() && single_class; ++i)
      if (train.labels[i] != first) single_class = false;
    if (single_class) {
      out.warnings.push_back("fold " + std::to_string(f) +
                             " skipped: training part contains a single class");
      continue;
    }

    ++usable_folds;
    LassoFit warm{CoefVector::Zero(data.d()), 0.0};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      warm = logistic_lasso_fit_affine(train, grid[k], cfg, nullptr, &warm);
      score_sum[k] += misclassification_affine(warm, valid);
    }
  }
  if (usable_folds == 0)
    throw DataError("every cross-validation fold is degenerate (single-class training data)");

  out.mean_misclassification.resize(grid.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.mean_misclassification[k] = score_sum[k] / usable_folds;
    // Strict comparison keeps the earliest (largest) penalty on ties.
    if (out.mean_misclassification[k] < out.mean_misclassification[best]) best = k;
  }
  out.penalty = grid[best];

  LassoFit refit{CoefVector::Zero(data.d()), 0.0};
  for (std::size_t k = 0; k <= best; ++k)
    refit = logistic_lasso_fit_affine(data, grid[k], cfg, nullptr, &refit);
  out.beta = refit.beta;
  out.intercept = refit.intercept;
  return out;
}

}  // namespace ewa
