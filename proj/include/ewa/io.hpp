#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ewa/rng.hpp"
#include "ewa/types.hpp"

namespace ewa {

LabeledDataset load_csv(const std::string& path);

void save_csv(const LabeledDataset& data, const std::string& path);

struct StandardizationStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  std::vector<char> constant;
};

StandardizationStats standardization_stats(const LabeledDataset& train);

LabeledDataset apply_standardization(const StandardizationStats& stats,
                                     const LabeledDataset& data);

std::pair<LabeledDataset, StandardizationStats> standardize(const LabeledDataset& train,
                                                            const LabeledDataset& apply_to);

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data,
                                                double train_fraction, rng::Engine& engine);

// Serializable description of one experiment; every CLI run can be replayed
// from this plus the input files.
struct RunConfig {
  std::string method = "H_MALA";
  double lambda = 1.0;
  double tau = 1.0;
  double c1 = 1e6;
  double step_size = 0.0;  // 0 means the dimension-based default
  std::int64_t n_iter = 30000;
  std::int64_t burn_in = 5000;
  std::int64_t thin = 1;
  bool adapt = true;
  double target_acceptance = 0.5;
  std::int64_t folds = 10;
  std::int64_t grid_size = 50;
  std::int64_t lasso_max_iter = 5000;
  double lasso_tol = 1e-8;
  double split_fraction = 0.7;
  std::int64_t replications = 100;
  std::int64_t test_rows = 2000;
  bool standardize = false;
  bool stochastic_draw = false;
  std::uint64_t seed = 0;
  std::string data_path;
  std::string output_path;

  bool operator==(const RunConfig&) const = default;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);

struct ModelFile {
  CoefVector beta;
  bool standardized = false;
  StandardizationStats stats;
  RunConfig config;
};

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace ewa
