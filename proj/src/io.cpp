#include "ewa/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ewa/model.hpp"
#include "ewa/rng.hpp"

namespace ewa {

namespace {

using nlohmann::json;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string trimmed(const std::string& field) {
  const auto first = field.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = field.find_last_not_of(" \t");
  return field.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, Index row, const std::string& column) {
  const std::string token = trimmed(raw);
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (begin != end && *begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-numeric cell at row " << row << ", column \"" << column << "\"";
    throw DataError(msg.str());
  }
  return value;
}

}  // namespace

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);

  std::ptrdiff_t label_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (trimmed(header[c]) == "y") {
      label_col = static_cast<std::ptrdiff_t>(c);
      break;
    }
  if (label_col < 0) throw DataError("missing label column \"y\" in " + path);

  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (static_cast<std::ptrdiff_t>(c) != label_col) feature_names.push_back(trimmed(header[c]));

  std::vector<std::vector<double>> rows;
  std::vector<double> raw_labels;
  Index row_number = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_number;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << row_number << " has " << fields.size() << " fields, expected "
          << header.size();
      throw DataError(msg.str());
    }
    std::vector<double> features;
    features.reserve(feature_names.size());
    std::size_t feature_index = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (static_cast<std::ptrdiff_t>(c) == label_col) {
        raw_labels.push_back(parse_cell(fields[c], row_number, "y"));
      } else {
        features.push_back(parse_cell(fields[c], row_number, feature_names[feature_index]));
        ++feature_index;
      }
    }
    rows.push_back(std::move(features));
  }
  if (rows.empty()) throw DataError("no data rows in " + path);

  bool has_zero = false, has_minus_one = false;
  for (double v : raw_labels) {
    if (v == 0.0)
      has_zero = true;
    else if (v == -1.0)
      has_minus_one = true;
    else if (v != 1.0)
      throw DataError("label values must come from {-1,+1} or {0,1}");
  }
  if (has_zero && has_minus_one) throw DataError("mixed label alphabets: saw both 0 and -1");

  LabeledDataset data;
  data.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(feature_names.size()));
  data.labels.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      data.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    data.labels[static_cast<Index>(i)] = has_zero && raw_labels[i] == 0.0 ? -1.0 : raw_labels[i];
  }
  validate_dataset(data);
  return data;
}

void save_csv(const LabeledDataset& data, const std::string& path) {
  validate_dataset(data);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << 'y';
  for (Index j = 0; j < data.d(); ++j) out << ",x" << (j + 1);
  out << '\n';
  char buf[40];
  for (Index i = 0; i < data.n(); ++i) {
    out << (data.labels[i] > 0.0 ? '1' : '-');
    if (data.labels[i] < 0.0) out << '1';
    for (Index j = 0; j < data.d(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.features(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

StandardizationStats standardization_stats(const LabeledDataset& train) {
  if (train.n() < 1) throw DataError("standardization needs a nonempty training set");
  StandardizationStats stats;
  const Index n = train.n(), d = train.d();
  stats.mean = train.features.colwise().mean();
  stats.sd.resize(d);
  stats.constant.assign(static_cast<std::size_t>(d), 0);
  for (Index j = 0; j < d; ++j) {
    const double lo = train.features.col(j).minCoeff();
    const double hi = train.features.col(j).maxCoeff();
    if (lo == hi || n < 2) {
      stats.constant[static_cast<std::size_t>(j)] = 1;
      stats.sd[j] = 1.0;
      continue;
    }
    const double ss = (train.features.col(j).array() - stats.mean[j]).square().sum();
    stats.sd[j] = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return stats;
}

LabeledDataset apply_standardization(const StandardizationStats& stats,
                                     const LabeledDataset& data) {
  if (stats.mean.size() != data.d()) throw DimensionError(stats.mean.size(), data.d());
  LabeledDataset out = data;
  for (Index j = 0; j < data.d(); ++j) {
    const double scale = stats.constant[static_cast<std::size_t>(j)] ? 1.0 : stats.sd[j];
    out.features.col(j) = (data.features.col(j).array() - stats.mean[j]) / scale;
  }
  return out;
}

std::pair<LabeledDataset, StandardizationStats> standardize(const LabeledDataset& train,
                                                            const LabeledDataset& apply_to) {
  StandardizationStats stats = standardization_stats(train);
  return {apply_standardization(stats, apply_to), std::move(stats)};
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data,
                                                double train_fraction, rng::Engine& engine) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DataError("train fraction must lie strictly between 0 and 1");
  const Index n = data.n();
  const Index k = static_cast<Index>(std::llround(train_fraction * static_cast<double>(n)));
  if (k < 1 || k >= n) throw DataError("degenerate split: both parts must be nonempty");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), engine);
  std::vector<Index> train_idx(order.begin(), order.begin() + k);
  std::vector<Index> test_idx(order.begin() + k, order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&](const std::vector<Index>& idx) {
    LabeledDataset part;
    part.features.resize(static_cast<Index>(idx.size()), data.d());
    part.labels.resize(static_cast<Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      part.features.row(static_cast<Index>(r)) = data.features.row(idx[r]);
      part.labels[static_cast<Index>(r)] = data.labels[idx[r]];
    }
    return part;
  };
  return {take(train_idx), take(test_idx)};
}

namespace {

json run_config_json(const RunConfig& cfg) {
  json j;
  j["method"] = cfg.method;
  j["lambda"] = cfg.lambda;
  j["tau"] = cfg.tau;
  j["c1"] = cfg.c1;
  j["step_size"] = cfg.step_size;
  j["n_iter"] = cfg.n_iter;
  j["burn_in"] = cfg.burn_in;
  j["thin"] = cfg.thin;
  j["adapt"] = cfg.adapt;
  j["target_acceptance"] = cfg.target_acceptance;
  j["folds"] = cfg.folds;
  j["grid_size"] = cfg.grid_size;
  j["lasso_max_iter"] = cfg.lasso_max_iter;
  j["lasso_tol"] = cfg.lasso_tol;
  j["split_fraction"] = cfg.split_fraction;
  j["replications"] = cfg.replications;
  j["test_rows"] = cfg.test_rows;
  j["standardize"] = cfg.standardize;
  j["stochastic_draw"] = cfg.stochastic_draw;
  j["seed"] = cfg.seed;
  j["data_path"] = cfg.data_path;
  j["output_path"] = cfg.output_path;
  return j;
}

RunConfig run_config_from(const json& j) {
  RunConfig cfg;
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    const json& v = item.value();
    try {
      if (key == "method")
        cfg.method = v.get<std::string>();
      else if (key == "lambda")
        cfg.lambda = v.get<double>();
      else if (key == "tau")
        cfg.tau = v.get<double>();
      else if (key == "c1")
        cfg.c1 = v.get<double>();
      else if (key == "step_size")
        cfg.step_size = v.get<double>();
      else if (key == "n_iter")
        cfg.n_iter = v.get<std::int64_t>();
      else if (key == "burn_in")
        cfg.burn_in = v.get<std::int64_t>();
      else if (key == "thin")
        cfg.thin = v.get<std::int64_t>();
      else if (key == "adapt")
        cfg.adapt = v.get<bool>();
      else if (key == "target_acceptance")
        cfg.target_acceptance = v.get<double>();
      else if (key == "folds")
        cfg.folds = v.get<std::int64_t>();
      else if (key == "grid_size")
        cfg.grid_size = v.get<std::int64_t>();
      else if (key == "lasso_max_iter")
        cfg.lasso_max_iter = v.get<std::int64_t>();
      else if (key == "lasso_tol")
        cfg.lasso_tol = v.get<double>();
      else if (key == "split_fraction")
        cfg.split_fraction = v.get<double>();
      else if (key == "replications")
        cfg.replications = v.get<std::int64_t>();
      else if (key == "test_rows")
        cfg.test_rows = v.get<std::int64_t>();
      else if (key == "standardize")
        cfg.standardize = v.get<bool>();
      else if (key == "stochastic_draw")
        cfg.stochastic_draw = v.get<bool>();
      else if (key == "seed")
        cfg.seed = v.get<std::uint64_t>();
      else if (key == "data_path")
        cfg.data_path = v.get<std::string>();
      else if (key == "output_path")
        cfg.output_path = v.get<std::string>();
      else
        throw DataError("unknown config key: " + key);
    } catch (const json::exception& e) {
      throw DataError("bad value for config key \"" + key + "\": " + e.what());
    }
  }
  return cfg;
}

}  // namespace

std::string run_config_to_json(const RunConfig& cfg) { return run_config_json(cfg).dump(2); }

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid config JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config JSON must be an object");
  return run_config_from(j);
}

void save_model(const ModelFile& model, const std::string& path) {
  json j;
  j["format"] = "ewa-model";
  j["version"] = 1;
  j["beta"] = std::vector<double>(model.beta.data(), model.beta.data() + model.beta.size());
  if (model.standardized) {
    json s;
    s["mean"] = std::vector<double>(model.stats.mean.data(),
                                    model.stats.mean.data() + model.stats.mean.size());
    s["sd"] =
        std::vector<double>(model.stats.sd.data(), model.stats.sd.data() + model.stats.sd.size());
    s["constant"] = std::vector<int>(model.stats.constant.begin(), model.stats.constant.end());
    j["standardization"] = s;
  } else {
    j["standardization"] = nullptr;
  }
  j["config"] = run_config_json(model.config);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid model JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "ewa-model")
    throw DataError("not an ewa model file: " + path);
  if (j.value("version", 0) != 1) throw DataError("unsupported model version in " + path);

  ModelFile model;
  try {
    const auto beta = j.at("beta").get<std::vector<double>>();
    model.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(),
                                                   static_cast<Index>(beta.size()));
    const json& s = j.at("standardization");
    if (!s.is_null()) {
      model.standardized = true;
      const auto mean = s.at("mean").get<std::vector<double>>();
      const auto sd = s.at("sd").get<std::vector<double>>();
      const auto constant = s.at("constant").get<std::vector<int>>();
      if (mean.size() != sd.size() || mean.size() != constant.size())
        throw DataError("inconsistent standardization block in " + path);
      model.stats.mean =
          Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Index>(mean.size()));
      model.stats.sd = Eigen::Map<const Eigen::VectorXd>(sd.data(),
                                                         static_cast<Index>(sd.size()));
      model.stats.constant.assign(constant.begin(), constant.end());
    }
    model.config = run_config_from(j.at("config"));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
  return model;
}

}  // namespace ewa
