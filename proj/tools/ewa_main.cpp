#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ewa/gibbs.hpp"
#include "ewa/io.hpp"
#include "ewa/lasso.hpp"
#include "ewa/model.hpp"
#include "ewa/prior.hpp"
#include "ewa/rng.hpp"
#include "ewa/samplers.hpp"
#include "ewa/simulation.hpp"
#include "ewa/types.hpp"

namespace {

using nlohmann::json;
using namespace ewa;

constexpr const char* kVersion = "1.0.0";

const std::vector<std::string> kScenarioNames = {"I.1",  "I.2",  "I.3",  "I.4",
                                                 "II.1", "II.2", "II.3", "II.4"};
const std::vector<std::string> kMethodNames = {"H_LMC", "H_MALA", "Logit_LMC", "Logit_MALA",
                                               "Lasso"};

// Bad flag combinations and out-of-range values discovered after parsing;
// mapped to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << text;
  if (!out) throw DataError("failed while writing: " + path);
}

// Merges the three configuration layers: RunConfig defaults, then the
// --config file, then any flag given on the command line.
class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App* cmd) : cmd_(cmd) {
    cmd_->add_option("--config", config_path_,
                     "JSON config file; its values override defaults, flags override it");
  }

  template <class T>
  CLI::Option* option(const std::string& name, T RunConfig::*field, const std::string& desc) {
    CLI::Option* opt = cmd_->add_option(name, bound_.*field, desc);
    writes_.emplace_back(opt, [field](RunConfig& dst, const RunConfig& src) {
      dst.*field = src.*field;
    });
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool RunConfig::*field, const std::string& desc) {
    CLI::Option* opt = cmd_->add_flag(name, bound_.*field, desc);
    writes_.emplace_back(opt, [field](RunConfig& dst, const RunConfig& src) {
      dst.*field = src.*field;
    });
    return opt;
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path_.empty()) cfg = run_config_from_json(read_text_file(config_path_));
    for (const auto& [opt, write] : writes_)
      if (opt->count() > 0) write(cfg, bound_);
    return cfg;
  }

 private:
  CLI::App* cmd_;
  RunConfig bound_;
  std::string config_path_;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, const RunConfig&)>>>
      writes_;
};

void require_usage(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void validate_config(const RunConfig& cfg) {
  require_usage(cfg.lambda >= 0.0, "lambda must be nonnegative");
  require_usage(cfg.tau > 0.0, "tau must be positive");
  require_usage(cfg.c1 > 0.0, "c1 must be positive");
  require_usage(cfg.step_size >= 0.0, "step size must be nonnegative (0 = dimension default)");
  require_usage(cfg.n_iter >= 2, "chain length must be at least 2");
  require_usage(cfg.burn_in >= 0 && cfg.burn_in < cfg.n_iter,
                "burn-in must be nonnegative and smaller than the chain length");
  require_usage(cfg.thin >= 1, "thin must be at least 1");
  require_usage(cfg.target_acceptance > 0.0 && cfg.target_acceptance < 1.0,
                "target acceptance must lie in (0,1)");
  require_usage(cfg.folds >= 2, "folds must be at least 2");
  require_usage(cfg.grid_size >= 2, "penalty grid size must be at least 2");
  require_usage(cfg.lasso_max_iter >= 1, "lasso-iters must be at least 1");
  require_usage(cfg.lasso_tol > 0.0, "lasso-tol must be positive");
  require_usage(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0,
                "split fraction must lie in (0,1)");
  require_usage(cfg.replications >= 1, "replications must be at least 1");
  require_usage(cfg.test_rows >= 1, "test-rows must be at least 1");
}

void add_sampler_options(ConfigBinder& b) {
  b.option("--lambda", &RunConfig::lambda,
           "inverse temperature; multiplies the summed surrogate loss (n times the mean risk)");
  b.option("--tau", &RunConfig::tau, "prior scale");
  b.option("--c1", &RunConfig::c1, "l1 radius of the prior support");
  b.option("--step", &RunConfig::step_size,
           "sampler step size h; 0 picks the dimension default 0.5*d^(-1/3)");
  b.option("--iters", &RunConfig::n_iter, "chain length");
  b.option("--burn", &RunConfig::burn_in, "burn-in iterations");
  b.option("--thin", &RunConfig::thin, "keep every thin-th iterate");
  b.flag("--adapt,!--no-adapt", &RunConfig::adapt, "adapt the MALA step size during burn-in");
  b.option("--target-accept", &RunConfig::target_acceptance, "MALA acceptance target");
  b.flag("--stochastic-draw,!--no-stochastic-draw", &RunConfig::stochastic_draw,
         "classify with one posterior draw instead of the posterior mean");
}

void add_lasso_options(ConfigBinder& b) {
  b.option("--folds", &RunConfig::folds, "cross-validation folds");
  b.option("--grid", &RunConfig::grid_size, "penalty grid length");
  b.option("--lasso-iters", &RunConfig::lasso_max_iter, "proximal gradient iteration cap");
  b.option("--lasso-tol", &RunConfig::lasso_tol, "relative objective tolerance");
}

PriorConfig make_prior(const RunConfig& cfg) { return PriorConfig{cfg.tau, cfg.c1}; }

SamplerConfig make_sampler_config(const RunConfig& cfg, Index d, std::uint64_t seed) {
  SamplerConfig sc;
  sc.step_size =
      cfg.step_size > 0.0 ? cfg.step_size : 0.5 * std::pow(static_cast<double>(d), -1.0 / 3.0);
  sc.n_iter = cfg.n_iter;
  sc.burn_in = cfg.burn_in;
  sc.adapt = cfg.adapt;
  sc.target_acceptance = cfg.target_acceptance;
  sc.thin = cfg.thin;
  sc.seed = seed;
  return sc;
}

LassoConfig make_lasso_config(const RunConfig& cfg) {
  LassoConfig lc;
  lc.grid_size = static_cast<int>(cfg.grid_size);
  lc.max_iter = cfg.lasso_max_iter;
  lc.tol = cfg.lasso_tol;
  lc.folds = static_cast<int>(cfg.folds);
  return lc;
}

BenchmarkOptions make_bench_options(const RunConfig& cfg, Index d, int threads) {
  BenchmarkOptions opts;
  opts.chain = make_sampler_config(cfg, d, 0);
  opts.lambda = cfg.lambda;
  opts.prior = make_prior(cfg);
  opts.lasso = make_lasso_config(cfg);
  opts.test_rows = cfg.test_rows;
  opts.stochastic_draw = cfg.stochastic_draw;
  opts.threads = threads;
  return opts;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("EWA_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed > 0) return static_cast<int>(parsed);
    std::cerr << "warning: ignoring unparseable EWA_THREADS=\"" << env << "\"\n";
  }
  return 1;
}

Index count_nonzeros(const CoefVector& beta) {
  Index nnz = 0;
  for (Index i = 0; i < beta.size(); ++i)
    if (beta[i] != 0.0) ++nnz;
  return nnz;
}

void warn_about_prior(const PriorConfig& prior, Index d) {
  if (auto warning = theory_warning(prior, d)) std::cerr << "warning: " << *warning << "\n";
}

std::string csv_quote(const std::string& field) {
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void write_records_csv(const BenchmarkResult& result, const std::string& path) {
  std::ostringstream out;
  out << "scenario,method,replication,pct,ok,error\n";
  char buf[48];
  for (const ReplicationRecord& rec : result.records) {
    std::snprintf(buf, sizeof(buf), "%.10g", rec.pct);
    out << rec.scenario << ',' << method_name(rec.method) << ',' << rec.replication << ','
        << (rec.ok ? buf : "nan") << ',' << (rec.ok ? 1 : 0) << ',' << csv_quote(rec.error)
        << '\n';
  }
  write_text_file(path, out.str());
}

void print_cells(const BenchmarkResult& result) {
  std::printf("%-10s %-12s %9s %9s %6s %9s\n", "scenario", "method", "mean_pct", "sd_pct",
              "reps", "seconds");
  for (const BenchmarkCell& cell : result.cells)
    std::printf("%-10s %-12s %9.2f %9.2f %6d %9.1f\n", cell.scenario.c_str(),
                method_name(cell.method).c_str(), cell.mean_pct, cell.sd_pct, cell.reps,
                cell.seconds);
  std::fflush(stdout);
}

void report_failures(const BenchmarkResult& result) {
  for (const BenchmarkCell& cell : result.cells) {
    if (cell.failed == 0) continue;
    std::string first_error;
    for (const ReplicationRecord& rec : result.records)
      if (!rec.ok && rec.scenario == cell.scenario && rec.method == cell.method) {
        first_error = rec.error;
        break;
      }
    std::cerr << "warning: " << cell.scenario << "/" << method_name(cell.method) << ": "
              << cell.failed << " replication(s) failed (" << first_error << ")\n";
  }
}

json library_versions() {
  return json{{"ewa", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)}};
}

// 102 rows (52 labeled +1, then 50 labeled -1) by 6033 standard normal
// features; the first 30 columns get a 0.35 label shift so the file carries
// learnable signal at roughly expression-data difficulty.
LabeledDataset make_standin(std::uint64_t seed) {
  constexpr Index n = 102;
  constexpr Index d = 6033;
  constexpr Index informative = 30;
  constexpr double shift = 0.35;
  auto engine = rng::make_engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  LabeledDataset data;
  data.features.resize(n, d);
  data.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    data.labels[i] = i < 52 ? 1.0 : -1.0;
    for (Index j = 0; j < d; ++j)
      data.features(i, j) = gauss(engine) + (j < informative ? shift * data.labels[i] : 0.0);
  }
  return data;
}

LossKind loss_of(Method m) {
  return (m == Method::h_lmc || m == Method::h_mala) ? LossKind::hinge : LossKind::logistic;
}

std::uint64_t chain_purpose(Method m) {
  switch (m) {
    case Method::h_mala: return stream::kMalaHinge;
    case Method::h_lmc: return stream::kLmcHinge;
    case Method::logit_mala: return stream::kMalaLogit;
    case Method::logit_lmc: return stream::kLmcLogit;
    case Method::lasso: break;
  }
  return 0;
}

// ---------------------------------------------------------------- fit

struct FitContext {
  std::unique_ptr<ConfigBinder> binder;
};

FitContext* setup_fit(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "fit", "Fit one method on a CSV dataset and write a model file");
  auto* ctx = new FitContext;
  ctx->binder = std::make_unique<ConfigBinder>(cmd);
  ConfigBinder& b = *ctx->binder;
  b.option("--data", &RunConfig::data_path, "training CSV (label column \"y\")");
  b.option("--out", &RunConfig::output_path, "model file path [model.json]");
  b.option("--method", &RunConfig::method, "H_LMC, H_MALA, Logit_LMC, Logit_MALA or Lasso")
      ->check(CLI::IsMember(kMethodNames));
  b.option("--seed", &RunConfig::seed, "master seed");
  b.flag("--standardize,!--no-standardize", &RunConfig::standardize,
         "center and scale features before fitting; stored in the model");
  add_sampler_options(b);
  add_lasso_options(b);
  return ctx;
}

int run_fit(FitContext& ctx) {
  const RunConfig cfg = ctx.binder->resolve();
  validate_config(cfg);
  require_usage(!cfg.data_path.empty(), "fit needs --data (or data_path in the config)");
  const std::optional<Method> method = parse_method(cfg.method);
  require_usage(method.has_value(), "unknown method: " + cfg.method);
  const std::string out = cfg.output_path.empty() ? "model.json" : cfg.output_path;

  LabeledDataset data = load_csv(cfg.data_path);
  ModelFile model;
  model.config = cfg;
  if (cfg.standardize) {
    auto [standardized, stats] = standardize(data, data);
    data = std::move(standardized);
    model.standardized = true;
    model.stats = std::move(stats);
  }
  const Index n = data.n();
  const Index d = data.d();
  std::cout << "loaded " << n << " rows, " << d << " features from " << cfg.data_path << "\n";

  const PriorConfig prior = make_prior(cfg);
  warn_about_prior(prior, d);

  auto run_cv = [&]() {
    auto engine = rng::make_engine(rng::derive(cfg.seed, 0, stream::kCv));
    CvSelection selection = cv_select(data, make_lasso_config(cfg), engine);
    for (const std::string& w : selection.warnings) std::cerr << "warning: " << w << "\n";
    return selection;
  };

  if (*method == Method::lasso) {
    const CvSelection selection = run_cv();
    model.beta = selection.beta;
    std::cout << "selected penalty " << selection.penalty << ", nonzero coefficients "
              << count_nonzeros(model.beta) << "\n";
  } else {
    GibbsConfig gc;
    gc.lambda = cfg.lambda * static_cast<double>(n);
    gc.loss = loss_of(*method);
    gc.prior = prior;
    const LogDensityTarget target = make_gibbs_target(data, gc);
    SamplerConfig sc = make_sampler_config(cfg, d, rng::derive(cfg.seed, 0, chain_purpose(*method)));

    Chain chain;
    if (*method == Method::h_mala || *method == Method::logit_mala) {
      chain = mala_run(target, CoefVector::Zero(d), sc);
      std::cout << "MALA acceptance rate " << chain.acceptance_rate << ", final step "
                << chain.step_size_trace.back() << "\n";
    } else {
      // The unadjusted chain starts at the cross-validated Lasso solution
      // with one tenth of the adapted MALA step, the benchmark arrangement.
      const CvSelection selection = run_cv();
      sc.adapt = false;
      if (cfg.step_size <= 0.0) {
        if (cfg.adapt && cfg.burn_in > 0) {
          const std::uint64_t mala_purpose = gc.loss == LossKind::hinge ? stream::kMalaHinge
                                                                        : stream::kMalaLogit;
          SamplerConfig calibration =
              make_sampler_config(cfg, d, rng::derive(cfg.seed, 0, mala_purpose));
          calibration.n_iter = calibration.burn_in + 1;
          calibration.thin = 1;
          const Chain prefix = mala_run(target, CoefVector::Zero(d), calibration);
          sc.step_size = 0.1 * prefix.step_size_trace.back();
        } else {
          sc.step_size = 1e-5 / static_cast<double>(d);
        }
      }
      chain = lmc_run(target, selection.beta, sc);
      std::cout << "LMC step " << sc.step_size << "\n";
    }
    if (cfg.stochastic_draw) {
      auto engine = rng::make_engine(
          rng::derive(cfg.seed, 0, stream::kDraw + static_cast<std::uint64_t>(*method)));
      model.beta = sample_classifier(chain, engine);
    } else {
      model.beta = posterior_mean(chain);
    }
  }

  const RiskReport risks = evaluate_risks(model.beta, data);
  char line[160];
  std::snprintf(line, sizeof(line),
                "train misclassification %.2f%%, hinge risk %.4f, logistic risk %.4f\n",
                100.0 * risks.zero_one, risks.hinge, risks.logistic);
  std::cout << line;
  save_model(model, out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------- predict

struct PredictContext {
  std::string model_path;
  std::string data_path;
  std::string out_path;
};

PredictContext* setup_predict(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand("predict", "Apply a model file to a CSV dataset");
  auto* ctx = new PredictContext;
  cmd->add_option("--model", ctx->model_path, "model file from fit")->required();
  cmd->add_option("--data", ctx->data_path, "CSV to classify (label column \"y\" required)")
      ->required();
  cmd->add_option("--out", ctx->out_path, "predictions CSV path [predictions.csv]");
  return ctx;
}

int run_predict(PredictContext& ctx) {
  const ModelFile model = load_model(ctx.model_path);
  LabeledDataset data = load_csv(ctx.data_path);
  if (model.standardized) data = apply_standardization(model.stats, data);
  if (model.beta.size() != data.d()) throw DimensionError(model.beta.size(), data.d());
  const std::string out = ctx.out_path.empty() ? "predictions.csv" : ctx.out_path;

  std::ostringstream text;
  text << "y_pred\n";
  for (Index i = 0; i < data.n(); ++i)
    text << (predict(model.beta, data.features.row(i).transpose()) > 0 ? "1" : "-1") << '\n';
  write_text_file(out, text.str());

  char line[120];
  std::snprintf(line, sizeof(line),
                "wrote %lld predictions to %s; misclassification vs provided labels %.2f%%\n",
                static_cast<long long>(data.n()), out.c_str(),
                100.0 * misclassification_rate(model.beta, data));
  std::cout << line;
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateContext {
  std::unique_ptr<ConfigBinder> binder;
  std::string scenario = "I.1";
  std::int64_t n = -1;
  std::int64_t d = -1;
  std::int64_t s0 = -1;
  std::string test_out;
  bool standin = false;
};

SimulateContext* setup_simulate(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "simulate", "Generate a synthetic scenario dataset or the 102x6033 stand-in");
  auto* ctx = new SimulateContext;
  ctx->binder = std::make_unique<ConfigBinder>(cmd);
  ConfigBinder& b = *ctx->binder;
  CLI::Option* scenario = cmd->add_option("--scenario", ctx->scenario, "scenario name [I.1]")
                              ->check(CLI::IsMember(kScenarioNames));
  CLI::Option* n = cmd->add_option("--n", ctx->n, "training rows [50]")->check(CLI::PositiveNumber);
  CLI::Option* d = cmd->add_option("--d", ctx->d, "features [100]")->check(CLI::PositiveNumber);
  CLI::Option* s0 =
      cmd->add_option("--s0", ctx->s0, "nonzero truth coefficients [10]")->check(CLI::PositiveNumber);
  CLI::Option* test_out =
      cmd->add_option("--test-out", ctx->test_out, "also write an independent test CSV here");
  b.option("--test-rows", &RunConfig::test_rows, "rows in the test CSV [2000]");
  b.option("--seed", &RunConfig::seed, "master seed");
  b.option("--out", &RunConfig::output_path, "output CSV path [train.csv / standin.csv]");
  CLI::Option* standin = cmd->add_flag(
      "--standin", ctx->standin,
      "write the 102x6033 synthetic stand-in with expression-data geometry instead");
  standin->excludes(scenario)->excludes(n)->excludes(d)->excludes(s0)->excludes(test_out);
  return ctx;
}

int run_simulate(SimulateContext& ctx) {
  const RunConfig cfg = ctx.binder->resolve();
  validate_config(cfg);

  if (ctx.standin) {
    const std::string out = cfg.output_path.empty() ? "standin.csv" : cfg.output_path;
    const LabeledDataset data = make_standin(rng::derive(cfg.seed, 0, stream::kStandin));
    save_csv(data, out);
    std::cout << "wrote " << data.n() << "x" << data.d() << " stand-in to " << out << "\n";
    return 0;
  }

  ScenarioSpec spec = *parse_scenario(ctx.scenario);
  if (ctx.n > 0) spec.n = ctx.n;
  if (ctx.d > 0) spec.d = ctx.d;
  if (ctx.s0 > 0) spec.s0 = ctx.s0;
  spec.seed = cfg.seed;
  const std::string out = cfg.output_path.empty() ? "train.csv" : cfg.output_path;

  auto truth_engine = rng::make_engine(rng::derive(cfg.seed, 0, stream::kTruth));
  const SyntheticTruth truth = gen_truth(spec, truth_engine);
  auto train_engine = rng::make_engine(rng::derive(cfg.seed, 0, stream::kTrain));
  const LabeledDataset train = gen_labels(truth, spec, train_engine);
  save_csv(train, out);
  std::cout << "scenario " << scenario_name(spec) << ": wrote " << train.n() << "x" << train.d()
            << " training rows to " << out << "\n";

  if (!ctx.test_out.empty()) {
    ScenarioSpec test_spec = spec;
    test_spec.n = cfg.test_rows;
    auto test_engine = rng::make_engine(rng::derive(cfg.seed, 0, stream::kTest));
    const LabeledDataset test = gen_labels(truth, test_spec, test_engine);
    save_csv(test, ctx.test_out);
    char line[120];
    std::snprintf(line, sizeof(line),
                  "wrote %lld test rows to %s; oracle test misclassification %.2f%%\n",
                  static_cast<long long>(test.n()), ctx.test_out.c_str(),
                  100.0 * misclassification_rate(truth.beta_star, test));
    std::cout << line;
  }
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchContext {
  std::unique_ptr<ConfigBinder> binder;
  std::vector<std::string> scenario_names;
  std::vector<std::string> method_names;
  std::int64_t n = -1;
  std::int64_t d = -1;
  std::int64_t s0 = -1;
  std::int64_t splits = -1;
  int threads = 0;
  std::string manifest_path = "manifest.json";
  std::string records_path;
};

BenchContext* setup_bench(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "bench", "Benchmark the methods on synthetic scenarios or repeated splits of a CSV");
  auto* ctx = new BenchContext;
  ctx->binder = std::make_unique<ConfigBinder>(cmd);
  ConfigBinder& b = *ctx->binder;
  cmd->add_option("--scenarios", ctx->scenario_names, "scenario names [I.1]")
      ->delimiter(',')
      ->check(CLI::IsMember(kScenarioNames));
  cmd->add_option("--methods", ctx->method_names, "methods to run [all five]")
      ->delimiter(',')
      ->check(CLI::IsMember(kMethodNames));
  cmd->add_option("--n", ctx->n, "training rows per scenario [50]")->check(CLI::PositiveNumber);
  cmd->add_option("--d", ctx->d, "features per scenario [100]")->check(CLI::PositiveNumber);
  cmd->add_option("--s0", ctx->s0, "nonzero truth coefficients [10]")->check(CLI::PositiveNumber);
  CLI::Option* data =
      b.option("--data", &RunConfig::data_path, "real-data mode: benchmark splits of this CSV");
  cmd->add_option("--splits", ctx->splits, "real-data mode: number of random splits [--reps]")
      ->check(CLI::PositiveNumber)
      ->needs(data);
  cmd->add_option("--threads", ctx->threads, "worker threads [EWA_THREADS or 1]")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--manifest", ctx->manifest_path, "run manifest path [manifest.json]");
  cmd->add_option("--records", ctx->records_path, "also write per-replication records here");
  b.option("--reps", &RunConfig::replications, "replications per scenario [100]");
  b.option("--test-rows", &RunConfig::test_rows, "independent test rows per replication [2000]");
  b.option("--split-fraction", &RunConfig::split_fraction,
           "real-data mode: training fraction [0.7]");
  b.flag("--standardize,!--no-standardize", &RunConfig::standardize,
         "real-data mode: standardize each training split and apply to its test split");
  b.option("--seed", &RunConfig::seed, "master seed");
  b.option("--out", &RunConfig::output_path, "results CSV path [results.csv]");
  add_sampler_options(b);
  add_lasso_options(b);
  return ctx;
}

std::vector<Method> resolve_methods(const std::vector<std::string>& names) {
  std::vector<Method> methods;
  if (names.empty()) {
    methods = {Method::logit_lmc, Method::h_lmc, Method::logit_mala, Method::h_mala,
               Method::lasso};
    return methods;
  }
  for (const std::string& name : names) {
    const std::optional<Method> m = parse_method(name);
    require_usage(m.has_value(), "unknown method: " + name);
    if (std::find(methods.begin(), methods.end(), *m) == methods.end()) methods.push_back(*m);
  }
  return methods;
}

json rate_diagnostics(const ScenarioSpec& spec) {
  json entry{{"scenario", scenario_name(spec)}, {"eps", 0.05}, {"s_star", spec.s0}};
  try {
    entry["slow"] = rate_bound(spec.n, spec.d, spec.s0, 0.05, RateKind::slow);
    entry["fast"] = rate_bound(spec.n, spec.d, spec.s0, 0.05, RateKind::fast);
    entry["slow_known_s"] = rate_bound(spec.n, spec.d, spec.s0, 0.05, RateKind::slow_known_s);
    entry["fast_known_s"] = rate_bound(spec.n, spec.d, spec.s0, 0.05, RateKind::fast_known_s);
  } catch (const std::invalid_argument&) {
    entry["note"] = "outside the s <= n < d regime";
  }
  return entry;
}

int run_bench(BenchContext& ctx) {
  const RunConfig cfg = ctx.binder->resolve();
  validate_config(cfg);
  const std::vector<Method> methods = resolve_methods(ctx.method_names);
  const int threads = resolve_threads(ctx.threads);
  const std::string out = cfg.output_path.empty() ? "results.csv" : cfg.output_path;

  json manifest;
  manifest["format"] = "ewa-bench-manifest";
  manifest["version"] = 1;
  manifest["seed"] = cfg.seed;
  manifest["threads"] = threads;
  {
    json names = json::array();
    for (Method m : methods) names.push_back(method_name(m));
    manifest["methods"] = names;
  }
  manifest["config"] = json::parse(run_config_to_json(cfg));
  manifest["library"] = library_versions();

  BenchmarkResult result;
  if (cfg.data_path.empty()) {
    require_usage(!ctx.scenario_names.empty() || true, "");
    std::vector<std::string> names = ctx.scenario_names;
    if (names.empty()) names.push_back("I.1");
    std::vector<ScenarioSpec> specs;
    json scenario_json = json::array();
    json rates = json::array();
    for (const std::string& name : names) {
      ScenarioSpec spec = *parse_scenario(name);
      if (ctx.n > 0) spec.n = ctx.n;
      if (ctx.d > 0) spec.d = ctx.d;
      if (ctx.s0 > 0) spec.s0 = ctx.s0;
      spec.seed = cfg.seed;
      specs.push_back(spec);
      scenario_json.push_back(
          json{{"name", name}, {"n", spec.n}, {"d", spec.d}, {"s0", spec.s0}});
      rates.push_back(rate_diagnostics(spec));
    }
    manifest["mode"] = "scenario";
    manifest["scenarios"] = scenario_json;
    manifest["rate_diagnostics"] = rates;

    warn_about_prior(make_prior(cfg), specs.front().d);
    const BenchmarkOptions opts = make_bench_options(cfg, specs.front().d, threads);
    result = run_benchmark(specs, methods, static_cast<int>(cfg.replications), opts);
  } else {
    const LabeledDataset data = load_csv(cfg.data_path);
    const int splits =
        ctx.splits > 0 ? static_cast<int>(ctx.splits) : static_cast<int>(cfg.replications);
    const std::string stem = std::filesystem::path(cfg.data_path).stem().string();
    manifest["mode"] = "real";
    manifest["data"] = json{{"path", cfg.data_path},
                            {"rows", data.n()},
                            {"cols", data.d()},
                            {"splits", splits},
                            {"split_fraction", cfg.split_fraction},
                            {"standardize", cfg.standardize}};

    warn_about_prior(make_prior(cfg), data.d());
    const BenchmarkOptions opts = make_bench_options(cfg, data.d(), threads);

    const std::size_t M = methods.size();
    std::vector<std::vector<double>> pcts(M);
    std::vector<double> seconds(M, 0.0);
    std::vector<int> failed(M, 0);
    for (int s = 0; s < splits; ++s) {
      auto engine =
          rng::make_engine(rng::derive(cfg.seed, static_cast<std::uint64_t>(s), stream::kSplit));
      auto [train, test] = split(data, cfg.split_fraction, engine);
      if (cfg.standardize) {
        auto [standardized, stats] = standardize(train, train);
        test = apply_standardization(stats, test);
        train = std::move(standardized);
      }
      const std::vector<TaskScore> scores =
          score_split(train, test, methods, opts, cfg.seed, static_cast<std::uint64_t>(s));
      for (std::size_t mj = 0; mj < M; ++mj) {
        ReplicationRecord rec;
        rec.scenario = stem;
        rec.method = methods[mj];
        rec.replication = s;
        rec.pct = scores[mj].pct;
        rec.ok = scores[mj].ok;
        rec.error = scores[mj].error;
        result.records.push_back(std::move(rec));
        seconds[mj] += scores[mj].seconds;
        if (scores[mj].ok)
          pcts[mj].push_back(scores[mj].pct);
        else
          ++failed[mj];
      }
    }
    for (std::size_t mj = 0; mj < M; ++mj) {
      BenchmarkCell cell;
      cell.scenario = stem;
      cell.method = methods[mj];
      cell.reps = static_cast<int>(pcts[mj].size());
      cell.failed = failed[mj];
      cell.seconds = seconds[mj];
      if (cell.reps > 0) {
        double sum = 0.0;
        for (double p : pcts[mj]) sum += p;
        cell.mean_pct = sum / cell.reps;
        double ss = 0.0;
        for (double p : pcts[mj]) ss += (p - cell.mean_pct) * (p - cell.mean_pct);
        cell.sd_pct = cell.reps > 1 ? std::sqrt(ss / (cell.reps - 1)) : 0.0;
      } else {
        cell.mean_pct = std::numeric_limits<double>::quiet_NaN();
        cell.sd_pct = std::numeric_limits<double>::quiet_NaN();
      }
      result.cells.push_back(std::move(cell));
    }
  }

  {
    std::ostringstream csv;
    write_benchmark_csv(result, csv);
    write_text_file(out, csv.str());
  }
  write_text_file(ctx.manifest_path, manifest.dump(2) + "\n");
  if (!ctx.records_path.empty()) write_records_csv(result, ctx.records_path);

  print_cells(result);
  report_failures(result);
  std::cout << "wrote " << out << " and " << ctx.manifest_path;
  if (!ctx.records_path.empty()) std::cout << " and " << ctx.records_path;
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------- cv

struct CvContext {
  std::unique_ptr<ConfigBinder> binder;
  bool intercept = false;
};

CvContext* setup_cv(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "cv", "Cross-validated logistic Lasso path with a selection report");
  auto* ctx = new CvContext;
  ctx->binder = std::make_unique<ConfigBinder>(cmd);
  ConfigBinder& b = *ctx->binder;
  b.option("--data", &RunConfig::data_path, "training CSV (label column \"y\")");
  b.option("--out", &RunConfig::output_path, "report path [cv_report.json]");
  b.option("--seed", &RunConfig::seed, "master seed (fold shuffle)");
  b.flag("--standardize,!--no-standardize", &RunConfig::standardize,
         "center and scale features before the path fit");
  cmd->add_flag("--intercept", ctx->intercept, "fit an unpenalized intercept");
  add_lasso_options(b);
  return ctx;
}

int run_cv(CvContext& ctx) {
  const RunConfig cfg = ctx.binder->resolve();
  validate_config(cfg);
  require_usage(!cfg.data_path.empty(), "cv needs --data (or data_path in the config)");
  const std::string out = cfg.output_path.empty() ? "cv_report.json" : cfg.output_path;

  LabeledDataset data = load_csv(cfg.data_path);
  if (cfg.standardize) data = standardize(data, data).first;

  LassoConfig lc = make_lasso_config(cfg);
  lc.fit_intercept = ctx.intercept;
  auto engine = rng::make_engine(rng::derive(cfg.seed, 0, stream::kCv));
  const CvSelection selection = cv_select(data, lc, engine);
  for (const std::string& w : selection.warnings) std::cerr << "warning: " << w << "\n";

  double winner_score = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < selection.grid.size(); ++k)
    if (selection.grid[k] == selection.penalty) winner_score = selection.mean_misclassification[k];

  json report;
  report["format"] = "ewa-cv-report";
  report["version"] = 1;
  report["selected_penalty"] = selection.penalty;
  report["cv_misclassification"] = winner_score;
  report["intercept"] = selection.intercept;
  report["nonzeros"] = count_nonzeros(selection.beta);
  {
    json beta = json::array();
    for (Index i = 0; i < selection.beta.size(); ++i) beta.push_back(selection.beta[i]);
    report["beta"] = beta;
  }
  report["grid"] = selection.grid;
  report["mean_misclassification"] = selection.mean_misclassification;
  report["warnings"] = selection.warnings;
  report["config"] = json::parse(run_config_to_json(cfg));
  write_text_file(out, report.dump(2) + "\n");

  char line[160];
  std::snprintf(line, sizeof(line),
                "grid of %zu penalties: selected %.6g (cv misclassification %.2f%%, %lld nonzeros)\n",
                selection.grid.size(), selection.penalty, 100.0 * winner_score,
                static_cast<long long>(count_nonzeros(selection.beta)));
  std::cout << line;
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse binary classification by exponentially weighted aggregation:\n"
               "Gibbs posteriors over linear classifiers under a heavy-tailed prior,\n"
               "sampled by Langevin Monte Carlo, benchmarked against a logistic Lasso."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::unique_ptr<FitContext> fit_ctx(setup_fit(app));
  std::unique_ptr<PredictContext> predict_ctx(setup_predict(app));
  std::unique_ptr<SimulateContext> simulate_ctx(setup_simulate(app));
  std::unique_ptr<BenchContext> bench_ctx(setup_bench(app));
  std::unique_ptr<CvContext> cv_ctx(setup_cv(app));

  try {
    app.parse(argc, argv);
    if (app.got_subcommand("fit")) return run_fit(*fit_ctx);
    if (app.got_subcommand("predict")) return run_predict(*predict_ctx);
    if (app.got_subcommand("simulate")) return run_simulate(*simulate_ctx);
    if (app.got_subcommand("bench")) return run_bench(*bench_ctx);
    if (app.got_subcommand("cv")) return run_cv(*cv_ctx);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
