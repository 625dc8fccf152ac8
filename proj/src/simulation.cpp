#include "ewa/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "ewa/gibbs.hpp"
#include "ewa/model.hpp"

namespace ewa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::uint64_t kSeedTruth = stream::kTruth;
constexpr std::uint64_t kSeedTrain = stream::kTrain;
constexpr std::uint64_t kSeedTest = stream::kTest;
constexpr std::uint64_t kSeedCv = stream::kCv;
constexpr std::uint64_t kSeedMalaHinge = stream::kMalaHinge;
constexpr std::uint64_t kSeedLmcHinge = stream::kLmcHinge;
constexpr std::uint64_t kSeedMalaLogit = stream::kMalaLogit;
constexpr std::uint64_t kSeedLmcLogit = stream::kLmcLogit;
constexpr std::uint64_t kSeedDraw = stream::kDraw;

void require_valid(const ScenarioSpec& spec) {
  if (spec.variant < 1 || spec.variant > 4)
    throw std::invalid_argument("scenario variant must be in 1..4");
  if (spec.n < 1) throw std::invalid_argument("scenario n must be at least 1");
  if (spec.d < 1) throw std::invalid_argument("scenario d must be at least 1");
  if (spec.s0 < 1 || spec.s0 > spec.d)
    throw std::invalid_argument("scenario s0 must satisfy 1 <= s0 <= d");
}

}  // namespace

bool scenario_has_gaussian_noise(const ScenarioSpec& spec) {
  if (spec.variant == 4) return true;
  return spec.setting == Setting::I ? spec.variant == 2 : spec.variant == 3;
}

bool scenario_has_label_flip(const ScenarioSpec& spec) {
  if (spec.variant == 4) return true;
  return spec.setting == Setting::I ? spec.variant == 3 : spec.variant == 2;
}

std::optional<ScenarioSpec> parse_scenario(const std::string& name) {
  const auto dot = name.find('.');
  if (dot == std::string::npos || dot + 2 != name.size()) return std::nullopt;
  ScenarioSpec spec;
  const std::string head = name.substr(0, dot);
  if (head == "I")
    spec.setting = Setting::I;
  else if (head == "II")
    spec.setting = Setting::II;
  else
    return std::nullopt;
  const char v = name[dot + 1];
  if (v < '1' || v > '4') return std::nullopt;
  spec.variant = v - '0';
  return spec;
}

std::string scenario_name(const ScenarioSpec& spec) {
  std::string out = spec.setting == Setting::I ? "I." : "II.";
  out.push_back(static_cast<char>('0' + spec.variant));
  return out;
}

SyntheticTruth gen_truth(const ScenarioSpec& spec, rng::Engine& engine) {
  require_valid(spec);
  SyntheticTruth truth;
  truth.beta_star = CoefVector::Zero(spec.d);

  std::vector<Index> idx(static_cast<std::size_t>(spec.d));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index k = 0; k < spec.s0; ++k) {
    std::uniform_int_distribution<Index> pick(k, spec.d - 1);
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick(engine))]);
  }
  truth.support.assign(idx.begin(), idx.begin() + spec.s0);
  std::sort(truth.support.begin(), truth.support.end());

  std::normal_distribution<double> signal(0.0, 10.0);
  for (Index j : truth.support) truth.beta_star[j] = signal(engine);

  std::normal_distribution<double> gauss(0.0, 1.0);
  truth.dataset.features.resize(spec.n, spec.d);
  truth.dataset.labels.resize(spec.n);
  for (Index i = 0; i < spec.n; ++i)
    for (Index j = 0; j < spec.d; ++j) truth.dataset.features(i, j) = gauss(engine);
  for (Index i = 0; i < spec.n; ++i)
    truth.dataset.labels[i] =
        truth.dataset.features.row(i).dot(truth.beta_star) >= 0.0 ? 1.0 : -1.0;
  return truth;
}

LabeledDataset gen_labels(const SyntheticTruth& truth, const ScenarioSpec& spec,
                          rng::Engine& engine) {
  require_valid(spec);
  if (truth.beta_star.size() != spec.d)
    throw DimensionError(spec.d, truth.beta_star.size());

  LabeledDataset ds;
  ds.features.resize(spec.n, spec.d);
  ds.labels.resize(spec.n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index i = 0; i < spec.n; ++i)
    for (Index j = 0; j < spec.d; ++j) ds.features(i, j) = gauss(engine);

  const Eigen::VectorXd signal = ds.features * truth.beta_star;
  const bool with_noise = scenario_has_gaussian_noise(spec);
  const bool with_flip = scenario_has_label_flip(spec);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (Index i = 0; i < spec.n; ++i) {
    const double u = signal[i] + (with_noise ? noise(engine) : 0.0);
    double y;
    if (spec.setting == Setting::I) {
      y = u >= 0.0 ? 1.0 : -1.0;
    } else {
      const double p = 1.0 / (1.0 + std::exp(-u));
      y = u01(engine) < p ? 1.0 : -1.0;
    }
    if (with_flip && u01(engine) >= 0.9) y = -y;
    ds.labels[i] = y;
  }
  return ds;
}

std::string method_name(Method method) {
  switch (method) {
    case Method::h_lmc: return "H_LMC";
    case Method::h_mala: return "H_MALA";
    case Method::logit_lmc: return "Logit_LMC";
    case Method::logit_mala: return "Logit_MALA";
    case Method::lasso: return "Lasso";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::h_lmc, Method::h_mala, Method::logit_lmc, Method::logit_mala,
                   Method::lasso})
    if (name == method_name(m)) return m;
  return std::nullopt;
}

namespace {

struct Slot {
  double pct = kNaN;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
};

bool is_lmc(Method m) { return m == Method::h_lmc || m == Method::logit_lmc; }
bool is_mala(Method m) { return m == Method::h_mala || m == Method::logit_mala; }

LossKind loss_of(Method m) {
  return (m == Method::h_lmc || m == Method::h_mala) ? LossKind::hinge : LossKind::logistic;
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// State for one (scenario, replication) task; chains and the Lasso fit are
// shared between the methods that need them.
class ReplicationRun {
 public:
  ReplicationRun(const ScenarioSpec& spec, int rep, const std::vector<Method>& methods,
                 const BenchmarkOptions& opts)
      : spec_(spec), rep_(rep), methods_(methods), opts_(opts) {}

  // Externally supplied train/test pair; the spec only carries stream
  // bookkeeping (master seed, dimensions) in this mode.
  ReplicationRun(LabeledDataset train, LabeledDataset test, std::uint64_t seed,
                 std::uint64_t task, const std::vector<Method>& methods,
                 const BenchmarkOptions& opts)
      : rep_(static_cast<int>(task)), methods_(methods), opts_(opts), injected_(true) {
    spec_.seed = seed;
    spec_.n = train.n();
    spec_.d = train.d();
    spec_.s0 = 1;
    train_ = std::move(train);
    test_ = std::move(test);
    data_ok_ = true;
  }

  void execute(Slot* slots, std::size_t stride) {
    if (!injected_) prepare_data();
    prepare_lasso();
    if (data_ok_) {
      if (requested(Method::h_mala)) run_full_mala(LossKind::hinge);
      if (requested(Method::logit_mala)) run_full_mala(LossKind::logistic);
    }
    for (std::size_t mj = 0; mj < methods_.size(); ++mj) {
      Slot& slot = slots[mj * stride];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        slot.pct = evaluate(methods_[mj]);
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.ok = false;
        slot.error = e.what();
      }
      slot.seconds = elapsed_seconds(t0) + consume_charge(methods_[mj]);
    }
  }

 private:
  struct LossState {
    std::optional<LogDensityTarget> target;
    std::optional<Chain> mala;
    std::optional<double> calibrated_h;
    double mala_seconds = 0.0;
    double calibration_seconds = 0.0;
  };

  bool requested(Method m) const {
    return std::find(methods_.begin(), methods_.end(), m) != methods_.end();
  }

  std::uint64_t seed_for(std::uint64_t purpose) const {
    return rng::derive(spec_.seed, static_cast<std::uint64_t>(rep_), purpose);
  }

  void prepare_data() {
    try {
      auto eng_truth = rng::make_engine(seed_for(kSeedTruth));
      truth_ = gen_truth(spec_, eng_truth);
      auto eng_train = rng::make_engine(seed_for(kSeedTrain));
      train_ = gen_labels(truth_, spec_, eng_train);
      ScenarioSpec test_spec = spec_;
      test_spec.n = opts_.test_rows;
      auto eng_test = rng::make_engine(seed_for(kSeedTest));
      test_ = gen_labels(truth_, test_spec, eng_test);
      data_ok_ = true;
    } catch (const std::exception& e) {
      data_ok_ = false;
      data_error_ = e.what();
    }
  }

  void prepare_lasso() {
    const bool needed = std::any_of(methods_.begin(), methods_.end(), [](Method m) {
      return m == Method::lasso || is_lmc(m);
    });
    if (!needed || !data_ok_) return;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto eng = rng::make_engine(seed_for(kSeedCv));
      cv_ = cv_select(train_, opts_.lasso, eng);
    } catch (const std::exception& e) {
      cv_error_ = e.what();
    }
    cv_seconds_ = elapsed_seconds(t0);
  }

  LossState& state(LossKind loss) { return loss == LossKind::hinge ? hinge_ : logit_; }

  const LogDensityTarget& target(LossKind loss) {
    LossState& st = state(loss);
    if (!st.target) {
      GibbsConfig gc;
      gc.lambda = opts_.lambda * static_cast<double>(train_.n());
      gc.loss = loss;
      gc.prior = opts_.prior;
      st.target = make_gibbs_target(train_, gc);
    }
    return *st.target;
  }

  std::uint64_t mala_seed(LossKind loss) const {
    return seed_for(loss == LossKind::hinge ? kSeedMalaHinge : kSeedMalaLogit);
  }

  void run_full_mala(LossKind loss) {
    LossState& st = state(loss);
    const auto t0 = std::chrono::steady_clock::now();
    SamplerConfig cfg = opts_.chain;
    cfg.seed = mala_seed(loss);
    st.mala = mala_run(target(loss), CoefVector::Zero(spec_.d), cfg);
    st.mala_seconds = elapsed_seconds(t0);
  }

  // Step size the benchmark assigns to LMC: one tenth of MALA's adapted step.
  // When the full MALA chain was not requested, a burn-in-length prefix run
  // reproduces the same adapted value (adaptation only happens during burn-in).
  double adapted_step(LossKind loss) {
    LossState& st = state(loss);
    if (st.mala) return st.mala->step_size_trace.back();
    if (!st.calibrated_h) {
      const auto t0 = std::chrono::steady_clock::now();
      SamplerConfig cfg = opts_.chain;
      cfg.n_iter = cfg.burn_in + 1;
      cfg.thin = 1;
      cfg.seed = mala_seed(loss);
      Chain prefix = mala_run(target(loss), CoefVector::Zero(spec_.d), cfg);
      st.calibrated_h = prefix.step_size_trace.back();
      st.calibration_seconds += elapsed_seconds(t0);
    }
    return *st.calibrated_h;
  }

  CoefVector summarize(const Chain& chain, Method m) {
    if (!opts_.stochastic_draw) return posterior_mean(chain);
    auto eng = rng::make_engine(seed_for(kSeedDraw + static_cast<std::uint64_t>(m)));
    return sample_classifier(chain, eng);
  }

  double evaluate(Method m) {
    if (!data_ok_) throw DataError(data_error_);
    if (m == Method::lasso || is_lmc(m)) {
      if (!cv_) throw DataError(cv_error_);
    }
    CoefVector beta;
    if (m == Method::lasso) {
      beta = cv_->beta;
    } else if (is_mala(m)) {
      beta = summarize(*state(loss_of(m)).mala, m);
    } else {
      SamplerConfig cfg = opts_.chain;
      cfg.adapt = false;
      cfg.step_size = 0.1 * adapted_step(loss_of(m));
      cfg.seed = seed_for(m == Method::h_lmc ? kSeedLmcHinge : kSeedLmcLogit);
      Chain chain = lmc_run(target(loss_of(m)), cv_->beta, cfg);
      beta = summarize(chain, m);
    }
    return misclassification_rate(beta, test_) * 100.0;
  }

  // Shared work is charged to the cell that owns it: the CV fit to the Lasso
  // cell when present (else the first LMC cell), full MALA runs to their own
  // cells, calibration prefixes to the first LMC cell of that loss.
  double consume_charge(Method m) {
    double charge = 0.0;
    if (m == Method::lasso || (is_lmc(m) && !requested(Method::lasso))) {
      charge += cv_seconds_;
      cv_seconds_ = 0.0;
    }
    if (is_mala(m)) {
      charge += state(loss_of(m)).mala_seconds;
      state(loss_of(m)).mala_seconds = 0.0;
    }
    if (is_lmc(m)) {
      charge += state(loss_of(m)).calibration_seconds;
      state(loss_of(m)).calibration_seconds = 0.0;
    }
    return charge;
  }

  ScenarioSpec spec_;
  int rep_ = 0;
  const std::vector<Method>& methods_;
  const BenchmarkOptions& opts_;
  bool injected_ = false;

  SyntheticTruth truth_;
  LabeledDataset train_, test_;
  bool data_ok_ = false;
  std::string data_error_;
  std::optional<CvSelection> cv_;
  std::string cv_error_ = "logistic Lasso fit unavailable";
  double cv_seconds_ = 0.0;
  LossState hinge_, logit_;
};

}  // namespace

BenchmarkResult run_benchmark(const std::vector<ScenarioSpec>& scenarios,
                              const std::vector<Method>& methods, int replications,
                              const BenchmarkOptions& opts) {
  if (scenarios.empty()) throw std::invalid_argument("benchmark needs at least one scenario");
  if (methods.empty()) throw std::invalid_argument("benchmark needs at least one method");
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (opts.test_rows < 1) throw std::invalid_argument("test_rows must be at least 1");

  const std::size_t S = scenarios.size();
  const std::size_t M = methods.size();
  const std::size_t R = static_cast<std::size_t>(replications);
  std::vector<Slot> slots(S * M * R);

  const std::size_t tasks = S * R;
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t t = cursor.fetch_add(1);
      if (t >= tasks) break;
      const std::size_t si = t / R;
      const std::size_t rep = t % R;
      ReplicationRun run(scenarios[si], static_cast<int>(rep), methods, opts);
      run.execute(&slots[(si * M) * R + rep], R);
    }
  };

  const int n_threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(tasks)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BenchmarkResult result;
  result.cells.reserve(S * M);
  result.records.reserve(S * M * R);
  for (std::size_t si = 0; si < S; ++si) {
    const std::string name = scenario_name(scenarios[si]);
    for (std::size_t mj = 0; mj < M; ++mj) {
      BenchmarkCell cell;
      cell.scenario = name;
      cell.method = methods[mj];
      double sum = 0.0;
      for (std::size_t rep = 0; rep < R; ++rep) {
        const Slot& slot = slots[(si * M + mj) * R + rep];
        ReplicationRecord rec;
        rec.scenario = name;
        rec.method = methods[mj];
        rec.replication = static_cast<int>(rep);
        rec.pct = slot.pct;
        rec.ok = slot.ok;
        rec.error = slot.error;
        result.records.push_back(std::move(rec));
        cell.seconds += slot.seconds;
        if (slot.ok) {
          ++cell.reps;
          sum += slot.pct;
        } else {
          ++cell.failed;
        }
      }
      if (cell.reps > 0) {
        cell.mean_pct = sum / cell.reps;
        double ss = 0.0;
        for (std::size_t rep = 0; rep < R; ++rep) {
          const Slot& slot = slots[(si * M + mj) * R + rep];
          if (slot.ok) ss += (slot.pct - cell.mean_pct) * (slot.pct - cell.mean_pct);
        }
        cell.sd_pct = cell.reps > 1 ? std::sqrt(ss / (cell.reps - 1)) : 0.0;
      } else {
        cell.mean_pct = kNaN;
        cell.sd_pct = kNaN;
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

std::vector<TaskScore> score_split(const LabeledDataset& train, const LabeledDataset& test,
                                   const std::vector<Method>& methods,
                                   const BenchmarkOptions& opts, std::uint64_t seed,
                                   std::uint64_t task) {
  if (methods.empty()) throw std::invalid_argument("score_split needs at least one method");
  validate_dataset(train);
  validate_dataset(test);
  if (train.d() != test.d()) throw DimensionError(train.d(), test.d());

  std::vector<Slot> slots(methods.size());
  ReplicationRun run(train, test, seed, task, methods, opts);
  run.execute(slots.data(), 1);

  std::vector<TaskScore> scores(methods.size());
  for (std::size_t mj = 0; mj < methods.size(); ++mj) {
    scores[mj].method = methods[mj];
    scores[mj].pct = slots[mj].pct;
    scores[mj].ok = slots[mj].ok;
    scores[mj].error = slots[mj].error;
    scores[mj].seconds = slots[mj].seconds;
  }
  return scores;
}

void write_benchmark_csv(const BenchmarkResult& result, std::ostream& out) {
  out << "scenario,method,mean_pct,sd_pct,reps,seconds\n";
  char buf[160];
  for (const BenchmarkCell& cell : result.cells) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%d,%.3f", cell.mean_pct, cell.sd_pct, cell.reps,
                  cell.seconds);
    out << cell.scenario << ',' << method_name(cell.method) << ',' << buf << '\n';
  }
}

std::optional<RateKind> parse_rate_kind(const std::string& name) {
  if (name == "slow") return RateKind::slow;
  if (name == "fast") return RateKind::fast;
  if (name == "noiseless") return RateKind::noiseless;
  if (name == "slow_known_s") return RateKind::slow_known_s;
  if (name == "fast_known_s") return RateKind::fast_known_s;
  return std::nullopt;
}

double rate_bound(Index n, Index d, Index s_star, double eps, RateKind kind) {
  if (s_star < 1) throw std::invalid_argument("rate_bound requires s_star >= 1");
  if (s_star > n) throw std::invalid_argument("rate_bound requires s_star <= n");
  if (n >= d) throw std::invalid_argument("rate_bound requires n < d");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("rate_bound requires eps in (0,1)");

  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double s = static_cast<double>(s_star);
  const double log_eps = std::log(1.0 / eps);
  const double log_wide = std::log(nn * std::sqrt(dd) / s);
  const double log_known = std::log(dd * std::exp(1.0) / s);

  switch (kind) {
    case RateKind::slow:
      return s * std::sqrt(log_wide) / std::sqrt(nn) + log_eps / std::sqrt(nn * std::log(nn * dd));
    case RateKind::fast:
    case RateKind::noiseless:
      return (s * log_wide + log_eps) / nn;
    case RateKind::slow_known_s:
      return std::sqrt(s * log_known) / std::sqrt(nn) +
             log_eps / std::sqrt(nn * s * log_known);
    case RateKind::fast_known_s:
      return (s * log_known + log_eps) / nn;
  }
  throw std::invalid_argument("unknown rate kind");
}

}  // namespace ewa
