#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ewa/lasso.hpp"
#include "ewa/prior.hpp"
#include "ewa/rng.hpp"
#include "ewa/samplers.hpp"
#include "ewa/types.hpp"

namespace ewa {

enum class Setting { I, II };

// Purpose tags for rng::derive(master, task, purpose).  Every concern of a
// replication (truth, labels, each chain, the CV shuffle) owns its own
// stream, so replications are order-independent and any benchmark dataset
// can be recreated in isolation.
namespace stream {
inline constexpr std::uint64_t kTruth = 1;
inline constexpr std::uint64_t kTrain = 2;
inline constexpr std::uint64_t kTest = 3;
inline constexpr std::uint64_t kCv = 4;
inline constexpr std::uint64_t kMalaHinge = 5;
inline constexpr std::uint64_t kLmcHinge = 6;
inline constexpr std::uint64_t kMalaLogit = 7;
inline constexpr std::uint64_t kLmcLogit = 8;
inline constexpr std::uint64_t kStandin = 9;
inline constexpr std::uint64_t kSplit = 10;
inline constexpr std::uint64_t kDraw = 16;  // + method index
}  // namespace stream

// One simulation scenario. The variant selects the label noise:
//   1         -> Z = 1,              N = 0
//   I.2, II.3 -> Z = 1,              N ~ N(0,1)
//   I.3, II.2 -> Z ~ 0.9 d1 + 0.1 d-1, N = 0
//   4         -> both noise sources
struct ScenarioSpec {
  Setting setting = Setting::I;
  int variant = 1;
  Index n = 50;
  Index d = 100;
  Index s0 = 10;
  std::uint64_t seed = 0;
};

bool scenario_has_gaussian_noise(const ScenarioSpec& spec);
bool scenario_has_label_flip(const ScenarioSpec& spec);

std::optional<ScenarioSpec> parse_scenario(const std::string& name);
std::string scenario_name(const ScenarioSpec& spec);

struct SyntheticTruth {
  CoefVector beta_star;
  std::vector<Index> support;
  LabeledDataset dataset;
};

SyntheticTruth gen_truth(const ScenarioSpec& spec, rng::Engine& engine);

LabeledDataset gen_labels(const SyntheticTruth& truth, const ScenarioSpec& spec,
                          rng::Engine& engine);

enum class Method { h_lmc, h_mala, logit_lmc, logit_mala, lasso };

std::string method_name(Method method);
std::optional<Method> parse_method(const std::string& name);

struct BenchmarkOptions {
  SamplerConfig chain;
  double lambda = 1.0;
  PriorConfig prior;
  LassoConfig lasso;
  Index test_rows = 2000;
  bool stochastic_draw = false;
  int threads = 1;
};

struct ReplicationRecord {
  std::string scenario;
  Method method;
  int replication = 0;
  double pct = 0.0;
  bool ok = false;
  std::string error;
};

struct BenchmarkCell {
  std::string scenario;
  Method method;
  double mean_pct = 0.0;
  double sd_pct = 0.0;
  int reps = 0;
  int failed = 0;
  double seconds = 0.0;
};

struct BenchmarkResult {
  std::vector<BenchmarkCell> cells;
  std::vector<ReplicationRecord> records;
};

BenchmarkResult run_benchmark(const std::vector<ScenarioSpec>& scenarios,
                              const std::vector<Method>& methods, int replications,
                              const BenchmarkOptions& opts);

struct TaskScore {
  Method method;
  double pct = 0.0;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
};

// Fits the requested methods on one externally supplied (train, test) pair,
// sharing the Lasso fit and MALA chains between methods exactly as
// run_benchmark replications do.  Streams are derived from (seed, task), so
// tasks are order-independent.
std::vector<TaskScore> score_split(const LabeledDataset& train, const LabeledDataset& test,
                                   const std::vector<Method>& methods,
                                   const BenchmarkOptions& opts, std::uint64_t seed,
                                   std::uint64_t task);

void write_benchmark_csv(const BenchmarkResult& result, std::ostream& out);

enum class RateKind { slow, fast, noiseless, slow_known_s, fast_known_s };

std::optional<RateKind> parse_rate_kind(const std::string& name);

double rate_bound(Index n, Index d, Index s_star, double eps, RateKind kind);

}  // namespace ewa
