#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metamine/data_model.hpp"
#include "metamine/metric_learning.hpp"
#include "metamine/preference.hpp"
#include "metamine/recommend.hpp"

namespace metamine {

/// Everything a resampling protocol needs. Descriptors are raw; every fold
/// refits its own standardization on the training part.
struct MetaMiningData {
  DescriptorTable x;
  DescriptorTable a;
  PerformanceMatrix performance;
  PreferenceMatrix preference;
  // Pairwise outcomes behind R, aligned with x. When present, folds that
  // hold out a workflow rescore R as a tournament of the remaining workflows.
  std::optional<SignificanceTensor> pairwise;
};

enum class Protocol { Lodo, Lowo, Lodwo };

const char* to_string(Protocol protocol);
Protocol protocol_from_string(const std::string& name);

enum class Metric { Rho, T5p, Mae };

const char* to_string(Metric metric);

using ObjectiveSettings = presets::TaskPreset;

struct EvaluationConfig {
  std::vector<Strategy> strategies;
  ObjectiveSettings hyper;
  int ec_neighbors = 5;
  int top_k = 5;
  int jobs = 1;
};

struct StrategyOutcome {
  Strategy strategy = Strategy::Default;
  Vector predicted;
  std::optional<double> rho;
  std::optional<double> t5p;
  std::optional<double> mae;
  bool failed = false;
  std::string error;
  bool nonpositive_fallback = false;
  std::optional<Termination> termination;
  std::optional<TrainTrace> trace;  // of the fold model, for learning strategies
};

struct FoldResult {
  std::size_t index = 0;
  std::vector<std::string> held_out;  // dataset id, workflow id, or both
  Vector truth;
  std::vector<StrategyOutcome> outcomes;  // aligned with EvaluationReport::strategies

  const StrategyOutcome& outcome(Strategy s) const;
};

struct StrategyAggregate {
  Strategy strategy = Strategy::Default;
  std::optional<double> mean_rho;
  std::optional<double> mean_t5p;
  std::optional<double> mean_mae;
  std::size_t folds_evaluated = 0;
  std::size_t folds_failed = 0;
  std::size_t fallback_folds = 0;
};

struct Comparison {
  Strategy strategy = Strategy::Default;
  Strategy baseline = Strategy::Default;
  Metric metric = Metric::Rho;
  std::int64_t wins = 0;
  std::int64_t total = 0;
  double p_value = 1.0;
};

struct EvaluationReport {
  Protocol protocol = Protocol::Lodo;
  std::vector<Strategy> strategies;
  std::vector<std::string> notices;
  std::vector<FoldResult> folds;
  std::vector<StrategyAggregate> aggregates;
  std::vector<Comparison> comparisons;

  bool has(Strategy s) const;
  const StrategyAggregate& aggregate(Strategy s) const;
  std::optional<Comparison> comparison(Strategy s, Strategy baseline, Metric metric) const;
};

/// Training/held-out split for one fold. Training descriptors are raw.
struct FoldSplit {
  DescriptorTable x_train;
  DescriptorTable a_train;
  Matrix r_train;
  std::vector<std::size_t> held_out_datasets;   // indices into the full data
  std::vector<std::size_t> held_out_workflows;
};

std::size_t fold_count(const MetaMiningData& data, Protocol protocol);
FoldSplit make_fold(const MetaMiningData& data, Protocol protocol, std::size_t fold);

/// Model a learning strategy would use in the given fold.
FittedModel train_fold_model(const MetaMiningData& data, Protocol protocol, std::size_t fold,
                             ObjectiveKind kind, const HyperParams& hyper);

/// Strategies that can be run under the protocol.
bool applicable(Strategy strategy, Protocol protocol);

/// Mean true performance of the k workflows with the highest predicted scores.
double top_k_performance(const Vector& predicted, const Vector& perf_row, int k);

/// Exact two-sided sign test under p = 0.5.
double binomial_sign_test(std::int64_t wins, std::int64_t total);

/// Wins counted per fold by strict improvement (higher rho/t5p, lower mae).
/// Folds where either side lacks the metric are skipped; nullopt when none remain.
std::optional<Comparison> compare_strategies(const EvaluationReport& report, Strategy strategy,
                                             Strategy baseline, Metric metric);

EvaluationReport run_protocol(const MetaMiningData& data, Protocol protocol,
                              const EvaluationConfig& config);

inline EvaluationReport run_lodo(const MetaMiningData& data, const EvaluationConfig& config) {
  return run_protocol(data, Protocol::Lodo, config);
}
inline EvaluationReport run_lowo(const MetaMiningData& data, const EvaluationConfig& config) {
  return run_protocol(data, Protocol::Lowo, config);
}
inline EvaluationReport run_lodwo(const MetaMiningData& data, const EvaluationConfig& config) {
  return run_protocol(data, Protocol::Lodwo, config);
}

nlohmann::json report_to_json(const EvaluationReport& report);

/// Plain-text table: one value row per strategy followed by its delta rows
/// against def and EC ("wins/total p=...").
std::string report_to_table(const EvaluationReport& report);

}  // namespace metamine
