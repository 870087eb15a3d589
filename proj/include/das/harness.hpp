#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "das/model.hpp"
#include "das/selection.hpp"

namespace das {

struct MonteCarloConfig {
  std::shared_ptr<const HypothesisModel> model;
  StrategyKind strategy = StrategyKind::JDas;
  std::size_t true_hypothesis = 0;  // 0-based
  std::size_t trials = 500;
  std::size_t rounds = 0;  // 0 means all sensors
  std::uint64_t seed = 1;
  /// Worker cap for trial-level parallelism; 0 uses the OpenMP default.
  int threads = 0;
  bool keep_reports = false;

  std::size_t resolved_rounds() const;
  /// Throws InvalidArgument on an inconsistent configuration.
  void validate() const;
};

struct TrialResult {
  std::vector<std::size_t> order;  // 0-based sensors in upload order
  /// Truth-vs-alternative LLR after each round (index 0 is after round 1).
  std::vector<double> llr;
  /// Score of the chosen sensor per round; NaN for random selection.
  std::vector<double> chosen_scores;
  std::vector<ScoreReport> reports;  // filled only with keep_reports
  std::uint64_t sample_hash = 0;     // hash of the sampled measurement vector
};

/// Full measurement vector of one trial drawn under `truth`. Depends on
/// (seed, trial) only, so every strategy sees the same data.
Vector sample_trial(const HypothesisModel& model, std::size_t truth, std::uint64_t seed, std::size_t trial);

std::uint64_t hash_values(std::span<const double> values) noexcept;

TrialResult run_trial(const MonteCarloConfig& cfg, std::size_t trial);

struct TrajectoryAggregate {
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation (n-1); 0 for one trial
  std::size_t trials = 0;

  double stderr_at(std::size_t l) const;
};

/// Pointwise mean and standard deviation. Throws EmptyInput on no input and
/// DimensionMismatch on ragged input.
TrajectoryAggregate aggregate(const std::vector<std::vector<double>>& trajectories);

struct MonteCarloRun {
  StrategyKind strategy;
  std::size_t true_hypothesis;
  std::vector<TrialResult> trials;
  TrajectoryAggregate summary;
};

/// Runs every trial. Parallel execution spreads trials over OpenMP threads;
/// the serial path is the reference and both give identical results.
MonteCarloRun run_monte_carlo(const MonteCarloConfig& cfg, Execution exec = Execution::Parallel);

/// Runs each strategy on the same sampled measurements (common random
/// numbers), overriding cfg.strategy.
std::vector<MonteCarloRun> compare_strategies(const MonteCarloConfig& cfg, const std::vector<StrategyKind>& strategies,
                                              Execution exec = Execution::Parallel);

}  // namespace das
