#include "das/harness.hpp"

#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include <omp.h>

#include "das/detector.hpp"
#include "das/error.hpp"
#include "das/gaussian.hpp"

namespace das {

namespace {
constexpr std::uint64_t kMeasurementStream = 0;
constexpr std::uint64_t kSelectionStream = 1;
}  // namespace

std::size_t MonteCarloConfig::resolved_rounds() const {
  return rounds == 0 && model ? model->sensors() : rounds;
}

void MonteCarloConfig::validate() const {
  if (!model) throw Error(ErrorCode::InvalidArgument, "no model");
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  const std::size_t t = resolved_rounds();
  if (t < 1 || t > model->sensors())
    throw Error(ErrorCode::InvalidArgument, "rounds must be in 1.." + std::to_string(model->sensors()));
  if (true_hypothesis >= model->hypotheses())
    throw Error(ErrorCode::InvalidArgument, "true hypothesis must be in 1.." + std::to_string(model->hypotheses()));
}

Vector sample_trial(const HypothesisModel& model, std::size_t truth, std::uint64_t seed, std::size_t trial) {
  RandomStream stream = RandomStream::derive(seed, trial, kMeasurementStream);
  return sample_mvn(model.mean(truth), model.chol(truth), stream);
}

std::uint64_t hash_values(std::span<const double> values) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (double v : values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

TrialResult run_trial(const MonteCarloConfig& cfg, std::size_t trial) {
  const HypothesisModel& model = *cfg.model;
  const std::size_t rounds = cfg.resolved_rounds();
  TrialResult result;
  try {
    const Vector z = sample_trial(model, cfg.true_hypothesis, cfg.seed, trial);
    result.sample_hash = hash_values(z);
    RandomStream selection_stream = RandomStream::derive(cfg.seed, trial, kSelectionStream);
    SelectionState state(model);
    LikelihoodAccumulator acc(model.hypotheses());
    result.order.reserve(rounds);
    result.llr.reserve(rounds);
    result.chosen_scores.reserve(rounds);
    for (std::size_t r = 0; r < rounds; ++r) {
      ScoreReport report = select(cfg.strategy, state, selection_stream, Execution::Serial);
      const std::size_t k = report.chosen;
      acc.add(state, k, z[k]);
      state.observe(k, z[k]);
      result.order.push_back(k);
      result.llr.push_back(acc.margin_vs_alternatives(cfg.true_hypothesis));
      result.chosen_scores.push_back(report.chosen_score().value_or(std::numeric_limits<double>::quiet_NaN()));
      if (cfg.keep_reports) result.reports.push_back(std::move(report));
    }
  } catch (const Error& e) {
    throw Error(e.code(), "trial " + std::to_string(trial + 1) + ": " + e.what());
  }
  return result;
}

double TrajectoryAggregate::stderr_at(std::size_t l) const {
  return stddev.at(l) / std::sqrt(static_cast<double>(trials));
}

TrajectoryAggregate aggregate(const std::vector<std::vector<double>>& trajectories) {
  if (trajectories.empty()) throw Error(ErrorCode::EmptyInput, "no trajectories to aggregate");
  const std::size_t len = trajectories.front().size();
  for (const auto& t : trajectories)
    if (t.size() != len) throw Error(ErrorCode::DimensionMismatch, "trajectories differ in length");
  const auto n = static_cast<double>(trajectories.size());
  TrajectoryAggregate agg;
  agg.trials = trajectories.size();
  agg.mean.assign(len, 0.0);
  agg.stddev.assign(len, 0.0);
  for (std::size_t l = 0; l < len; ++l) {
    double sum = 0.0;
    for (const auto& t : trajectories) sum += t[l];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& t : trajectories) ss += (t[l] - mean) * (t[l] - mean);
    agg.mean[l] = mean;
    agg.stddev[l] = trajectories.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return agg;
}

MonteCarloRun run_monte_carlo(const MonteCarloConfig& cfg, Execution exec) {
  cfg.validate();
  MonteCarloRun run{cfg.strategy, cfg.true_hypothesis, std::vector<TrialResult>(cfg.trials), {}};
  const auto n = static_cast<std::ptrdiff_t>(cfg.trials);

  if (exec == Execution::Serial) {
    for (std::ptrdiff_t t = 0; t < n; ++t) run.trials[t] = run_trial(cfg, static_cast<std::size_t>(t));
  } else {
    const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
    std::vector<std::exception_ptr> failures(cfg.trials);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t t = 0; t < n; ++t) {
      try {
        run.trials[t] = run_trial(cfg, static_cast<std::size_t>(t));
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

  std::vector<std::vector<double>> llrs;
  llrs.reserve(run.trials.size());
  for (const auto& t : run.trials) llrs.push_back(t.llr);
  run.summary = aggregate(llrs);
  return run;
}

std::vector<MonteCarloRun> compare_strategies(const MonteCarloConfig& cfg, const std::vector<StrategyKind>& strategies,
                                              Execution exec) {
  if (strategies.empty()) throw Error(ErrorCode::EmptyInput, "no strategies to compare");
  std::vector<MonteCarloRun> runs;
  runs.reserve(strategies.size());
  for (StrategyKind kind : strategies) {
    MonteCarloConfig c = cfg;
    c.strategy = kind;
    runs.push_back(run_monte_carlo(c, exec));
  }
  return runs;
}

}  // namespace das
