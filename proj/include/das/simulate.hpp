#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "das/harness.hpp"
#include "das/model.hpp"

namespace das {

inline constexpr const char* kToolVersion = "1.0.0";

/// Flag values for `simulate` and `export-model`, before defaults are
/// resolved.
struct SimulateOptions {
  std::string model = "sinusoidal-ar1";  // sinusoidal-ar1 | iid-antipodal | file:PATH
  std::string strategy = "all";          // a strategy name or "all"
  std::string true_hyp = "all";          // 1-based index or "all"
  std::size_t trials = 500;
  std::size_t rounds = 0;  // 0 means K
  double snr_db = 0.0;
  std::size_t sensors = 50;
  std::optional<double> amplitude;
  std::optional<double> variance;
  std::vector<double> rho;  // empty means +3/4, -3/4
  std::uint64_t seed = 1;
  int threads = 0;
  bool trace = true;
};

/// Everything a run needs, with all defaults filled in.
struct ResolvedSimulation {
  std::shared_ptr<const HypothesisModel> model;
  std::vector<StrategyKind> strategies;
  std::vector<std::size_t> truths;  // 0-based
  MonteCarloConfig base;
  bool trace = true;
  nlohmann::ordered_json config;  // the manifest's "config" block
};

/// Builds or loads the model the options describe.
HypothesisModel resolve_model(const SimulateOptions& opts);
/// Throws das::Error on any invalid flag combination.
ResolvedSimulation resolve(const SimulateOptions& opts);
/// Inverse of ResolvedSimulation::config.
SimulateOptions options_from_config(const nlohmann::ordered_json& config);

struct SimulationOutput {
  std::string trajectories_csv;
  std::string trace_csv;  // empty when tracing is off
  std::vector<MonteCarloRun> runs;
};

SimulationOutput run_simulation(const ResolvedSimulation& sim);

/// Runs and writes trajectories.csv, selection_trace.csv and manifest.json
/// into `out`. Nothing is left behind on failure. Returns the files written.
std::vector<std::filesystem::path> simulate_to_directory(const ResolvedSimulation& sim,
                                                         const std::filesystem::path& out);

/// Reads the "config" block of a manifest written by simulate_to_directory.
SimulateOptions options_from_manifest(const std::filesystem::path& manifest);

/// Full-precision decimal text ("%.17g"); NaN is written as "nan".
std::string format_real(double v);

}  // namespace das
