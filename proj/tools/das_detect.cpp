// das_detect: data-aided sensing simulator for distributed detection.
//
//   das_detect simulate [--model M] [--strategy S|all] [--true-hyp N|all] ... --out DIR
//   das_detect verify [--dim N] [--cases N] [--seed N]
//   das_detect export-model [--model M] [--K N] [--snr-db X] ... --out FILE
//
// Exit codes: 0 success, 1 numeric or gated failure, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "das/error.hpp"
#include "das/simulate.hpp"
#include "das/verify.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void add_model_flags(CLI::App& cmd, das::SimulateOptions& o, std::optional<double>& amplitude,
                     std::optional<double>& variance) {
  cmd.add_option("--model", o.model, "sinusoidal-ar1, iid-antipodal, or file:PATH")->capture_default_str();
  cmd.add_option("--K", o.sensors, "Number of sensors")->capture_default_str();
  cmd.add_option("--snr-db", o.snr_db, "SNR = A^2 / (2 sigma^2) in dB")->capture_default_str();
  cmd.add_option("--amplitude", amplitude, "Mean amplitude A (default: from SNR with sigma^2 = 1)");
  cmd.add_option("--variance", variance, "Noise variance sigma^2");
  cmd.add_option("--rho", o.rho, "AR(1) correlation per hypothesis (default 0.75 -0.75)");
}

int thread_count(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("DAS_DETECT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;
}

int run_simulate(das::SimulateOptions opts, const std::string& manifest, const std::string& out) {
  das::ResolvedSimulation sim;
  try {
    nlohmann::ordered_json recorded;
    if (!manifest.empty()) {
      std::ifstream in(manifest);
      recorded = nlohmann::ordered_json::parse(in).at("config");
      const int threads = opts.threads;
      opts = das::options_from_config(recorded);
      opts.threads = threads;
    }
    sim = das::resolve(opts);
    // A model file edited since the manifest was written changes its hash.
    if (!manifest.empty() && recorded != sim.config) {
      std::cerr << "error: manifest config does not match the resolved run\n";
      return kExitUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    for (const auto& p : das::simulate_to_directory(sim, out)) std::cout << "wrote " << p.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}

int run_verify(const das::VerifyOptions& opts) {
  std::vector<das::SuiteResult> results;
  try {
    results = das::run_verification(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  for (const auto& r : results) {
    const char* status = !r.gated ? "REPORT" : r.passed ? "PASS" : "FAIL";
    std::printf("%-6s %-20s cases=%-4zu max_error=%.3e", status, r.name.c_str(), r.cases, r.max_error);
    if (r.gated) std::printf(" tolerance=%.1e", r.tolerance);
    std::printf("\n");
  }
  return das::all_gated_passed(results) ? 0 : kExitFailure;
}

int run_export(const das::SimulateOptions& opts, const std::string& out) {
  das::HypothesisModel model = [&] {
    try {
      return das::resolve_model(opts);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      std::exit(kExitUsage);
    }
  }();
  try {
    das::save_model(out, model);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-aided sensing for distributed detection"};
  app.set_version_flag("--version", das::kToolVersion);
  app.require_subcommand(1);

  das::SimulateOptions sim_opts;
  std::optional<double> sim_amplitude, sim_variance;
  std::string sim_out, sim_manifest;
  bool no_trace = false;
  auto* simulate = app.add_subcommand("simulate", "Run Monte Carlo LLR trajectories");
  add_model_flags(*simulate, sim_opts, sim_amplitude, sim_variance);
  simulate->add_option("--strategy", sim_opts.strategy, "random, entropy-das, mse-das, j-das, or all")
      ->capture_default_str();
  simulate->add_option("--true-hyp", sim_opts.true_hyp, "1-based true hypothesis, or all")->capture_default_str();
  simulate->add_option("--trials", sim_opts.trials, "Monte Carlo trials")->capture_default_str()->check(
      CLI::PositiveNumber);
  simulate->add_option("--rounds", sim_opts.rounds, "Uploads per trial (default K)");
  simulate->add_option("--seed", sim_opts.seed, "Root seed")->capture_default_str();
  simulate->add_option("--threads", sim_opts.threads, "Worker threads (env DAS_DETECT_THREADS)");
  simulate->add_flag("--no-trace", no_trace, "Skip selection_trace.csv");
  simulate->add_option("--manifest", sim_manifest, "Re-run the config recorded in a manifest.json")
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "Output directory")->required();

  das::VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Run the oracle suites");
  verify->add_option("--dim", verify_opts.dim, "Largest matrix dimension")->capture_default_str()->check(
      CLI::Range(1, 512));
  verify->add_option("--cases", verify_opts.cases, "Cases per suite")->capture_default_str()->check(
      CLI::PositiveNumber);
  verify->add_option("--seed", verify_opts.seed, "Seed")->capture_default_str();
  verify->add_option("--tolerance-scale", verify_opts.tolerance_scale)->group("");

  das::SimulateOptions export_opts;
  std::optional<double> export_amplitude, export_variance;
  std::string export_out;
  auto* export_model = app.add_subcommand("export-model", "Write a benchmark model in the model file format");
  add_model_flags(*export_model, export_opts, export_amplitude, export_variance);
  export_model->add_option("--out", export_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*simulate) {
    sim_opts.amplitude = sim_amplitude;
    sim_opts.variance = sim_variance;
    sim_opts.trace = !no_trace;
    sim_opts.threads = thread_count(sim_opts.threads);
    return run_simulate(sim_opts, sim_manifest, sim_out);
  }
  if (*verify) return run_verify(verify_opts);
  export_opts.amplitude = export_amplitude;
  export_opts.variance = export_variance;
  return run_export(export_opts, export_out);
}
