// Serial vs OpenMP timings for the two parallel kernels: per-round candidate
// scoring (J-DAS) and trial-level Monte Carlo.
//
//   bench_kernels [K] [trials]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>

#include <omp.h>

#include "das/harness.hpp"
#include "das/model.hpp"
#include "das/selection.hpp"

namespace {

template <typename F>
double seconds(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

double full_jdas_run(const das::HypothesisModel& model, das::Execution exec) {
  das::SelectionState state(model);
  double checksum = 0.0;
  for (std::size_t r = 0; r < model.sensors() / 2; ++r) {
    const auto report = das::select_jdas(state, exec);
    checksum += *report.chosen_score();
    state.observe(report.chosen, 0.1 * static_cast<double>(r));
  }
  return checksum;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t k = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 256;
  const std::size_t trials = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 200;
  std::printf("threads available: %d\n", omp_get_max_threads());

  das::BenchmarkSpec spec;
  spec.sensors = k;
  const das::HypothesisModel model = das::build_sinusoidal_ar1(spec);

  volatile double sink = 0.0;
  const double score_serial = seconds([&] { sink = full_jdas_run(model, das::Execution::Serial); }, 3);
  const double score_parallel = seconds([&] { sink = full_jdas_run(model, das::Execution::Parallel); }, 3);
  std::printf("j-das scoring, K=%zu, K/2 rounds: serial %.4fs  parallel %.4fs  speedup %.2fx\n", k, score_serial,
              score_parallel, score_serial / score_parallel);

  spec.sensors = 50;
  das::MonteCarloConfig cfg;
  cfg.model = std::make_shared<const das::HypothesisModel>(das::build_sinusoidal_ar1(spec));
  cfg.trials = trials;
  const double mc_serial = seconds([&] { sink = das::run_monte_carlo(cfg, das::Execution::Serial).summary.mean.back(); }, 1);
  const double mc_parallel =
      seconds([&] { sink = das::run_monte_carlo(cfg, das::Execution::Parallel).summary.mean.back(); }, 1);
  std::printf("monte carlo, K=50, %zu trials j-das: serial %.4fs  parallel %.4fs  speedup %.2fx\n", trials, mc_serial,
              mc_parallel, mc_serial / mc_parallel);
  return 0;
}
