// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "das/detector.hpp"
#include "das/harness.hpp"
#include "das/selection.hpp"
#include "das/verify.hpp"
#include "oracles.hpp"

using namespace das;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::shared_ptr<const HypothesisModel> benchmark_model(ModelFamily family) {
  BenchmarkSpec spec;  // K = 50, SNR = 0 dB, rho = +/-3/4, sigma^2 = 1
  spec.family = family;
  return std::make_shared<const HypothesisModel>(build_benchmark(spec));
}

struct Paired {
  double mean;
  double se;
};

Paired paired(const MonteCarloRun& a, const MonteCarloRun& b, std::size_t l) {
  const std::size_t n = a.trials.size();
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = a.trials[t].llr[l] - b.trials[t].llr[l];
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / double(n);
  const double var = (sum2 - double(n) * mean * mean) / double(n - 1);
  return {mean, std::sqrt(std::max(var, 0.0) / double(n))};
}

// 1. J-DAS beats random and entropy DAS on rounds 5..25 under both truths.
Outcome strategy_ordering() {
  const auto start = std::chrono::steady_clock::now();
  MonteCarloConfig cfg;
  cfg.model = benchmark_model(ModelFamily::SinusoidalAr1);
  cfg.trials = 500;
  cfg.seed = 2020;
  double worst_ratio = 1e300;
  std::string worst;
  for (std::size_t truth : {0u, 1u}) {
    cfg.true_hypothesis = truth;
    const auto runs = compare_strategies(cfg, {StrategyKind::JDas, StrategyKind::Random, StrategyKind::EntropyDas});
    for (std::size_t other : {1u, 2u}) {
      for (std::size_t round = 5; round <= 25; ++round) {
        const Paired p = paired(runs[0], runs[other], round - 1);
        const double ratio = p.mean / p.se;
        if (ratio < worst_ratio) {
          worst_ratio = ratio;
          worst = fmt("theta%zu vs %s round %zu: diff %.3f, paired SE %.3f", truth + 1,
                      std::string(to_string(runs[other].strategy)).c_str(), round, p.mean, p.se);
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst_ratio > 2.0 && secs < 60.0,
          fmt("min diff/SE = %.2f (need > 2; %s); %.1f s (need < 60)", worst_ratio, worst.c_str(), secs)};
}

// 2. iid antipodal: strategies agree within 3 SE, and exactly at round K.
Outcome iid_equivalence() {
  MonteCarloConfig cfg;
  cfg.model = benchmark_model(ModelFamily::IidAntipodal);
  cfg.trials = 500;
  cfg.seed = 2021;
  double worst = 0.0;
  std::size_t mismatches = 0;
  for (std::size_t truth : {0u, 1u}) {
    cfg.true_hypothesis = truth;
    const auto runs = compare_strategies(cfg, {StrategyKind::Random, StrategyKind::EntropyDas, StrategyKind::JDas});
    for (std::size_t l = 0; l < 50; ++l) {
      double lo = 1e300, hi = -1e300, se = 0.0;
      for (const auto& r : runs) {
        lo = std::min(lo, r.summary.mean[l]);
        hi = std::max(hi, r.summary.mean[l]);
        se = std::max(se, r.summary.stderr_at(l));
      }
      worst = std::max(worst, (hi - lo) / se);
    }
    for (std::size_t t = 0; t < cfg.trials; ++t)
      for (const auto& r : runs)
        if (r.trials[t].llr.back() != runs[0].trials[t].llr.back()) ++mismatches;
  }
  return {worst < 3.0 && mismatches == 0,
          fmt("max spread = %.2f SE (need < 3); round-K per-trial mismatches = %zu (need 0)", worst, mismatches)};
}

// 3. Sequential LLR equals batch LLR on the uploaded subset at every round.
Outcome telescoping() {
  RandomStream s(303);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t k = 1 + s.next_index(32);
    const std::size_t q = 2 + s.next_index(2);
    const HypothesisModel m = random_model(k, q, s);
    const std::size_t truth = s.next_index(q);
    const Vector z = sample_mvn(m.mean(truth), m.chol(truth), s);
    const auto kind = static_cast<StrategyKind>(c % 4);
    SelectionState st(m);
    LikelihoodAccumulator acc(q);
    Vector values;
    while (st.round() < k) {
      const std::size_t node = select(kind, st, s).chosen;
      acc.add(st, node, z[node]);
      st.observe(node, z[node]);
      values.push_back(z[node]);
      for (std::size_t h = 0; h < q; ++h) {
        if (h == truth) continue;
        const double batch =
            batch_loglik(m, truth, st.uploaded(), values) - batch_loglik(m, h, st.uploaded(), values);
        worst = std::max(worst, std::abs(acc.llr(truth, h) - batch));
      }
    }
  }
  return {worst < 1e-8, fmt("max |sequential - batch| = %.3e over 100 models (need < 1e-8)", worst)};
}

// 4. Scalar conditioning and inverse extension against dense Eigen solves.
Outcome conditioning() {
  RandomStream s(404);
  double worst_cond = 0.0, worst_inv = 0.0;
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 2 + s.next_index(63);
    const HypothesisModel m = random_model(n, 2, s);
    const Vector z = sample_mvn(m.mean(1), m.chol(1), s);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[s.next_index(i)]);
    const std::size_t l = 1 + s.next_index(n - 1);
    std::vector<std::size_t> obs(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(l));
    Vector vals, cross, prior;
    for (std::size_t i : obs) vals.push_back(z[i]);
    const std::size_t k = order[l];
    for (std::size_t i : obs) {
      cross.push_back(m.cov(0)(i, k));
      prior.push_back(m.mean(0)[i]);
    }
    const auto got =
        condition_scalar({m.cov(0)(k, k), cross, m.mean(0)[k], prior}, vals, cholesky(m.cov(0).restrict(obs)));
    const auto want = oracle::condition(m, 0, obs, vals, k);
    worst_cond = std::max({worst_cond, std::abs(got.mean - want.mean), std::abs(got.variance - want.variance)});

    const SymMatrix full = m.cov(0).restrict(order);
    SymMatrix inv;
    for (std::size_t i = 0; i < n; ++i) {
      Vector row(full.row(i).begin(), full.row(i).begin() + static_cast<std::ptrdiff_t>(i));
      inv = extend_inverse(inv, row, full(i, i));
    }
    worst_inv = std::max(worst_inv, oracle::max_abs(inv, oracle::to_eigen(full).inverse()));
  }
  return {worst_cond < 1e-9 && worst_inv < 1e-9,
          fmt("condition_scalar max err %.3e, extend_inverse max err %.3e (need < 1e-9)", worst_cond, worst_inv)};
}

// 5. KL closed form against grid integration; J symmetric and non-negative.
Outcome divergence() {
  RandomStream s(505);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    const double mp = -3 + 6 * s.next_uniform(), sp = 0.3 + 2.7 * s.next_uniform();
    const double mr = -3 + 6 * s.next_uniform(), sr = 0.3 + 2.7 * s.next_uniform();
    const double got = kl_gauss({mp, sp * sp}, {mr, sr * sr});
    worst = std::max(worst, std::abs(got - oracle::kl_trapezoid(mp, sp * sp, mr, sr * sr, 1e-3)));
  }
  std::size_t violations = 0, checked = 0;
  for (int c = 0; c < 50; ++c) {
    const std::size_t n = 2 + s.next_index(20);
    const HypothesisModel m = random_model(n, 2, s);
    const HypothesisModel w({m.label(1), m.label(0)}, {m.mean(1), m.mean(0)}, {m.cov(1), m.cov(0)});
    const Vector z = sample_mvn(m.mean(0), m.chol(0), s);
    SelectionState a(m), b(w);
    const std::size_t l = s.next_index(n);
    for (std::size_t i = 0; i < l; ++i) {
      a.observe(i, z[i]);
      b.observe(i, z[i]);
    }
    for (std::size_t k = l; k < n; ++k, ++checked) {
      const double ja = j_divergence_score(a, k), jb = j_divergence_score(b, k);
      if (!(ja >= 0.0) || std::abs(ja - jb) > 1e-12 * std::max(1.0, ja)) ++violations;
    }
  }
  return {worst < 1e-6 && violations == 0,
          fmt("KL max |closed - grid| = %.3e (need < 1e-6); J symmetry/non-negativity violations %zu of %zu", worst,
              violations, checked)};
}

// 6. Entropy DAS and MSE DAS choose the same node with the same tie set.
Outcome entropy_mse() {
  RandomStream s(606);
  auto ties = [](const ScoreReport& r) {
    double best = -1e300;
    for (const auto& [k, v] : r.scores) best = std::max(best, v);
    std::set<std::size_t> out;
    for (const auto& [k, v] : r.scores)
      if (best - v <= kTieRelTol * std::max(1.0, std::abs(best))) out.insert(k);
    return out;
  };
  std::size_t agree = 0;
  const std::size_t total = 100;
  for (std::size_t c = 0; c < total; ++c) {
    const std::size_t n = 2 + s.next_index(30);
    const HypothesisModel m = random_model(n, 2 + s.next_index(2), s);
    const Vector z = sample_mvn(m.mean(0), m.chol(0), s);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[s.next_index(i)]);
    SelectionState st(m);
    const std::size_t l = s.next_index(n);
    for (std::size_t i = 0; i < l; ++i) st.observe(order[i], z[order[i]]);
    const ScoreReport e = select_entropy_das(st), v = select_mse_das(st);
    if (e.chosen == v.chosen && ties(e) == ties(v)) ++agree;
  }
  return {agree == total, fmt("%zu / %zu identical choices and tie sets (need 100%%)", agree, total)};
}

// 7. iid antipodal, A = 1, sigma^2 = 1: mean LLR after l rounds is 2l.
Outcome iid_mean() {
  BenchmarkSpec spec;
  spec.family = ModelFamily::IidAntipodal;
  spec.amplitude = 1.0;
  spec.variance = 1.0;
  MonteCarloConfig cfg;
  cfg.model = std::make_shared<const HypothesisModel>(build_benchmark(spec));
  cfg.strategy = StrategyKind::Random;
  cfg.trials = 10000;
  cfg.seed = 707;
  const MonteCarloRun run = run_monte_carlo(cfg);
  double worst = 0.0;
  for (std::size_t l = 0; l < 50; ++l)
    worst = std::max(worst, std::abs(run.summary.mean[l] - 2.0 * double(l + 1)) / run.summary.stderr_at(l));
  return {worst < 3.0, fmt("max |mean - 2l| = %.2f SE over l <= 50 (need < 3)", worst)};
}

// 8. J-DAS wall time for T = K/4 rounds scales like K T^3 (x16 per doubling).
Outcome complexity() {
  const std::vector<std::size_t> sizes{64, 128, 256};
  std::vector<double> times;
  for (std::size_t k : sizes) {
    BenchmarkSpec spec;
    spec.sensors = k;
    const HypothesisModel m = build_sinusoidal_ar1(spec);
    RandomStream s(808);
    const Vector z = sample_mvn(m.mean(0), m.chol(0), s);
    double best = 1e300;
    for (int rep = 0; rep < 7; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      SelectionState st(m);
      for (std::size_t r = 0; r < k / 4; ++r) {
        const std::size_t node = select_jdas(st, Execution::Serial).chosen;
        st.observe(node, z[node]);
      }
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    times.push_back(best);
  }
  bool ok = true;
  std::string detail = fmt("times %.2e / %.2e / %.2e s;", times[0], times[1], times[2]);
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    const double kt3 = [&](std::size_t k) { return double(k) * std::pow(double(k) / 4, 3); }(sizes[i]) /
                       [&](std::size_t k) { return double(k) * std::pow(double(k) / 4, 3); }(sizes[i - 1]);
    const double measured = times[i] / times[i - 1];
    ok = ok && measured >= kt3 / 2 && measured <= kt3 * 2;
    detail += fmt(" K %zu->%zu ratio %.1f (predicted %.0f, need within x2)", sizes[i - 1], sizes[i], measured, kt3);
  }
  return {ok, detail};
}

int shell(const std::string& args) {
  const int status = std::system((std::string(DAS_DETECT_EXE) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Re-running from a manifest reproduces byte-identical CSVs.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "das_acceptance_determinism";
  fs::remove_all(root);
  std::size_t identical = 0, compared = 0;
  const std::vector<std::string> runs{"--trials 50 --seed 9", "--model iid-antipodal --trials 50 --seed 10",
                                      "--strategy mse-das --true-hyp 2 --trials 20 --rounds 30 --K 40 --snr-db 3"};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path a = root / ("a" + std::to_string(i)), b = root / ("b" + std::to_string(i)),
                   c = root / ("c" + std::to_string(i));
    if (shell("simulate " + runs[i] + " --out " + a.string()) != 0) return {false, "simulate failed: " + runs[i]};
    if (shell("simulate " + runs[i] + " --out " + b.string()) != 0) return {false, "re-run failed: " + runs[i]};
    if (shell("simulate --manifest " + (a / "manifest.json").string() + " --threads 2 --out " + c.string()) != 0)
      return {false, "manifest re-run failed: " + runs[i]};
    for (const char* f : {"trajectories.csv", "selection_trace.csv"}) {
      compared += 2;
      identical += slurp(a / f) == slurp(b / f);
      identical += slurp(a / f) == slurp(c / f);
    }
  }
  fs::remove_all(root);
  return {identical == compared, fmt("%zu / %zu CSV re-runs byte-identical", identical, compared)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 J-DAS ordering on sinusoidal AR(1)", strategy_ordering},
      {"2 strategy equivalence on iid antipodal", iid_equivalence},
      {"3 telescoping oracle", telescoping},
      {"4 conditioning oracle", conditioning},
      {"5 divergence oracle", divergence},
      {"6 entropy == MSE selection", entropy_mse},
      {"7 analytic iid mean", iid_mean},
      {"8 complexity trend", complexity},
      {"9 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
