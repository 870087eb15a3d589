#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "das/gaussian.hpp"
#include "das/linalg.hpp"
#include "das/model.hpp"
#include "das/rng.hpp"

namespace das {

struct VerifyOptions {
  std::size_t dim = 32;     // largest matrix dimension drawn
  std::size_t cases = 200;  // cases per linear-algebra suite
  std::uint64_t seed = 1;
  /// Multiplies every gated tolerance. 0 forces the gated suites to fail,
  /// which exercises the failure path.
  double tolerance_scale = 1.0;
};

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool gated = true;
  bool passed = false;
};

/// Runs the oracle suites: incremental inverse vs dense inverse, scalar
/// conditioning vs dense solve, KL closed form vs quadrature, sequential vs
/// batch LLR, and the report-only expected-LLR closed-form discrepancy.
std::vector<SuiteResult> run_verification(const VerifyOptions& opts);
bool all_gated_passed(const std::vector<SuiteResult>& results) noexcept;

/// Random SPD matrix D (B B^T / n + I/2) D with B standard normal and D a
/// diagonal scaling in [0.5, 2].
SymMatrix random_spd(std::size_t dim, RandomStream& stream);
/// Random model with standard-normal means and random_spd covariances.
HypothesisModel random_model(std::size_t sensors, std::size_t hypotheses, RandomStream& stream);

/// Gauss-Jordan inverse with partial pivoting.
SymMatrix dense_inverse(const SymMatrix& m);
/// KL(p || r) by composite Simpson over mean_p +/- width * sd_p.
double kl_by_quadrature(const ConditionalGaussian& p, const ConditionalGaussian& r, double step = 1e-3,
                        double width = 10.0);

}  // namespace das
