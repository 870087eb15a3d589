#pragma once

#include <span>

#include "das/linalg.hpp"
#include "das/rng.hpp"

namespace das {

/// Scalar law of one unobserved measurement given the observed ones under a
/// single hypothesis.
struct ConditionalGaussian {
  double mean = 0.0;
  double variance = 1.0;

  /// ln N(x; mean, variance).
  double log_density(double x) const noexcept;
  /// Differential entropy in nats.
  double entropy() const noexcept;
};

/// Joint statistics of a candidate measurement against the observed block,
/// all under one hypothesis.
struct CandidateMoments {
  double variance;                      // unconditional variance of the candidate
  std::span<const double> cross;        // covariance with each observed value
  double prior_mean;                    // unconditional mean of the candidate
  std::span<const double> prior_means;  // unconditional means of the observed block
};

/// Conditions the candidate on the observed values `z` using a Cholesky
/// factor of the observed-block covariance. Throws
/// NonPositiveConditionalVariance if the result is <= kSingularTol.
ConditionalGaussian condition_scalar(const CandidateMoments& moments, std::span<const double> z,
                                     const CholFactor& chol_observed);

/// Grows the inverse of an l x l SPD matrix to the inverse of the
/// (l+1) x (l+1) matrix obtained by appending `new_row` and `new_diag`,
/// via block inversion in O(l^2). Throws SingularExtension if the Schur
/// complement is <= kSingularTol.
SymMatrix extend_inverse(const SymMatrix& inv, std::span<const double> new_row, double new_diag);

/// mean + L u with u drawn from `stream`.
Vector sample_mvn(std::span<const double> mean, const CholFactor& chol, RandomStream& stream);
/// mean + L u with a caller-supplied u.
Vector sample_mvn(std::span<const double> mean, const CholFactor& chol, std::span<const double> u);

/// v^T R^{-1} v via one triangular solve.
double quad_form(std::span<const double> v, const CholFactor& chol);

}  // namespace das
