#include "das/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "das/error.hpp"

namespace das {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)
}

double ConditionalGaussian::log_density(double x) const noexcept {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + d * d / variance);
}

double ConditionalGaussian::entropy() const noexcept {
  return 0.5 * (kLog2Pi + 1.0 + std::log(variance));
}

ConditionalGaussian condition_scalar(const CandidateMoments& moments, std::span<const double> z,
                                     const CholFactor& chol_observed) {
  const std::size_t l = z.size();
  if (moments.cross.size() != l || moments.prior_means.size() != l || chol_observed.dim() != l)
    throw Error(ErrorCode::DimensionMismatch, "condition_scalar");
  if (l == 0) return {moments.prior_mean, moments.variance};

  // With y = L^{-1} c and e = L^{-1}(z - zbar):
  //   mean = zbar_k + y.e,  variance = r - y.y
  const Vector y = chol_observed.solve_lower(moments.cross);
  Vector residual(l);
  for (std::size_t i = 0; i < l; ++i) residual[i] = z[i] - moments.prior_means[i];
  const Vector e = chol_observed.solve_lower(residual);
  const double variance = moments.variance - dot(y, y);
  if (!(variance > kSingularTol))
    throw Error(ErrorCode::NonPositiveConditionalVariance, "conditional variance " + std::to_string(variance));
  return {moments.prior_mean + dot(y, e), variance};
}

SymMatrix extend_inverse(const SymMatrix& inv, std::span<const double> new_row, double new_diag) {
  const std::size_t l = inv.dim();
  if (new_row.size() != l) throw Error(ErrorCode::DimensionMismatch, "extend_inverse");
  // [A c; c^T d]^{-1} = [A^{-1} + w w^T / s, -w / s; -w^T / s, 1 / s]
  // with w = A^{-1} c and s = d - c^T w.
  const Vector w = matvec(inv, new_row);
  const double schur = new_diag - dot(new_row, w);
  if (!(schur > kSingularTol))
    throw Error(ErrorCode::SingularExtension, "Schur complement " + std::to_string(schur));
  const double inv_s = 1.0 / schur;
  SymMatrix out(l + 1);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      out.set_sym(i, j, inv(i, j) + w[i] * w[j] * inv_s);
    }
    out.set_sym(i, l, -w[i] * inv_s);
  }
  out(l, l) = inv_s;
  return out;
}

Vector sample_mvn(std::span<const double> mean, const CholFactor& chol, std::span<const double> u) {
  if (mean.size() != chol.dim() || u.size() != chol.dim()) throw Error(ErrorCode::DimensionMismatch, "sample_mvn");
  Vector z = chol.multiply(u);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += mean[i];
  return z;
}

Vector sample_mvn(std::span<const double> mean, const CholFactor& chol, RandomStream& stream) {
  Vector u(chol.dim());
  for (double& x : u) x = stream.next_normal();
  return sample_mvn(mean, chol, u);
}

double quad_form(std::span<const double> v, const CholFactor& chol) {
  const Vector y = chol.solve_lower(v);
  return dot(y, y);
}

}  // namespace das
