#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "das/linalg.hpp"

namespace das {

/// Q Gaussian hypotheses over the same K sensors. Hypotheses and sensors are
/// 0-based internally; file formats and logs use 1-based indices.
class HypothesisModel {
 public:
  /// Validates shapes and that every covariance is symmetric positive
  /// definite. Cholesky factors are computed once here.
  HypothesisModel(std::vector<std::string> labels, std::vector<Vector> means, std::vector<SymMatrix> covs);

  std::size_t sensors() const noexcept { return means_.empty() ? 0 : means_.front().size(); }
  std::size_t hypotheses() const noexcept { return means_.size(); }

  const std::string& label(std::size_t q) const { return labels_.at(q); }
  const Vector& mean(std::size_t q) const { return means_.at(q); }
  const SymMatrix& cov(std::size_t q) const { return covs_.at(q); }
  const CholFactor& chol(std::size_t q) const { return chols_.at(q); }

  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const HypothesisModel& a, const HypothesisModel& b) {
    return a.labels_ == b.labels_ && a.means_ == b.means_ && a.covs_ == b.covs_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<Vector> means_;
  std::vector<SymMatrix> covs_;
  std::vector<CholFactor> chols_;
};

enum class ModelFamily { SinusoidalAr1, IidAntipodal };

struct BenchmarkSpec {
  ModelFamily family = ModelFamily::SinusoidalAr1;
  std::size_t sensors = 50;
  double snr_db = 0.0;
  /// SNR = A^2 / (2 sigma^2). With neither override set, sigma^2 = 1 and A
  /// follows from the SNR; with one set, the other follows; with both set
  /// the SNR is ignored.
  std::optional<double> amplitude;
  std::optional<double> variance;
  std::vector<double> rho = {0.75, -0.75};

  double noise_variance() const;
  double resolved_amplitude() const;
};

/// Means A cos(pi (k-1)/10) and A sin(pi (k-1)/10); covariance
/// sigma^2 rho_q^|k-t|. One hypothesis per entry of `spec.rho`.
HypothesisModel build_sinusoidal_ar1(const BenchmarkSpec& spec);
/// Means +A and -A on every sensor, covariance sigma^2 I for both.
HypothesisModel build_iid_antipodal(const BenchmarkSpec& spec);
HypothesisModel build_benchmark(const BenchmarkSpec& spec);

/// AR(1) Toeplitz covariance sigma^2 rho^|i-j|.
SymMatrix ar1_covariance(std::size_t dim, double variance, double rho);

// Model file grammar (tokens separated by any whitespace, '#' starts a
// comment that runs to end of line):
//
//   das-model 1
//   K <int>
//   Q <int>
//   labels <Q tokens>
//   means  <Q*K reals, hypothesis-major>
//   covs   <Q*K*K reals, hypothesis-major, then row-major>
//
// Keys must appear in this order. Covariance blocks must be exactly
// symmetric and positive definite.
HypothesisModel parse_model(std::istream& in);
HypothesisModel load_model(const std::filesystem::path& path);
void write_model(std::ostream& out, const HypothesisModel& model);
void save_model(const std::filesystem::path& path, const HypothesisModel& model);

}  // namespace das
