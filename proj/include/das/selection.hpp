#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "das/gaussian.hpp"
#include "das/linalg.hpp"
#include "das/model.hpp"
#include "das/rng.hpp"

namespace das {

enum class StrategyKind { Random, EntropyDas, MseDas, JDas };

std::string_view to_string(StrategyKind kind) noexcept;
std::optional<StrategyKind> parse_strategy(std::string_view name) noexcept;

/// How per-candidate scores are computed within one round.
enum class Execution { Serial, Parallel };

/// Which conditioning route a score uses: the cached explicit inverse that
/// grows by one row per round, or a fresh Cholesky of the observed block.
enum class ConditioningPath { Incremental, Dense };

/// Sensors uploaded so far (in upload order), their values, and per-hypothesis
/// caches of the observed-block covariance. One instance per trial.
class SelectionState {
 public:
  explicit SelectionState(const HypothesisModel& model);
  explicit SelectionState(HypothesisModel&&) = delete;  // the model must outlive the state

  const HypothesisModel& model() const noexcept { return *model_; }
  std::size_t round() const noexcept { return uploaded_.size(); }
  const std::vector<std::size_t>& uploaded() const noexcept { return uploaded_; }
  const Vector& values() const noexcept { return values_; }
  bool is_uploaded(std::size_t k) const { return observed_.at(k); }
  /// Sensors not yet uploaded, ascending.
  std::vector<std::size_t> remaining() const;

  /// Law of z_k given the uploaded values under hypothesis q.
  ConditionalGaussian conditional(std::size_t k, std::size_t q,
                                  ConditioningPath path = ConditioningPath::Incremental) const;

  /// Records the upload of sensor k with value z and grows every cache.
  void observe(std::size_t k, double z);

  const SymMatrix& inverse(std::size_t q) const { return caches_.at(q).inverse; }
  const CholFactor& chol(std::size_t q) const { return caches_.at(q).chol; }
  /// max |R_q(l)^{-1} R_q(l) - I|, for invariant checks.
  double inverse_error(std::size_t q) const;

 private:
  struct Cache {
    CholFactor chol;
    SymMatrix inverse;
    Vector residual;  // z(l) - zbar_q(l)
    Vector weights;   // R_q(l)^{-1} residual
  };

  void require_candidate(std::size_t k) const;
  Vector cross_covariance(std::size_t k, std::size_t q) const;

  const HypothesisModel* model_;
  std::vector<std::size_t> uploaded_;
  Vector values_;
  std::vector<bool> observed_;
  std::vector<Cache> caches_;
};

struct ScoreReport {
  /// (sensor, score) for every candidate, ascending sensor index. Empty for
  /// random selection.
  std::vector<std::pair<std::size_t, double>> scores;
  std::size_t chosen = 0;
  bool tie_broken = false;
  /// Hypothesis the scores were conditioned on, when a single one was used.
  std::optional<std::size_t> hypothesis;

  std::optional<double> chosen_score() const;
};

/// Scores within this relative distance of the best are ties; the smallest
/// sensor index wins.
inline constexpr double kTieRelTol = 1e-12;

/// Index of the maximal score with the tie rule applied.
ScoreReport pick_max(std::vector<std::pair<std::size_t, double>> scores);

/// H(z_k | Z(l), theta_q) in nats.
double conditional_entropy(const SelectionState& state, std::size_t k, std::size_t q);
/// E[(z_k - zhat_k)^2 | Z(l), theta_q]: the conditional variance.
double mse_score(const SelectionState& state, std::size_t k, std::size_t q);

/// KL(p || r) for univariate Gaussians.
double kl_gauss(const ConditionalGaussian& p, const ConditionalGaussian& r) noexcept;

/// Sum over ordered hypothesis pairs (q, i), q != i, of KL(f_q || f_i) for
/// the conditional laws of z_k. For two hypotheses this is the J-divergence.
double j_divergence_score(const SelectionState& state, std::size_t k,
                          ConditioningPath path = ConditioningPath::Incremental);

/// Hypothesis used by entropy DAS at the state's current round (cycles
/// 0, 1, ..., Q-1, 0, ...).
std::size_t entropy_cycle_hypothesis(const SelectionState& state) noexcept;

ScoreReport select_entropy_das(const SelectionState& state, Execution exec = Execution::Serial);
ScoreReport select_mse_das(const SelectionState& state, Execution exec = Execution::Serial);
ScoreReport select_jdas(const SelectionState& state, Execution exec = Execution::Serial,
                        ConditioningPath path = ConditioningPath::Incremental);
std::size_t select_random(const SelectionState& state, RandomStream& stream);

/// Runs one selection step of `kind`. `stream` is only consumed by Random.
ScoreReport select(StrategyKind kind, const SelectionState& state, RandomStream& stream,
                   Execution exec = Execution::Serial);

/// The closed-form expected log-likelihood gap
///   -(alpha/2)(r_q1 - r_q2 - d^2) - d (z(l) - zbar_q1(l))^T b
/// with d the unconditional mean gap, r the unconditional variances, and
/// alpha = 1/(r_q1 - c^T R^{-1} c), b = -alpha R^{-1} c under q1. Kept to
/// cross-check against exact_expected_loglik_gap; never used for selection.
double eef_term(const SelectionState& state, std::size_t k, std::size_t q1, std::size_t q2);

/// E_{q1}[ln f_q1(z_k)] - E_{q2}[ln f_q1(z_k)] from the exact conditional
/// laws f_q1, f_q2 of z_k.
double exact_expected_loglik_gap(const SelectionState& state, std::size_t k, std::size_t q1, std::size_t q2);

}  // namespace das
