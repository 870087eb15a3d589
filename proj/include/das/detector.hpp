#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "das/model.hpp"
#include "das/selection.hpp"

namespace das {

/// ln f_q(z_k | Z(l)) - ln f_i(z_k | Z(l)).
double llr_increment(const SelectionState& state, std::size_t k, double z_k, std::size_t q, std::size_t i);

/// ln f(z_idx | theta_q) of the measurements on `idx` (any order), including
/// the normalisation constant.
double batch_loglik(const HypothesisModel& model, std::size_t q, std::span<const std::size_t> idx,
                    std::span<const double> values);

struct DecisionRecord {
  std::size_t round = 0;
  std::size_t hypothesis = 0;
  double margin = 0.0;
  bool tie = false;
};

/// ML decision over accumulated log-likelihoods. Ties go to the smallest index
/// with margin 0.
DecisionRecord decide(std::span<const double> logliks, std::size_t round);

/// Running sum kept as non-overlapping partials (Shewchuk); value() is the
/// correctly rounded total, so it does not depend on the order of the terms.
class ExactSum {
 public:
  void add(double x);
  double value() const;

 private:
  std::vector<double> partials_;
};

/// Accumulated ln f(Z(l) | theta_q) for every hypothesis. Pairwise LLRs are
/// differences of these.
class LikelihoodAccumulator {
 public:
  explicit LikelihoodAccumulator(std::size_t hypotheses) : sums_(hypotheses), logliks_(hypotheses, 0.0) {}

  /// Adds the conditional log-density of z_k under every hypothesis. Call
  /// before `state.observe(k, z_k)`.
  void add(const SelectionState& state, std::size_t k, double z_k);

  const std::vector<double>& logliks() const noexcept { return logliks_; }
  double llr(std::size_t q, std::size_t i) const { return logliks_.at(q) - logliks_.at(i); }
  /// ln f(. | theta_truth) minus the largest alternative; equals LLR_{truth,other}
  /// for two hypotheses.
  double margin_vs_alternatives(std::size_t truth) const;

 private:
  std::vector<ExactSum> sums_;
  std::vector<double> logliks_;
};

}  // namespace das
