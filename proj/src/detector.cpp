#include "das/detector.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <limits>

#include "das/error.hpp"

namespace das {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double llr_increment(const SelectionState& state, std::size_t k, double z_k, std::size_t q, std::size_t i) {
  if (q == i) return 0.0;
  return state.conditional(k, q).log_density(z_k) - state.conditional(k, i).log_density(z_k);
}

double batch_loglik(const HypothesisModel& model, std::size_t q, std::span<const std::size_t> idx,
                    std::span<const double> values) {
  if (idx.empty()) throw Error(ErrorCode::EmptyInput, "batch_loglik needs at least one measurement");
  if (idx.size() != values.size()) throw Error(ErrorCode::DimensionMismatch, "batch_loglik");
  const CholFactor chol = cholesky(model.cov(q).restrict(idx));
  Vector residual(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) residual[a] = values[a] - model.mean(q).at(idx[a]);
  return -0.5 * (quad_form(residual, chol) + chol.log_det() + static_cast<double>(idx.size()) * kLog2Pi);
}

DecisionRecord decide(std::span<const double> logliks, std::size_t round) {
  if (logliks.empty()) throw Error(ErrorCode::EmptyInput, "no hypotheses to decide between");
  DecisionRecord rec;
  rec.round = round;
  for (std::size_t q = 1; q < logliks.size(); ++q)
    if (logliks[q] > logliks[rec.hypothesis]) rec.hypothesis = q;
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < logliks.size(); ++q)
    if (q != rec.hypothesis) runner_up = std::max(runner_up, logliks[q]);
  rec.margin = logliks.size() > 1 ? logliks[rec.hypothesis] - runner_up : 0.0;
  rec.tie = logliks.size() > 1 && rec.margin == 0.0;
  return rec;
}

void ExactSum::add(double x) {
  std::size_t used = 0;
  for (double y : partials_) {
    if (std::abs(x) < std::abs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[used++] = lo;
    x = hi;
  }
  partials_.resize(used);
  partials_.push_back(x);
}

double ExactSum::value() const {
  std::size_t n = partials_.size();
  if (n == 0) return 0.0;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  // Round half-even correction when the remaining partials push past a tie.
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

void LikelihoodAccumulator::add(const SelectionState& state, std::size_t k, double z_k) {
  for (std::size_t q = 0; q < logliks_.size(); ++q) {
    sums_[q].add(state.conditional(k, q).log_density(z_k));
    logliks_[q] = sums_[q].value();
  }
}

double LikelihoodAccumulator::margin_vs_alternatives(std::size_t truth) const {
  double best_other = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < logliks_.size(); ++q)
    if (q != truth) best_other = std::max(best_other, logliks_[q]);
  return logliks_.at(truth) - best_other;
}

}  // namespace das
