#include "das/selection.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "das/error.hpp"

namespace das {

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::Random: return "random";
    case StrategyKind::EntropyDas: return "entropy-das";
    case StrategyKind::MseDas: return "mse-das";
    case StrategyKind::JDas: return "j-das";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) noexcept {
  for (auto kind : {StrategyKind::Random, StrategyKind::EntropyDas, StrategyKind::MseDas, StrategyKind::JDas})
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

SelectionState::SelectionState(const HypothesisModel& model)
    : model_(&model), observed_(model.sensors(), false), caches_(model.hypotheses()) {}

std::vector<std::size_t> SelectionState::remaining() const {
  std::vector<std::size_t> out;
  out.reserve(observed_.size() - uploaded_.size());
  for (std::size_t k = 0; k < observed_.size(); ++k)
    if (!observed_[k]) out.push_back(k);
  return out;
}

void SelectionState::require_candidate(std::size_t k) const {
  if (k >= observed_.size())
    throw Error(ErrorCode::InvalidArgument, "sensor " + std::to_string(k + 1) + " does not exist");
  if (observed_[k])
    throw Error(ErrorCode::InvalidArgument, "sensor " + std::to_string(k + 1) + " was already uploaded");
}

Vector SelectionState::cross_covariance(std::size_t k, std::size_t q) const {
  const auto row = model_->cov(q).row(k);
  Vector c(uploaded_.size());
  for (std::size_t i = 0; i < uploaded_.size(); ++i) c[i] = row[uploaded_[i]];
  return c;
}

ConditionalGaussian SelectionState::conditional(std::size_t k, std::size_t q, ConditioningPath path) const {
  require_candidate(k);
  const Cache& cache = caches_.at(q);
  thread_local Vector c;
  const auto cov_row = model_->cov(q).row(k);
  c.resize(uploaded_.size());
  for (std::size_t i = 0; i < uploaded_.size(); ++i) c[i] = cov_row[uploaded_[i]];
  const double prior_var = model_->cov(q)(k, k);
  const double prior_mean = model_->mean(q)[k];

  if (path == ConditioningPath::Dense) {
    if (uploaded_.empty()) return {prior_mean, prior_var};
    Vector prior_means(uploaded_.size());
    for (std::size_t i = 0; i < uploaded_.size(); ++i) prior_means[i] = model_->mean(q)[uploaded_[i]];
    const CholFactor chol = cholesky(model_->cov(q).restrict(uploaded_));
    return condition_scalar({prior_var, c, prior_mean, prior_means}, values_, chol);
  }

  // mean = zbar_k + c^T R^{-1} (z - zbar),  variance = r - c^T R^{-1} c
  double quad = 0.0;
  double shift = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto inv_row = cache.inverse.row(i);
    double lower = 0.0;
    for (std::size_t j = 0; j < i; ++j) lower += inv_row[j] * c[j];
    quad += c[i] * (2.0 * lower + inv_row[i] * c[i]);
    shift += c[i] * cache.weights[i];
  }
  const double variance = prior_var - quad;
  if (!(variance > kSingularTol))
    throw Error(ErrorCode::NonPositiveConditionalVariance,
                "sensor " + std::to_string(k + 1) + ": conditional variance " + std::to_string(variance));
  return {prior_mean + shift, variance};
}

void SelectionState::observe(std::size_t k, double z) {
  require_candidate(k);
  for (std::size_t q = 0; q < caches_.size(); ++q) {
    Cache& cache = caches_[q];
    const Vector c = cross_covariance(k, q);
    const double d = model_->cov(q)(k, k);
    cache.inverse = extend_inverse(cache.inverse, c, d);
    cache.chol.append(c, d, kPivotRelTol * model_->cov(q).max_diagonal());
    cache.residual.push_back(z - model_->mean(q)[k]);
    cache.weights = matvec(cache.inverse, cache.residual);
  }
  uploaded_.push_back(k);
  values_.push_back(z);
  observed_[k] = true;
}

double SelectionState::inverse_error(std::size_t q) const {
  const SymMatrix block = model_->cov(q).restrict(uploaded_);
  const SymMatrix& inv = caches_.at(q).inverse;
  const std::size_t n = block.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < n; ++p) s += inv(i, p) * block(p, j);
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

std::optional<double> ScoreReport::chosen_score() const {
  for (const auto& [k, s] : scores)
    if (k == chosen) return s;
  return std::nullopt;
}

ScoreReport pick_max(std::vector<std::pair<std::size_t, double>> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no candidates to select from");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [k, s] : scores) best = std::max(best, s);
  const double slack = kTieRelTol * std::max(1.0, std::abs(best));
  ScoreReport report;
  std::size_t ties = 0;
  bool found = false;
  for (const auto& [k, s] : scores) {
    if (best - s <= slack) {
      ++ties;
      if (!found || k < report.chosen) report.chosen = k;
      found = true;
    }
  }
  report.tie_broken = ties > 1;
  report.scores = std::move(scores);
  return report;
}

double conditional_entropy(const SelectionState& state, std::size_t k, std::size_t q) {
  return state.conditional(k, q).entropy();
}

double mse_score(const SelectionState& state, std::size_t k, std::size_t q) {
  return state.conditional(k, q).variance;
}

double kl_gauss(const ConditionalGaussian& p, const ConditionalGaussian& r) noexcept {
  // 0.5 [ (x - 1 - ln x) + d^2 / v_r ] with x = v_p / v_r
  const double xm1 = (p.variance - r.variance) / r.variance;
  const double d = p.mean - r.mean;
  const double value = 0.5 * ((xm1 - std::log1p(xm1)) + d * d / r.variance);
  return std::max(0.0, value);
}

double j_divergence_score(const SelectionState& state, std::size_t k, ConditioningPath path) {
  const std::size_t q_count = state.model().hypotheses();
  thread_local std::vector<ConditionalGaussian> laws;
  laws.clear();
  for (std::size_t q = 0; q < q_count; ++q) laws.push_back(state.conditional(k, q, path));
  // KL(a||b) + KL(b||a) = 0.5 [ (v_a - v_b)^2 + d^2 (v_a + v_b) ] / (v_a v_b)
  double total = 0.0;
  for (std::size_t q = 0; q < q_count; ++q)
    for (std::size_t i = q + 1; i < q_count; ++i) {
      const double va = laws[q].variance, vb = laws[i].variance;
      const double dv = va - vb, d = laws[q].mean - laws[i].mean;
      total += 0.5 * (dv * dv + d * d * (va + vb)) / (va * vb);
    }
  return total;
}

std::size_t entropy_cycle_hypothesis(const SelectionState& state) noexcept {
  return state.round() % state.model().hypotheses();
}

namespace {

template <typename Score>
ScoreReport score_candidates(const SelectionState& state, Execution exec, Score&& score) {
  const std::vector<std::size_t> candidates = state.remaining();
  if (candidates.empty()) throw Error(ErrorCode::EmptyInput, "every sensor has already uploaded");
  std::vector<std::pair<std::size_t, double>> scores(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());

  if (exec == Execution::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) scores[i] = {candidates[i], score(candidates[i])};
  } else {
    std::vector<std::exception_ptr> failures(candidates.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        scores[i] = {candidates[i], score(candidates[i])};
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  }
  return pick_max(std::move(scores));
}

}  // namespace

ScoreReport select_entropy_das(const SelectionState& state, Execution exec) {
  const std::size_t q = entropy_cycle_hypothesis(state);
  ScoreReport report =
      score_candidates(state, exec, [&](std::size_t k) { return conditional_entropy(state, k, q); });
  report.hypothesis = q;
  return report;
}

ScoreReport select_mse_das(const SelectionState& state, Execution exec) {
  const std::size_t q = entropy_cycle_hypothesis(state);
  ScoreReport report = score_candidates(state, exec, [&](std::size_t k) { return mse_score(state, k, q); });
  report.hypothesis = q;
  return report;
}

ScoreReport select_jdas(const SelectionState& state, Execution exec, ConditioningPath path) {
  return score_candidates(state, exec, [&](std::size_t k) { return j_divergence_score(state, k, path); });
}

std::size_t select_random(const SelectionState& state, RandomStream& stream) {
  const std::vector<std::size_t> candidates = state.remaining();
  if (candidates.empty()) throw Error(ErrorCode::EmptyInput, "every sensor has already uploaded");
  return candidates[stream.next_index(candidates.size())];
}

ScoreReport select(StrategyKind kind, const SelectionState& state, RandomStream& stream, Execution exec) {
  switch (kind) {
    case StrategyKind::Random: {
      ScoreReport report;
      report.chosen = select_random(state, stream);
      return report;
    }
    case StrategyKind::EntropyDas: return select_entropy_das(state, exec);
    case StrategyKind::MseDas: return select_mse_das(state, exec);
    case StrategyKind::JDas: return select_jdas(state, exec);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown strategy");
}

double eef_term(const SelectionState& state, std::size_t k, std::size_t q1, std::size_t q2) {
  const HypothesisModel& model = state.model();
  if (state.is_uploaded(k)) throw Error(ErrorCode::InvalidArgument, "sensor already uploaded");
  const double r1 = model.cov(q1)(k, k);
  const double r2 = model.cov(q2)(k, k);
  const double gap = model.mean(q1)[k] - model.mean(q2)[k];

  const auto& uploaded = state.uploaded();
  const std::size_t l = uploaded.size();
  Vector c(l);
  Vector residual(l);
  for (std::size_t i = 0; i < l; ++i) {
    c[i] = model.cov(q1)(uploaded[i], k);
    residual[i] = state.values()[i] - model.mean(q1)[uploaded[i]];
  }
  const Vector w = matvec(state.inverse(q1), c);
  const double alpha = 1.0 / (r1 - dot(c, w));
  // b = -alpha R^{-1} c
  double residual_dot_b = 0.0;
  for (std::size_t i = 0; i < l; ++i) residual_dot_b += residual[i] * (-alpha * w[i]);
  return -0.5 * alpha * (r1 - r2 - gap * gap) - gap * residual_dot_b;
}

double exact_expected_loglik_gap(const SelectionState& state, std::size_t k, std::size_t q1, std::size_t q2) {
  const ConditionalGaussian f1 = state.conditional(k, q1);
  const ConditionalGaussian f2 = state.conditional(k, q2);
  const double d = f2.mean - f1.mean;
  return -0.5 + (f2.variance + d * d) / (2.0 * f1.variance);
}

}  // namespace das
