#include "das/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "das/detector.hpp"
#include "das/error.hpp"
#include "das/selection.hpp"

namespace das {

SymMatrix random_spd(std::size_t dim, RandomStream& stream) {
  std::vector<double> b(dim * dim);
  for (double& x : b) x = stream.next_normal();
  Vector scale(dim);
  for (double& s : scale) s = 0.5 + 1.5 * stream.next_uniform();
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < dim; ++p) s += b[i * dim + p] * b[j * dim + p];
      s /= static_cast<double>(dim);
      if (i == j) s += 0.5;
      m.set_sym(i, j, scale[i] * scale[j] * s);
    }
  return m;
}

HypothesisModel random_model(std::size_t sensors, std::size_t hypotheses, RandomStream& stream) {
  std::vector<std::string> labels;
  std::vector<Vector> means;
  std::vector<SymMatrix> covs;
  for (std::size_t q = 0; q < hypotheses; ++q) {
    labels.push_back("h" + std::to_string(q + 1));
    Vector mean(sensors);
    for (double& x : mean) x = stream.next_normal();
    means.push_back(std::move(mean));
    covs.push_back(random_spd(sensors, stream));
  }
  return HypothesisModel(std::move(labels), std::move(means), std::move(covs));
}

SymMatrix dense_inverse(const SymMatrix& m) {
  const std::size_t n = m.dim();
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (a[piv * n + col] == 0.0) throw Error(ErrorCode::SingularExtension, "dense_inverse: singular matrix");
    if (piv != col)
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a[piv * n + c], a[col * n + c]);
        std::swap(inv[piv * n + c], inv[col * n + c]);
      }
    const double d = a[col * n + col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col * n + c] /= d;
      inv[col * n + c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a[r * n + c] -= f * a[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = inv[i * n + j];
  return out;
}

double kl_by_quadrature(const ConditionalGaussian& p, const ConditionalGaussian& r, double step, double width) {
  const double sd = std::sqrt(p.variance);
  const double lo = p.mean - width * sd;
  auto steps = static_cast<std::size_t>(std::ceil(2.0 * width * sd / step));
  if (steps % 2) ++steps;
  const double h = 2.0 * width * sd / static_cast<double>(steps);
  auto integrand = [&](double x) {
    const double lp = p.log_density(x);
    return std::exp(lp) * (lp - r.log_density(x));
  };
  double sum = integrand(lo) + integrand(lo + h * static_cast<double>(steps));
  for (std::size_t i = 1; i < steps; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(lo + h * static_cast<double>(i));
  return sum * h / 3.0;
}

namespace {

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

std::size_t draw_dim(RandomStream& s, std::size_t lo, std::size_t hi) {
  return lo + s.next_index(hi - lo + 1);
}

std::vector<std::size_t> random_permutation(std::size_t n, RandomStream& s) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[s.next_index(i)]);
  return p;
}

SuiteResult incremental_inverse_suite(const VerifyOptions& o, RandomStream& s) {
  SuiteResult res{"incremental-inverse", o.cases, 0.0, 1e-9, true, false};
  for (std::size_t c = 0; c < o.cases; ++c) {
    const std::size_t n = draw_dim(s, 1, std::max<std::size_t>(o.dim, 1));
    const SymMatrix m = random_spd(n, s);
    SymMatrix inv;
    for (std::size_t i = 0; i < n; ++i) {
      Vector row(m.row(i).begin(), m.row(i).begin() + static_cast<std::ptrdiff_t>(i));
      inv = extend_inverse(inv, row, m(i, i));
    }
    res.max_error = std::max(res.max_error, max_abs_diff(inv, dense_inverse(m)));
  }
  return res;
}

SuiteResult conditioning_suite(const VerifyOptions& o, RandomStream& s) {
  SuiteResult res{"conditioning", o.cases, 0.0, 1e-9, true, false};
  for (std::size_t c = 0; c < o.cases; ++c) {
    const std::size_t n = draw_dim(s, 2, std::max<std::size_t>(o.dim, 2));
    const HypothesisModel model = random_model(n, 2, s);
    const auto order = random_permutation(n, s);
    const std::size_t l = draw_dim(s, 1, n - 1);
    const Vector z = sample_mvn(model.mean(0), model.chol(0), s);

    SelectionState state(model);
    for (std::size_t i = 0; i < l; ++i) state.observe(order[i], z[order[i]]);
    const std::size_t k = order[l + s.next_index(n - l)];
    for (std::size_t q = 0; q < 2; ++q) {
      // Dense oracle: explicit inverse of the observed block.
      std::vector<std::size_t> idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(l));
      const SymMatrix inv = dense_inverse(model.cov(q).restrict(idx));
      Vector cross(l), resid(l);
      for (std::size_t i = 0; i < l; ++i) {
        cross[i] = model.cov(q)(idx[i], k);
        resid[i] = z[idx[i]] - model.mean(q)[idx[i]];
      }
      const Vector w = matvec(inv, cross);
      const double want_var = model.cov(q)(k, k) - dot(cross, w);
      const double want_mean = model.mean(q)[k] + dot(w, resid);

      Vector prior_means(l);
      for (std::size_t i = 0; i < l; ++i) prior_means[i] = model.mean(q)[idx[i]];
      const ConditionalGaussian direct = condition_scalar(
          {model.cov(q)(k, k), cross, model.mean(q)[k], prior_means}, state.values(), state.chol(q));
      const ConditionalGaussian cached = state.conditional(k, q);
      for (const auto& got : {direct, cached})
        res.max_error = std::max({res.max_error, std::abs(got.mean - want_mean), std::abs(got.variance - want_var)});
    }
  }
  return res;
}

SuiteResult kl_suite(const VerifyOptions&, RandomStream& s) {
  SuiteResult res{"kl-quadrature", 50, 0.0, 1e-6, true, false};
  for (std::size_t c = 0; c < res.cases; ++c) {
    const ConditionalGaussian p{-3.0 + 6.0 * s.next_uniform(), std::pow(0.3 + 2.7 * s.next_uniform(), 2)};
    const ConditionalGaussian r{-3.0 + 6.0 * s.next_uniform(), std::pow(0.3 + 2.7 * s.next_uniform(), 2)};
    res.max_error = std::max(res.max_error, std::abs(kl_gauss(p, r) - kl_by_quadrature(p, r)));
  }
  return res;
}

SuiteResult telescoping_suite(const VerifyOptions& o, RandomStream& s) {
  SuiteResult res{"telescoping", std::min<std::size_t>(o.cases, 100), 0.0, 1e-8, true, false};
  const std::size_t max_k = std::clamp<std::size_t>(o.dim, 1, 32);
  for (std::size_t c = 0; c < res.cases; ++c) {
    const std::size_t k_count = draw_dim(s, 1, max_k);
    const std::size_t q_count = 2 + s.next_index(2);
    const HypothesisModel model = random_model(k_count, q_count, s);
    const std::size_t truth = s.next_index(q_count);
    const Vector z = sample_mvn(model.mean(truth), model.chol(truth), s);
    const auto strategy = static_cast<StrategyKind>(s.next_index(4));

    SelectionState state(model);
    LikelihoodAccumulator acc(q_count);
    for (std::size_t r = 0; r < k_count; ++r) {
      const std::size_t k = select(strategy, state, s).chosen;
      acc.add(state, k, z[k]);
      state.observe(k, z[k]);
      Vector values;
      for (std::size_t u : state.uploaded()) values.push_back(z[u]);
      for (std::size_t q = 0; q < q_count; ++q) {
        const double batch = batch_loglik(model, q, state.uploaded(), values) -
                             batch_loglik(model, truth, state.uploaded(), values);
        res.max_error = std::max(res.max_error, std::abs(acc.llr(q, truth) - batch));
      }
    }
  }
  return res;
}

SuiteResult eef_suite(const VerifyOptions& o, RandomStream& s) {
  SuiteResult res{"eef-discrepancy", std::min<std::size_t>(o.cases, 100), 0.0, 0.0, false, true};
  for (std::size_t c = 0; c < res.cases; ++c) {
    const std::size_t n = draw_dim(s, 2, std::clamp<std::size_t>(o.dim, 2, 32));
    const HypothesisModel model = random_model(n, 2, s);
    const Vector z = sample_mvn(model.mean(0), model.chol(0), s);
    const auto order = random_permutation(n, s);
    const std::size_t l = draw_dim(s, 1, n - 1);
    SelectionState state(model);
    for (std::size_t i = 0; i < l; ++i) state.observe(order[i], z[order[i]]);
    const std::size_t k = order[l];
    res.max_error =
        std::max(res.max_error, std::abs(eef_term(state, k, 0, 1) - exact_expected_loglik_gap(state, k, 0, 1)));
  }
  return res;
}

}  // namespace

std::vector<SuiteResult> run_verification(const VerifyOptions& opts) {
  RandomStream s = RandomStream::derive(opts.seed, 0, 0x7665726966ULL);
  std::vector<SuiteResult> results;
  results.push_back(incremental_inverse_suite(opts, s));
  results.push_back(conditioning_suite(opts, s));
  results.push_back(kl_suite(opts, s));
  results.push_back(telescoping_suite(opts, s));
  results.push_back(eef_suite(opts, s));
  for (auto& r : results) {
    if (!r.gated) continue;
    r.tolerance *= opts.tolerance_scale;
    r.passed = std::isfinite(r.max_error) && r.max_error < r.tolerance;
  }
  return results;
}

bool all_gated_passed(const std::vector<SuiteResult>& results) noexcept {
  return std::all_of(results.begin(), results.end(), [](const SuiteResult& r) { return !r.gated || r.passed; });
}

}  // namespace das
