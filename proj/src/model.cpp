#include "das/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "das/error.hpp"

namespace das {

HypothesisModel::HypothesisModel(std::vector<std::string> labels, std::vector<Vector> means,
                                 std::vector<SymMatrix> covs)
    : labels_(std::move(labels)), means_(std::move(means)), covs_(std::move(covs)) {
  const std::size_t q = means_.size();
  if (q < 2) throw Error(ErrorCode::InvalidArgument, "a model needs at least two hypotheses");
  if (labels_.size() != q || covs_.size() != q)
    throw Error(ErrorCode::DimensionMismatch, "labels, means and covariances disagree on the hypothesis count");
  const std::size_t k = means_.front().size();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "a model needs at least one sensor");
  for (const auto& label : labels_) {
    if (label.empty() || label.find_first_of(" \t\r\n#") != std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "label '" + label + "' must be a single token without '#'");
  }
  chols_.reserve(q);
  for (std::size_t h = 0; h < q; ++h) {
    if (means_[h].size() != k || covs_[h].dim() != k)
      throw Error(ErrorCode::DimensionMismatch, "hypothesis " + std::to_string(h + 1) + " is not over " +
                                                    std::to_string(k) + " sensors");
    for (double v : means_[h])
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite mean");
    for (double v : covs_[h].data())
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite covariance entry");
    if (!covs_[h].is_symmetric())
      throw Error(ErrorCode::ParseError, "covariance " + std::to_string(h + 1) + " is not symmetric");
    try {
      chols_.push_back(cholesky(covs_[h]));
    } catch (const Error& e) {
      throw Error(ErrorCode::NotPositiveDefinite, "covariance " + std::to_string(h + 1) + ": " + e.what());
    }
  }
}

double BenchmarkSpec::noise_variance() const {
  const double snr = std::pow(10.0, snr_db / 10.0);
  double v = 1.0;
  if (variance) {
    v = *variance;
  } else if (amplitude) {
    v = *amplitude * *amplitude / (2.0 * snr);
  }
  if (!std::isfinite(v) || !(v > 0.0))
    throw Error(ErrorCode::InvalidArgument, "noise variance must be finite and positive");
  return v;
}

double BenchmarkSpec::resolved_amplitude() const {
  if (amplitude) {
    if (!std::isfinite(*amplitude) || *amplitude < 0.0) throw Error(ErrorCode::InvalidArgument, "amplitude");
    return *amplitude;
  }
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double a = std::sqrt(2.0 * snr * noise_variance());
  if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "amplitude from SNR is not finite");
  return a;
}

SymMatrix ar1_covariance(std::size_t dim, double variance, double rho) {
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::InvalidRho, "|rho| must be < 1, got " + std::to_string(rho));
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.set_sym(i, j, variance * std::pow(rho, static_cast<double>(i - j)));
  return m;
}

namespace {

std::vector<std::string> default_labels(std::size_t q) {
  std::vector<std::string> labels;
  for (std::size_t h = 0; h < q; ++h) labels.push_back("theta" + std::to_string(h + 1));
  return labels;
}

}  // namespace

HypothesisModel build_sinusoidal_ar1(const BenchmarkSpec& spec) {
  if (spec.rho.size() < 2) throw Error(ErrorCode::InvalidArgument, "need one rho per hypothesis (at least two)");
  const double a = spec.resolved_amplitude();
  const double var = spec.noise_variance();
  const std::size_t k = spec.sensors;
  const std::size_t q = spec.rho.size();
  std::vector<Vector> means(q, Vector(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    const double phase = std::numbers::pi * static_cast<double>(i) / 10.0;
    means[0][i] = a * std::cos(phase);
    means[1][i] = a * std::sin(phase);
  }
  // Extra hypotheses beyond the first two keep zero mean and differ only in
  // their correlation.
  std::vector<SymMatrix> covs;
  for (double rho : spec.rho) covs.push_back(ar1_covariance(k, var, rho));
  return HypothesisModel(default_labels(q), std::move(means), std::move(covs));
}

HypothesisModel build_iid_antipodal(const BenchmarkSpec& spec) {
  const double a = spec.resolved_amplitude();
  const double var = spec.noise_variance();
  const std::size_t k = spec.sensors;
  SymMatrix cov(k);
  for (std::size_t i = 0; i < k; ++i) cov(i, i) = var;
  return HypothesisModel(default_labels(2), {Vector(k, a), Vector(k, -a)}, {cov, cov});
}

HypothesisModel build_benchmark(const BenchmarkSpec& spec) {
  switch (spec.family) {
    case ModelFamily::SinusoidalAr1: return build_sinusoidal_ar1(spec);
    case ModelFamily::IidAntipodal: return build_iid_antipodal(spec);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model family");
}

namespace {

class Tokenizer {
 public:
  explicit Tokenizer(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back(std::move(tok));
    }
  }

  bool done() const { return pos_ >= tokens_.size(); }
  const std::string& peek() const { return tokens_.at(pos_); }

  std::string next(const char* what) {
    if (done()) throw Error(ErrorCode::ParseError, std::string("unexpected end of input, expected ") + what);
    return tokens_[pos_++];
  }

  void expect(const std::string& key) {
    const std::string tok = next(key.c_str());
    if (tok != key) throw Error(ErrorCode::ParseError, "expected '" + key + "', found '" + tok + "'");
  }

  std::size_t next_count(const char* what) {
    const std::string tok = next(what);
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (*end != '\0' || v <= 0) throw Error(ErrorCode::ParseError, std::string(what) + " must be a positive integer");
    return static_cast<std::size_t>(v);
  }

  /// Reads tokens up to (not including) `stop`, or to end of input.
  std::vector<std::string> until(const char* stop) {
    std::vector<std::string> out;
    while (!done() && peek() != stop) out.push_back(tokens_[pos_++]);
    return out;
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

double parse_real(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || *end != '\0') throw Error(ErrorCode::ParseError, "'" + tok + "' is not a number");
  return v;
}

void write_real(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

HypothesisModel parse_model(std::istream& in) {
  Tokenizer tok(in);
  tok.expect("das-model");
  if (tok.next("format version") != "1") throw Error(ErrorCode::ParseError, "unsupported model format version");
  tok.expect("K");
  const std::size_t k = tok.next_count("K");
  tok.expect("Q");
  const std::size_t q = tok.next_count("Q");

  tok.expect("labels");
  std::vector<std::string> labels = tok.until("means");
  if (labels.size() != q)
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(q) + " labels, found " +
                                                  std::to_string(labels.size()));

  tok.expect("means");
  const auto mean_tokens = tok.until("covs");
  if (mean_tokens.size() != q * k)
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(q * k) + " mean entries, found " +
                                                  std::to_string(mean_tokens.size()));
  std::vector<Vector> means(q, Vector(k));
  for (std::size_t h = 0; h < q; ++h)
    for (std::size_t i = 0; i < k; ++i) means[h][i] = parse_real(mean_tokens[h * k + i]);

  tok.expect("covs");
  const auto cov_tokens = tok.until("");
  if (cov_tokens.size() != q * k * k)
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(q * k * k) +
                                                  " covariance entries, found " + std::to_string(cov_tokens.size()));
  std::vector<SymMatrix> covs;
  for (std::size_t h = 0; h < q; ++h) {
    std::vector<Vector> rows(k, Vector(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) rows[i][j] = parse_real(cov_tokens[(h * k + i) * k + j]);
    try {
      covs.push_back(SymMatrix::from_rows(rows));
    } catch (const Error&) {
      throw Error(ErrorCode::ParseError, "covariance " + std::to_string(h + 1) + " is not symmetric");
    }
  }
  return HypothesisModel(std::move(labels), std::move(means), std::move(covs));
}

HypothesisModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open model file " + path.string());
  return parse_model(in);
}

void write_model(std::ostream& out, const HypothesisModel& model) {
  const std::size_t k = model.sensors();
  out << "das-model 1\n";
  out << "K " << k << "\n";
  out << "Q " << model.hypotheses() << "\n";
  out << "labels";
  for (const auto& label : model.labels()) out << ' ' << label;
  out << "\nmeans\n";
  for (std::size_t h = 0; h < model.hypotheses(); ++h) {
    for (std::size_t i = 0; i < k; ++i) {
      if (i) out << ' ';
      write_real(out, model.mean(h)[i]);
    }
    out << '\n';
  }
  out << "covs\n";
  for (std::size_t h = 0; h < model.hypotheses(); ++h) {
    out << "# " << model.label(h) << "\n";
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (j) out << ' ';
        write_real(out, model.cov(h)(i, j));
      }
      out << '\n';
    }
  }
}

void save_model(const std::filesystem::path& path, const HypothesisModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write model file " + path.string());
  write_model(out, model);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace das
