#include "das/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "das/error.hpp"

namespace das {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonPositiveConditionalVariance: return "NonPositiveConditionalVariance";
    case ErrorCode::SingularExtension: return "SingularExtension";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::from_rows(const std::vector<Vector>& rows) {
  SymMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size())
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " has " +
                                                    std::to_string(rows[i].size()) + " entries, expected " +
                                                    std::to_string(rows.size()));
    std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.dim_));
  }
  if (!m.is_symmetric()) throw Error(ErrorCode::ParseError, "matrix is not symmetric");
  return m;
}

bool SymMatrix::is_symmetric() const noexcept {
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i + 1; j < dim_; ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

double SymMatrix::max_diagonal() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) best = std::max(best, (*this)(i, i));
  return best;
}

SymMatrix SymMatrix::restrict(std::span<const std::size_t> idx) const {
  SymMatrix out(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) out(a, b) = (*this)(idx[a], idx[b]);
  return out;
}

CholFactor CholFactor::from_lower(std::size_t dim, std::vector<double> lower) {
  if (lower.size() != dim * dim) throw Error(ErrorCode::DimensionMismatch, "lower factor size");
  CholFactor f;
  f.dim_ = dim;
  f.l_ = std::move(lower);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i + 1; j < dim; ++j) f.l_[i * dim + j] = 0.0;
  return f;
}

CholFactor cholesky(const SymMatrix& m) {
  const std::size_t n = m.dim();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "cholesky of an empty matrix");
  const double tol = kPivotRelTol * m.max_diagonal();
  CholFactor f;
  f.dim_ = n;
  f.l_.assign(n * n, 0.0);
  auto& l = f.l_;
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (std::size_t p = 0; p < j; ++p) pivot -= l[j * n + p] * l[j * n + p];
    if (!(pivot > tol))
      throw Error(ErrorCode::NotPositiveDefinite, "pivot " + std::to_string(j + 1) + " is " + std::to_string(pivot));
    const double d = std::sqrt(pivot);
    l[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= l[i * n + p] * l[j * n + p];
      l[i * n + j] = s / d;
    }
  }
  return f;
}

void CholFactor::append(std::span<const double> cross, double diag, double pivot_tol) {
  const std::size_t n = dim_;
  if (cross.size() != n) throw Error(ErrorCode::DimensionMismatch, "cholesky append");
  Vector y = n == 0 ? Vector{} : solve_lower(cross);
  const double pivot = diag - dot(y, y);
  if (!(pivot > pivot_tol))
    throw Error(ErrorCode::NotPositiveDefinite, "appended pivot is " + std::to_string(pivot));
  std::vector<double> grown((n + 1) * (n + 1), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(l_.begin() + static_cast<std::ptrdiff_t>(i * n), i + 1,
                grown.begin() + static_cast<std::ptrdiff_t>(i * (n + 1)));
  std::copy(y.begin(), y.end(), grown.begin() + static_cast<std::ptrdiff_t>(n * (n + 1)));
  grown[n * (n + 1) + n] = std::sqrt(pivot);
  l_ = std::move(grown);
  dim_ = n + 1;
}

Vector CholFactor::solve_lower(std::span<const double> b) const {
  if (b.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "triangular solve");
  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = y[i];
    const double* row = l_.data() + i * dim_;
    for (std::size_t p = 0; p < i; ++p) s -= row[p] * y[p];
    y[i] = s / row[i];
  }
  return y;
}

Vector CholFactor::solve_upper(std::span<const double> y) const {
  if (y.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "triangular solve");
  Vector x(y.begin(), y.end());
  for (std::size_t ii = dim_; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t p = ii + 1; p < dim_; ++p) s -= l_[p * dim_ + ii] * x[p];
    x[ii] = s / l_[ii * dim_ + ii];
  }
  return x;
}

Vector CholFactor::solve(std::span<const double> b) const { return solve_upper(solve_lower(b)); }

Vector CholFactor::multiply(std::span<const double> u) const {
  if (u.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "factor multiply");
  Vector out(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (std::size_t p = 0; p <= i; ++p) s += l_[i * dim_ + p] * u[p];
    out[i] = s;
  }
  return out;
}

double CholFactor::log_det() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) s += std::log(l_[i * dim_ + i]);
  return 2.0 * s;
}

SymMatrix CholFactor::reconstruct() const {
  SymMatrix m(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p <= j; ++p) s += l_[i * dim_ + p] * l_[j * dim_ + p];
      m.set_sym(i, j, s);
    }
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vector matvec(const SymMatrix& m, std::span<const double> x) {
  if (x.size() != m.dim()) throw Error(ErrorCode::DimensionMismatch, "matvec");
  Vector y(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) y[i] = dot(m.row(i), x);
  return y;
}

}  // namespace das
