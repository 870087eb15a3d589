#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace das {

using Vector = std::vector<double>;

/// Dense square matrix, row-major. Used for covariances and their inverses.
/// Symmetry is enforced at the points where a matrix is accepted as a
/// covariance, not on every write.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim, double fill = 0.0) : dim_(dim), data_(dim * dim, fill) {}

  static SymMatrix identity(std::size_t dim);
  /// Builds from nested rows; throws DimensionMismatch unless square, and
  /// ParseError if the rows are not exactly symmetric.
  static SymMatrix from_rows(const std::vector<Vector>& rows);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * dim_ + j]; }

  /// Writes both (i,j) and (j,i).
  void set_sym(std::size_t i, std::size_t j, double v) noexcept {
    data_[i * dim_ + j] = v;
    data_[j * dim_ + i] = v;
  }

  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> data() const noexcept { return data_; }

  bool is_symmetric() const noexcept;
  double max_diagonal() const noexcept;

  /// Principal submatrix on `idx`, in the given order.
  SymMatrix restrict(std::span<const std::size_t> idx) const;

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Lower-triangular Cholesky factor L with L * L^T equal to the source matrix.
class CholFactor {
 public:
  CholFactor() = default;
  /// Wraps an explicit lower factor (row-major, dim x dim). The upper triangle
  /// is ignored. Mainly for tests that need degenerate factors.
  static CholFactor from_lower(std::size_t dim, std::vector<double> lower);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return j <= i ? l_[i * dim_ + j] : 0.0; }

  /// Solves L y = b.
  Vector solve_lower(std::span<const double> b) const;
  /// Solves L^T x = y.
  Vector solve_upper(std::span<const double> y) const;
  /// Solves (L L^T) x = b.
  Vector solve(std::span<const double> b) const;
  /// L * u.
  Vector multiply(std::span<const double> u) const;

  /// ln det(L L^T) = 2 * sum ln L_ii.
  double log_det() const noexcept;
  SymMatrix reconstruct() const;

  /// Appends one row/column in O(dim^2): the source matrix grows by `cross`
  /// (covariances against existing rows) and `diag`. Throws
  /// NotPositiveDefinite if the new pivot is not positive.
  void append(std::span<const double> cross, double diag, double pivot_tol);

 private:
  friend CholFactor cholesky(const SymMatrix& m);
  std::size_t dim_ = 0;
  std::vector<double> l_;
};

/// Relative pivot threshold for positive-definiteness checks.
inline constexpr double kPivotRelTol = 1e-12;
/// Absolute floor below which a Schur complement or conditional variance is
/// treated as singular.
inline constexpr double kSingularTol = 1e-12;

/// Throws NotPositiveDefinite when a pivot is <= kPivotRelTol * max diagonal.
CholFactor cholesky(const SymMatrix& m);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
/// y = M x for a square matrix.
Vector matvec(const SymMatrix& m, std::span<const double> x);

}  // namespace das
