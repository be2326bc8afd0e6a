#pragma once

// Dense linear algebra on small real symmetric matrices and the
// positive-semidefinite cone S^K_+.  Norms are Frobenius throughout.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hopfcone {

/// Cone-membership slack used wherever a PSD test is implicit.
inline constexpr double kPsdTolerance = 1e-10;

/// Dense row-major rectangular matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Matrix transposed() const;
  double norm() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

/// K×K real symmetric matrix holding its upper triangle row by row.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);
  /// `packed_upper` holds K(K+1)/2 finite entries (0,0),(0,1),…,(0,K-1),(1,1),…
  SymMatrix(std::size_t dim, std::vector<double> packed_upper);

  static SymMatrix identity(std::size_t dim);
  static SymMatrix scaled_identity(std::size_t dim, double s);
  static SymMatrix diagonal(std::span<const double> d);
  /// v vᵀ
  static SymMatrix outer(std::span<const double> v);
  /// Accepts a square matrix whose asymmetry is at most `tol` entrywise and
  /// keeps the symmetric part.
  static SymMatrix from_dense(const Matrix& m, double tol = 0.0);
  /// Row-major nested list, e.g. {{1,2},{2,3}}.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows, double tol = 0.0);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return upper_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, double v);
  std::span<const double> packed() const noexcept { return upper_; }
  Matrix dense() const;
  std::vector<double> diagonal_entries() const;

  double norm() const;
  double trace() const;

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);

  bool operator==(const SymMatrix&) const = default;

 private:
  std::size_t index(std::size_t i, std::size_t j) const;

  std::size_t dim_ = 0;
  std::vector<double> upper_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);
SymMatrix operator*(SymMatrix a, double s);
SymMatrix operator-(SymMatrix a);

/// Eigenvalues ascending; column i of `vectors` pairs with `values[i]`.
struct EigenDecomposition {
  std::vector<double> values;
  Matrix vectors;

  /// V·diag(f(λ))·Vᵀ
  SymMatrix compose(const std::function<double(double)>& f) const;
  SymMatrix reconstruct() const;
  std::vector<double> vector(std::size_t i) const;
};

/// Cyclic Jacobi rotations.  Throws SolverCapError past 100·K² rotations.
EigenDecomposition eig_sym(const SymMatrix& m);

double min_eigenvalue(const SymMatrix& m);
double max_eigenvalue(const SymMatrix& m);

bool is_psd(const SymMatrix& m, double tol);
/// a ≤ b in the Loewner order, i.e. b - a is PSD up to `tol`.
bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol);

/// Principal square root; eigenvalues in [-tol, 0) are clipped to zero.
/// Throws ValidationError if m is not PSD within kPsdTolerance·(1+|m|).
SymMatrix sqrt_psd(const SymMatrix& m);

/// Frobenius-nearest PSD matrix.
SymMatrix psd_project(const SymMatrix& m);

double frobenius_dot(const SymMatrix& a, const SymMatrix& b);
double frobenius_dot(const Matrix& a, const Matrix& b);
/// a · b with a symmetric and b an arbitrary K×K matrix.
double frobenius_dot(const SymMatrix& a, const Matrix& b);

/// |h|·|h⁻¹| for positive definite h, +∞ for singular PSD h.
double condition_number(const SymMatrix& h);

/// xᵀx
SymMatrix gram(const Matrix& x);
/// xᵀy, generally not symmetric.
Matrix cross_gram(const Matrix& x, const Matrix& y);

}  // namespace hopfcone
