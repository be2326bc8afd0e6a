#include "hopfcone/symcone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hopfcone/errors.hpp"

namespace hopfcone {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + ": non-finite entry");
  }
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) {
    throw ValidationError("Matrix: expected " + std::to_string(rows * cols) + " entries, got " +
                          std::to_string(data_.size()));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  require_same_dim(a.cols(), b.rows(), "Matrix product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

// ------------------------------------------------------------- SymMatrix

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim), upper_(dim * (dim + 1) / 2, 0.0) {}

SymMatrix::SymMatrix(std::size_t dim, std::vector<double> packed_upper)
    : dim_(dim), upper_(std::move(packed_upper)) {
  if (upper_.size() != dim * (dim + 1) / 2) {
    throw ValidationError("SymMatrix: expected " + std::to_string(dim * (dim + 1) / 2) +
                          " packed entries, got " + std::to_string(upper_.size()));
  }
  require_finite(upper_, "SymMatrix");
}

SymMatrix SymMatrix::identity(std::size_t dim) { return scaled_identity(dim, 1.0); }

SymMatrix SymMatrix::scaled_identity(std::size_t dim, double s) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.set(i, i, s);
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  SymMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
  return m;
}

SymMatrix SymMatrix::outer(std::span<const double> v) {
  SymMatrix m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i; j < v.size(); ++j) m.set(i, j, v[i] * v[j]);
  return m;
}

SymMatrix SymMatrix::from_dense(const Matrix& m, double tol) {
  require_same_dim(m.rows(), m.cols(), "SymMatrix::from_dense");
  SymMatrix s(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol) throw ValidationError("SymMatrix::from_dense: matrix is not symmetric");
      s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
    }
  return s;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows, double tol) {
  const std::size_t n = rows.size();
  std::vector<double> flat;
  flat.reserve(n * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw ValidationError("SymMatrix::from_rows: matrix is not square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return from_dense(Matrix(n, n, std::move(flat)), tol);
}

std::size_t SymMatrix::index(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return i * dim_ - i * (i - 1) / 2 + (j - i);
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  if (!std::isfinite(v)) throw ValidationError("SymMatrix::set: non-finite entry");
  upper_[index(i, j)] = v;
}

Matrix SymMatrix::dense() const {
  Matrix m(dim_, dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
  return m;
}

std::vector<double> SymMatrix::diagonal_entries() const {
  std::vector<double> d(dim_);
  for (std::size_t i = 0; i < dim_; ++i) d[i] = (*this)(i, i);
  return d;
}

double SymMatrix::norm() const { return std::sqrt(frobenius_dot(*this, *this)); }

double SymMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) s += (*this)(i, i);
  return s;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  require_same_dim(dim_, o.dim_, "SymMatrix +");
  for (std::size_t i = 0; i < upper_.size(); ++i) upper_[i] += o.upper_[i];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  require_same_dim(dim_, o.dim_, "SymMatrix -");
  for (std::size_t i = 0; i < upper_.size(); ++i) upper_[i] -= o.upper_[i];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& x : upper_) x *= s;
  return *this;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
SymMatrix operator-(SymMatrix a) { return a *= -1.0; }

// ------------------------------------------------------ eigen-decomposition

SymMatrix EigenDecomposition::compose(const std::function<double(double)>& f) const {
  const std::size_t n = values.size();
  std::vector<double> fv(n);
  for (std::size_t k = 0; k < n; ++k) fv[k] = f(values[k]);
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += vectors(i, k) * fv[k] * vectors(j, k);
      out.set(i, j, s);
    }
  return out;
}

SymMatrix EigenDecomposition::reconstruct() const {
  return compose([](double x) { return x; });
}

std::vector<double> EigenDecomposition::vector(std::size_t i) const {
  std::vector<double> v(vectors.rows());
  for (std::size_t r = 0; r < v.size(); ++r) v[r] = vectors(r, i);
  return v;
}

EigenDecomposition eig_sym(const SymMatrix& m) {
  const std::size_t n = m.dim();
  Matrix a = m.dense();
  Matrix v = Matrix::identity(n);
  const double scale = m.norm();
  const std::size_t max_rotations = std::max<std::size_t>(100 * n * n, 1);
  std::size_t rotations = 0;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  while (scale > 0.0 && off_norm() > 1e-12 * scale) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= std::numeric_limits<double>::min()) continue;
        if (++rotations > max_rotations) {
          throw SolverCapError("eig_sym: Jacobi rotation cap exceeded");
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

double min_eigenvalue(const SymMatrix& m) {
  if (m.dim() == 1) return m(0, 0);
  return eig_sym(m).values.front();
}

double max_eigenvalue(const SymMatrix& m) {
  if (m.dim() == 1) return m(0, 0);
  return eig_sym(m).values.back();
}

bool is_psd(const SymMatrix& m, double tol) {
  if (tol < 0.0) throw ValidationError("is_psd: negative tolerance");
  if (m.dim() == 0) return true;
  return min_eigenvalue(m) >= -tol;
}

bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
  require_same_dim(a.dim(), b.dim(), "loewner_leq");
  return is_psd(b - a, tol);
}

SymMatrix sqrt_psd(const SymMatrix& m) {
  if (m.dim() == 1) {
    if (m(0, 0) < -kPsdTolerance * (1.0 + std::abs(m(0, 0)))) throw ValidationError("sqrt_psd: input is not PSD");
    return SymMatrix(1, {std::sqrt(std::max(m(0, 0), 0.0))});
  }
  const auto e = eig_sym(m);
  if (!e.values.empty() && e.values.front() < -kPsdTolerance * (1.0 + m.norm())) {
    throw ValidationError("sqrt_psd: input is not PSD");
  }
  return e.compose([](double x) { return std::sqrt(std::max(x, 0.0)); });
}

SymMatrix psd_project(const SymMatrix& m) {
  if (m.dim() == 1) return SymMatrix(1, {std::max(m(0, 0), 0.0)});
  const auto e = eig_sym(m);
  if (e.values.front() >= 0.0) return m;
  return e.compose([](double x) { return std::max(x, 0.0); });
}

double frobenius_dot(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "frobenius_dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    s += a(i, i) * b(i, i);
    for (std::size_t j = i + 1; j < a.dim(); ++j) s += 2.0 * a(i, j) * b(i, j);
  }
  return s;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("frobenius_dot: shape mismatch");
  double s = 0.0;
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) s += da[i] * db[i];
  return s;
}

double frobenius_dot(const SymMatrix& a, const Matrix& b) {
  if (b.rows() != a.dim() || b.cols() != a.dim()) throw ValidationError("frobenius_dot: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) s += a(i, j) * b(i, j);
  return s;
}

double condition_number(const SymMatrix& h) {
  const auto e = eig_sym(h);
  if (e.values.empty()) throw ValidationError("condition_number: empty matrix");
  if (e.values.front() < -kPsdTolerance) throw ValidationError("condition_number: input is not PSD");
  if (e.values.front() <= 0.0) return std::numeric_limits<double>::infinity();
  double norm_sq = 0.0, inv_norm_sq = 0.0;
  for (double l : e.values) {
    norm_sq += l * l;
    inv_norm_sq += 1.0 / (l * l);
  }
  return std::sqrt(norm_sq) * std::sqrt(inv_norm_sq);
}

SymMatrix gram(const Matrix& x) {
  SymMatrix g(x.cols());
  for (std::size_t a = 0; a < x.cols(); ++a)
    for (std::size_t b = a; b < x.cols(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, a) * x(i, b);
      g.set(a, b, s);
    }
  return g;
}

Matrix cross_gram(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw ValidationError("cross_gram: row count mismatch");
  Matrix g(x.cols(), y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t a = 0; a < x.cols(); ++a) {
      const double xa = x(i, a);
      for (std::size_t b = 0; b < y.cols(); ++b) g(a, b) += xa * y(i, b);
    }
  return g;
}

}  // namespace hopfcone
