#include "hopfcone/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "hopfcone/errors.hpp"
#include "hopfcone/rng.hpp"

namespace hopfcone {

namespace {

enum Stream : std::uint64_t { kStreamX = 0, kStreamW = 1, kStreamZ = 2 };

// Contracts mode `mode` of a row-major tensor of shape `shape` with m (r×c):
// out[.., a, ..] = Σ_b m(a,b) · in[.., b, ..], where shape[mode] == c.
std::vector<double> mode_product(const std::vector<double>& in, std::vector<std::size_t>& shape, std::size_t mode,
                                 const Matrix& m) {
  std::size_t outer = 1, inner = 1;
  for (std::size_t n = 0; n < mode; ++n) outer *= shape[n];
  for (std::size_t n = mode + 1; n < shape.size(); ++n) inner *= shape[n];
  const std::size_t c = shape[mode], r = m.rows();
  std::vector<double> out(outer * r * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = in.data() + o * c * inner;
    double* dst = out.data() + o * r * inner;
    for (std::size_t a = 0; a < r; ++a) {
      double* drow = dst + a * inner;
      for (std::size_t b = 0; b < c; ++b) {
        const double mab = m(a, b);
        if (mab == 0.0) continue;
        const double* srow = src + b * inner;
        for (std::size_t s = 0; s < inner; ++s) drow[s] += mab * srow[s];
      }
    }
  }
  shape[mode] = r;
  return out;
}

std::vector<double> column(const Matrix& A, std::size_t l) {
  std::vector<double> v(A.rows());
  for (std::size_t j = 0; j < A.rows(); ++j) v[j] = A(j, l);
  return v;
}

void require_square(const InteractionSpec& spec, const Matrix& q, const char* what) {
  if (q.rows() != spec.K() || q.cols() != spec.K()) {
    throw ValidationError(std::string(what) + ": expected a " + std::to_string(spec.K()) + "x" +
                          std::to_string(spec.K()) + " argument");
  }
}

}  // namespace

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) {
      throw ValidationError("size " + std::to_string(base) + "^" + std::to_string(exp) + " exceeds the cap " +
                            std::to_string(cap));
    }
    r *= base;
  }
  if (r > cap) throw ValidationError("size exceeds the cap " + std::to_string(cap));
  return r;
}

// ------------------------------------------------------- InteractionSpec

InteractionSpec::InteractionSpec(std::size_t K, std::size_t L, std::size_t p, Matrix A)
    : K_(K), L_(L), p_(p), A_(std::move(A)) {
  if (K == 0 || L == 0 || p == 0) throw ValidationError("InteractionSpec: K, L and p must be positive");
  const std::size_t rows = checked_power(K, p, kMaxTensorSize);
  if (A_.rows() != rows || A_.cols() != L) {
    throw ValidationError("InteractionSpec: A must be K^p x L = " + std::to_string(rows) + "x" + std::to_string(L));
  }
  for (double a : A_.data()) {
    if (!std::isfinite(a)) throw ValidationError("InteractionSpec: A has a non-finite entry");
  }
}

InteractionSpec InteractionSpec::diagonal_indicator(std::size_t K, std::size_t p) {
  const std::size_t rows = checked_power(K, p, kMaxTensorSize);
  Matrix A(rows, 1);
  std::size_t step = 0;  // flat index of (1,…,1) in base K
  for (std::size_t n = 0; n < p; ++n) step = step * K + 1;
  for (std::size_t k = 0; k < K; ++k) A(k * step, 0) = 1.0;
  return InteractionSpec(K, 1, p, std::move(A));
}

InteractionSpec InteractionSpec::chain(std::size_t K) {
  if (K < 2) throw ValidationError("InteractionSpec::chain: K must be at least 2");
  Matrix A(K * K, K - 1);
  for (std::size_t k = 0; k + 1 < K; ++k) A(k * K + (k + 1), k) = 1.0;
  return InteractionSpec(K, K - 1, 2, std::move(A));
}

// --------------------------------------------------------- DiscretePrior

DiscretePrior::DiscretePrior(std::vector<std::vector<double>> atoms, std::vector<double> weights)
    : dim_(0), atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw ValidationError("DiscretePrior: no atoms");
  if (atoms_.size() != weights_.size()) throw ValidationError("DiscretePrior: atoms and weights differ in length");
  dim_ = atoms_.front().size();
  if (dim_ == 0) throw ValidationError("DiscretePrior: atoms must be non-empty vectors");
  const double bound = std::sqrt(static_cast<double>(dim_)) * (1.0 + 1e-12);
  for (const auto& v : atoms_) {
    if (v.size() != dim_) throw ValidationError("DiscretePrior: atoms differ in dimension");
    double n2 = 0.0;
    for (double x : v) {
      if (!std::isfinite(x)) throw ValidationError("DiscretePrior: non-finite atom entry");
      n2 += x * x;
    }
    if (std::sqrt(n2) > bound) throw ValidationError("DiscretePrior: atom norm exceeds sqrt(K)");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("DiscretePrior: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("DiscretePrior: weights must sum to 1");
  log_weights_.resize(weights_.size());
  std::transform(weights_.begin(), weights_.end(), log_weights_.begin(), [](double w) { return std::log(w); });
}

DiscretePrior DiscretePrior::rademacher(std::size_t K) {
  if (K == 0 || K > 20) throw ValidationError("DiscretePrior::rademacher: K out of range");
  const std::size_t n = std::size_t{1} << K;
  std::vector<std::vector<double>> atoms(n, std::vector<double>(K));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t k = 0; k < K; ++k) atoms[a][k] = ((a >> (K - 1 - k)) & 1u) ? -1.0 : 1.0;
  return DiscretePrior(std::move(atoms), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscretePrior DiscretePrior::single_atom(std::vector<double> atom) {
  return DiscretePrior({std::move(atom)}, {1.0});
}

std::vector<double> DiscretePrior::mean() const {
  std::vector<double> m(dim_, 0.0);
  for (std::size_t a = 0; a < size(); ++a)
    for (std::size_t k = 0; k < dim_; ++k) m[k] += weights_[a] * atoms_[a][k];
  return m;
}

SymMatrix DiscretePrior::second_moment() const {
  SymMatrix m(dim_);
  for (std::size_t a = 0; a < size(); ++a) m += weights_[a] * SymMatrix::outer(atoms_[a]);
  return m;
}

DiscretePrior DiscretePrior::marginal(std::size_t k) const {
  if (k >= dim_) throw ValidationError("DiscretePrior::marginal: coordinate out of range");
  std::map<double, double> merged;
  for (std::size_t a = 0; a < size(); ++a) merged[atoms_[a][k]] += weights_[a];
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;
  for (const auto& [v, w] : merged) {
    atoms.push_back({v});
    weights.push_back(w);
  }
  // Re-normalise against accumulated round-off so the invariant holds.
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return DiscretePrior(std::move(atoms), std::move(weights));
}

bool DiscretePrior::has_independent_coordinates(double tol) const {
  std::vector<DiscretePrior> margins;
  for (std::size_t k = 0; k < dim_; ++k) margins.push_back(marginal(k));
  std::map<std::vector<double>, double> joint;
  for (std::size_t a = 0; a < size(); ++a) joint[atoms_[a]] += weights_[a];
  std::size_t count = 1;
  for (const auto& m : margins) count *= m.size();
  std::vector<std::size_t> digit(dim_, 0);
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<double> v(dim_);
    double w = 1.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      v[k] = margins[k].atom(digit[k])[0];
      w *= margins[k].weights()[digit[k]];
    }
    const auto it = joint.find(v);
    const double got = it == joint.end() ? 0.0 : it->second;
    if (std::abs(got - w) > tol) return false;
    for (std::size_t k = dim_; k-- > 0;) {
      if (++digit[k] < margins[k].size()) break;
      digit[k] = 0;
    }
  }
  return true;
}

// ----------------------------------------------------------- nonlinearity

double nonlinearity_H(const InteractionSpec& spec, const Matrix& q) {
  require_square(spec, q, "nonlinearity_H");
  double total = 0.0;
  for (std::size_t l = 0; l < spec.L(); ++l) {
    const auto a = column(spec.A(), l);
    std::vector<std::size_t> shape(spec.p(), spec.K());
    auto v = a;
    for (std::size_t n = 0; n < spec.p(); ++n) v = mode_product(v, shape, n, q);
    total += std::inner_product(a.begin(), a.end(), v.begin(), 0.0);
  }
  return total;
}

double nonlinearity_H(const InteractionSpec& spec, const SymMatrix& q) { return nonlinearity_H(spec, q.dense()); }

Matrix partial_H(const InteractionSpec& spec, const Matrix& q) {
  require_square(spec, q, "partial_H");
  const std::size_t K = spec.K(), p = spec.p();
  Matrix d(K, K);
  for (std::size_t l = 0; l < spec.L(); ++l) {
    const auto a = column(spec.A(), l);
    for (std::size_t n = 0; n < p; ++n) {
      std::vector<std::size_t> shape(p, K);
      auto u = a;
      for (std::size_t m = 0; m < p; ++m) {
        if (m != n) u = mode_product(u, shape, m, q);
      }
      std::size_t outer = 1, inner = 1;
      for (std::size_t m = 0; m < n; ++m) outer *= K;
      for (std::size_t m = n + 1; m < p; ++m) inner *= K;
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t s = 0; s < inner; ++s)
          for (std::size_t ia = 0; ia < K; ++ia) {
            const double av = a[(o * K + ia) * inner + s];
            if (av == 0.0) continue;
            for (std::size_t ib = 0; ib < K; ++ib) d(ia, ib) += av * u[(o * K + ib) * inner + s];
          }
    }
  }
  return d;
}

SymMatrix grad_H(const InteractionSpec& spec, const SymMatrix& q) {
  if (q.dim() != spec.K()) throw ValidationError("grad_H: dimension mismatch");
  return SymMatrix::from_dense(partial_H(spec, q.dense()), std::numeric_limits<double>::infinity());
}

Matrix tensor_image(const InteractionSpec& spec, const Matrix& x) {
  if (x.cols() != spec.K()) throw ValidationError("tensor_image: x must have K columns");
  const std::size_t N = x.rows(), p = spec.p(), L = spec.L();
  const std::size_t Np = checked_power(N, p, InteractionSpec::kMaxTensorSize);
  if (Np * L > InteractionSpec::kMaxTensorSize) throw ValidationError("tensor_image: N^p L exceeds the desk-scale guard");
  Matrix image(Np, L);
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<std::size_t> shape(p, spec.K());
    auto v = column(spec.A(), l);
    for (std::size_t n = 0; n < p; ++n) v = mode_product(v, shape, n, x);
    for (std::size_t i = 0; i < Np; ++i) image(i, l) = v[i];
  }
  return image;
}

std::pair<double, double> overlap_identity_check(const InteractionSpec& spec, const Matrix& x, const Matrix& xp) {
  if (x.rows() != xp.rows() || x.cols() != xp.cols()) throw ValidationError("overlap_identity_check: shape mismatch");
  const double naive = frobenius_dot(tensor_image(spec, x), tensor_image(spec, xp));
  return {naive, nonlinearity_H(spec, cross_gram(x, xp))};
}

double hamiltonian(const InteractionSpec& spec, double t, const SymMatrix& h, const Matrix& x, const Disorder& d) {
  if (!(t >= 0.0)) throw ValidationError("hamiltonian: t must be nonnegative");
  if (h.dim() != spec.K()) throw ValidationError("hamiltonian: h has the wrong dimension");
  if (!is_psd(h, kPsdTolerance * (1.0 + h.norm()))) throw ValidationError("hamiltonian: h is not PSD");
  if (x.rows() != d.X.rows() || x.cols() != spec.K()) throw ValidationError("hamiltonian: x has the wrong shape");
  const double N = static_cast<double>(x.rows());
  const double scale = t / std::pow(N, static_cast<double>(spec.p()) - 1.0);

  // Y = sqrt(2·scale)·X^{⊗p}A + W, so the signal part reduces through the overlap identity.
  const double signal = nonlinearity_H(spec, cross_gram(x, d.X));
  const double self = nonlinearity_H(spec, cross_gram(x, x));
  const double noise = scale > 0.0 ? frobenius_dot(tensor_image(spec, x), d.W) : 0.0;
  const double h0 = 2.0 * scale * signal + std::sqrt(2.0 * scale) * noise - scale * self;

  // sqrt(2h)·(xᵀȲ) with Ȳ = X sqrt(2h) + Z.
  const SymMatrix root = sqrt_psd(2.0 * h);
  const double side = 2.0 * frobenius_dot(h, cross_gram(x, d.X)) + frobenius_dot(root, cross_gram(x, d.Z)) -
                      frobenius_dot(h, gram(x));
  return h0 + side;
}

Disorder draw_disorder(std::uint64_t seed, std::size_t N, const InteractionSpec& spec, const DiscretePrior& prior) {
  if (N == 0) throw ValidationError("draw_disorder: N must be positive");
  if (prior.dim() != spec.K()) throw ValidationError("draw_disorder: prior dimension differs from K");
  const std::size_t K = spec.K();
  const std::size_t Np = checked_power(N, spec.p(), 10 * InteractionSpec::kMaxTensorSize);

  Disorder d{Matrix(N, K), Matrix(Np, spec.L()), Matrix(N, K), seed};
  const CounterRng xs(seed, kStreamX), ws(seed, kStreamW), zs(seed, kStreamZ);
  const auto& w = prior.weights();
  for (std::size_t i = 0; i < N; ++i) {
    const double u = xs.uniform(i);
    std::size_t a = 0;
    double cum = w[0];
    while (u >= cum && a + 1 < w.size()) cum += w[++a];
    for (std::size_t k = 0; k < K; ++k) d.X(i, k) = prior.atom(a)[k];
  }
  auto wd = d.W.data();
  for (std::size_t i = 0; i < wd.size(); ++i) wd[i] = ws.normal(i);
  auto zd = d.Z.data();
  for (std::size_t i = 0; i < zd.size(); ++i) zd[i] = zs.normal(i);
  return d;
}

}  // namespace hopfcone
