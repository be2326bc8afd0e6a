#pragma once

// Model data of the finite-rank tensor inference problem
//
//   Y = sqrt(2t / N^(p-1)) · X^{⊗p} A + W,      Ȳ = X sqrt(2h) + Z,
//
// the nonlinearity H(q) = (AAᵀ)·q^{⊗p} and the Hamiltonian H_N(t,h,x).
// Multi-indices (j_1,…,j_p) are flattened lexicographically with j_1 most
// significant, for rows of A (base K) and rows of W (base N) alike.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "hopfcone/symcone.hpp"

namespace hopfcone {

/// Fixed interaction data (K, L, p, A) with A of shape K^p × L.
class InteractionSpec {
 public:
  static constexpr std::size_t kMaxTensorSize = 1'000'000;

  InteractionSpec(std::size_t K, std::size_t L, std::size_t p, Matrix A);

  /// L = 1 and A_j = 1 iff j_1 = … = j_p; gives H(q) = Σ_{k,k'} q_{kk'}^p.
  static InteractionSpec diagonal_indicator(std::size_t K, std::size_t p);
  /// p = 2, L = K-1, A_{(k,k+1),k} = 1; gives H(q) = Σ_k q_{kk} q_{k+1,k+1}.
  static InteractionSpec chain(std::size_t K);

  std::size_t K() const noexcept { return K_; }
  std::size_t L() const noexcept { return L_; }
  std::size_t p() const noexcept { return p_; }
  const Matrix& A() const noexcept { return A_; }
  /// K^p
  std::size_t tensor_size() const noexcept { return A_.rows(); }

 private:
  std::size_t K_, L_, p_;
  Matrix A_;
};

/// Finitely supported law of one row of X.
class DiscretePrior {
 public:
  DiscretePrior(std::vector<std::vector<double>> atoms, std::vector<double> weights);

  /// Independent uniform ±1 coordinates (2^K atoms).
  static DiscretePrior rademacher(std::size_t K);
  static DiscretePrior single_atom(std::vector<double> atom);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& atom(std::size_t a) const { return atoms_[a]; }
  const std::vector<std::vector<double>>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& log_weights() const noexcept { return log_weights_; }

  std::vector<double> mean() const;
  /// E[xᵀx] for a row x ~ P.
  SymMatrix second_moment() const;
  /// Law of coordinate k, equal atoms merged.
  DiscretePrior marginal(std::size_t k) const;
  /// True iff the law equals the product of its coordinate marginals.
  bool has_independent_coordinates(double tol = 1e-12) const;

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> atoms_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
};

/// One realisation of (X, W, Z).
struct Disorder {
  Matrix X;  ///< N × K, rows drawn from the prior
  Matrix W;  ///< N^p × L standard Gaussians
  Matrix Z;  ///< N × K standard Gaussians
  std::uint64_t seed = 0;
};

/// H(q) = (AAᵀ)·q^{⊗p}, evaluated by mode products; q need not be symmetric.
double nonlinearity_H(const InteractionSpec& spec, const Matrix& q);
double nonlinearity_H(const InteractionSpec& spec, const SymMatrix& q);

/// ∂H/∂q_{ab} for every entry of a general K×K argument.
Matrix partial_H(const InteractionSpec& spec, const Matrix& q);

/// Frobenius gradient of H on symmetric matrices: G with
/// H(q + εD) = H(q) + ε G·D + O(ε²) for symmetric D.
SymMatrix grad_H(const InteractionSpec& spec, const SymMatrix& q);

/// x^{⊗p} A as an N^p × L matrix.  Throws ValidationError past the desk-scale guard.
Matrix tensor_image(const InteractionSpec& spec, const Matrix& x);

/// Returns ((x^{⊗p}A)·(x'^{⊗p}A) computed from the explicit images, H(xᵀx')).
std::pair<double, double> overlap_identity_check(const InteractionSpec& spec, const Matrix& x, const Matrix& xp);

/// H_N(t,h,x) for the observations generated by disorder `d`.
double hamiltonian(const InteractionSpec& spec, double t, const SymMatrix& h, const Matrix& x, const Disorder& d);

Disorder draw_disorder(std::uint64_t seed, std::size_t N, const InteractionSpec& spec, const DiscretePrior& prior);

/// base^exp, throwing ValidationError when the result would exceed `cap`.
std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap);

}  // namespace hopfcone
