#pragma once

#include <cstddef>
#include <vector>

namespace hopfcone {

/// Nodes and weights with Σ w f(z) ≈ E f(Z), Z ~ N(0,1).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point probabilists' rule (weights sum to 1).
GaussHermite gauss_hermite(std::size_t n);

/// Tensor product rule for E f(Z), Z ~ N(0, I_dim), as flat dim-vectors.
/// Product weights below `prune` are dropped and the rest renormalised.
struct TensorRule {
  std::size_t dim = 0;
  std::vector<double> nodes;  ///< size() * dim, row per node
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  const double* node(std::size_t i) const { return nodes.data() + i * dim; }
};

TensorRule tensor_gauss_hermite(std::size_t dim, std::size_t n_per_axis, double prune = 1e-18);

}  // namespace hopfcone
