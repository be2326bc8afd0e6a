#pragma once

// Hopf formula
//
//   f(t,h) = sup_{h''} inf_{h'} { h''·(h − h') + ψ(h') + t·H(h'') }
//
// over the PSD cone, its restriction to the nonnegative orthant when H only
// sees diagonals, the layered one-dimensional reduction, and the scalar
// Hopf–Lax formula.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hopfcone/cone_function.hpp"
#include "hopfcone/initial_condition.hpp"
#include "hopfcone/model.hpp"
#include "hopfcone/symcone.hpp"

namespace hopfcone {

struct SolverConfig {
  double outer_radius = 0.0;  ///< 0 selects 2·K^{3/2}
  std::size_t grid_resolution = 9;
  std::size_t rotations = 4;
  std::size_t multistarts = 5;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double inner_tolerance = 1e-9;
  double outer_tolerance = 1e-6;
  /// Inner tolerance while ranking the coarse outer grid.
  double screen_tolerance = 1e-6;
  std::size_t inner_max_iterations = 100000;
  std::size_t outer_max_iterations = 10000;
  std::size_t layered_grid = 21;
  unsigned threads = 1;

  double radius(std::size_t K) const;
  void validate() const;
};

/// Feasible set of both the inner and the outer problem.
enum class Geometry { cone, orthant };

struct InnerResult {
  double value = 0.0;  ///< inf_{h'} ψ(h') − h''·h'
  SymMatrix argmin;
  std::size_t iterations = 0;
  bool unbounded = false;
};

struct HopfResult {
  double value = 0.0;
  SymMatrix h_outer;  ///< maximiser h''
  SymMatrix h_inner;  ///< minimiser h'
  std::size_t outer_starts = 0;
  std::size_t inner_iterations = 0;
  double gap_estimate = 0.0;  ///< best minus second-best refined start
};

/// inf over the feasible set of ψ(h') − h''·h', started at 0 and at h''.
/// Divergence of the iterates is reported through `unbounded`.
InnerResult inner_inf(const ConeFunction& psi, const SymMatrix& h_outer, const SolverConfig& cfg,
                      Geometry geometry = Geometry::cone);

HopfResult hopf_value(const ConeFunction& psi, const InteractionSpec& spec, double t, const SymMatrix& h,
                      const SolverConfig& cfg = {});

/// True iff H(q) = H(diag q) on `samples` seeded random PSD matrices.
bool depends_only_on_diagonal(const InteractionSpec& spec, std::size_t samples = 20, std::uint64_t seed = 7);

/// The same formula on R^K_+ with ψ and H evaluated at diagonal matrices.
/// Requires depends_only_on_diagonal(spec).  Returned matrices are diagonal.
HopfResult hopf_diagonal(const ConeFunction& psi, const InteractionSpec& spec, double t, std::span<const double> x,
                         const SolverConfig& cfg = {});

/// sup over odd-layer duals of −Σ_odd ψ_k*(x'_k) + Σ_even ψ_k(t(x'_{k−1} + x'_{k+1})),
/// layers numbered from 1 and x'_{K+1} = 0.
double layered_reduced(double t, const std::vector<ScalarConvexFunction>& layers, const SolverConfig& cfg = {});

/// inf_y g(y) + |y − x|²/(4t) for g with Lipschitz constant `lipschitz`.
double hopf_lax_1d(const std::function<double(double)>& g, double lipschitz, double t, double x);

}  // namespace hopfcone
