#pragma once

// The initial condition
//
//   ψ(h) = E log Σ_x P(x) exp(2h·(xᵀX) + √(2h)·(xᵀZ) − h·(xᵀx)),
//
// X ~ P and Z ~ N(0, I_K), with the Z-expectation done by tensor
// Gauss–Hermite (K ≤ 3) or seeded Monte Carlo, and one-dimensional convex
// functions with their monotone conjugates.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <variant>

#include "hopfcone/cone_function.hpp"
#include "hopfcone/model.hpp"
#include "hopfcone/quadrature.hpp"

namespace hopfcone {

struct GaussHermiteMode {
  std::size_t nodes_per_axis = 64;
};

struct MonteCarloMode {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};

using EvalMode = std::variant<GaussHermiteMode, MonteCarloMode>;

struct PsiEstimate {
  double value = 0.0;
  double std_error = 0.0;           ///< zero in quadrature mode
  double projection_distance = 0.0; ///< |h − proj(h)| when h was outside the cone
  SymMatrix gradient;
};

class InitialCondition final : public ConeFunction {
 public:
  static constexpr std::size_t kMaxQuadratureDim = 3;

  explicit InitialCondition(DiscretePrior prior, EvalMode mode = GaussHermiteMode{});

  const DiscretePrior& prior() const noexcept { return prior_; }
  const EvalMode& mode() const noexcept { return mode_; }

  /// ψ(h); h must be PSD within kPsdTolerance.
  double psi(const SymMatrix& h) const;
  /// E[⟨x⟩ᵀ⟨x⟩] under the single-site Gibbs measure.
  SymMatrix grad_psi(const SymMatrix& h) const;
  /// Projects h onto the cone first and reports how far it moved.
  PsiEstimate estimate(const SymMatrix& h) const;

  std::size_t dim() const override { return prior_.dim(); }
  double value(const SymMatrix& h) const override { return estimate(h).value; }
  SymMatrix gradient(const SymMatrix& h) const override { return estimate(h).gradient; }
  std::pair<double, SymMatrix> value_and_gradient(const SymMatrix& h) const override;
  /// E[xᵀx]
  std::optional<SymMatrix> slope_bound() const override { return second_moment_; }

 private:
  PsiEstimate evaluate(const SymMatrix& h) const;

  DiscretePrior prior_;
  EvalMode mode_;
  SymMatrix second_moment_;
  TensorRule rule_;  // quadrature mode, or the drawn normals in Monte Carlo mode
};

/// Convex nondecreasing function on [0, ∞) (or [0, domain_max]).
struct ScalarConvexFunction {
  std::function<double(double)> f;
  double lipschitz = 1.0;
  double tolerance = 1e-12;
  double domain_max = std::numeric_limits<double>::infinity();

  double operator()(double x) const { return f(x); }
};

/// x ↦ ψ_P(x) for a one-dimensional prior P; Lipschitz bound E x².
ScalarConvexFunction layer_function(const DiscretePrior& prior, std::size_t nodes = 64);

/// sup_{0 ≤ x ≤ R} (x·y − f(x)); R = 0 selects 10·(1 + Lipschitz bound).
/// R doubles while the objective is still increasing there; SolverCapError
/// after ten doublings.
double conjugate_1d(const ScalarConvexFunction& f, double y, double radius = 0.0);

/// f* as a ScalarConvexFunction on [0, lipschitz(f)].
ScalarConvexFunction conjugate_function(ScalarConvexFunction f);

/// Maximiser of a concave (or unimodal) function on [a, b] by golden section.
double golden_section_max(const std::function<double(double)>& g, double a, double b, double tol);

}  // namespace hopfcone
