#pragma once

// Finite-difference diagnostics for ∂_t f − H(∇f) = 0 on [0,∞) × S^K_+ and
// the approach of F̄_N to the Hopf value as N grows.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "hopfcone/free_energy.hpp"
#include "hopfcone/hopf_solver.hpp"
#include "hopfcone/model.hpp"
#include "hopfcone/symcone.hpp"

namespace hopfcone {

using ValueFunction = std::function<double(double, const SymMatrix&)>;

enum class SliceKind { diagonal, random_psd };

/// Interior grid t_i × h(s_j), with h(s) = s·I or s·B for a seeded random
/// positive definite B of unit norm.
struct GridSpec {
  double t_min = 0.1, t_max = 1.0;
  std::size_t n_t = 10;
  SliceKind slice = SliceKind::diagonal;
  double s_min = 0.05, s_max = 1.0;
  std::size_t n_h = 10;
  std::uint64_t seed = 0;
  double delta = 1e-3;
  double tolerance = 1e-3;
  unsigned threads = 1;

  SymMatrix direction(std::size_t K) const;
  SymMatrix h_at(std::size_t K, std::size_t j) const;
  double t_at(std::size_t i) const;
  /// Throws ValidationError unless every point keeps its stencil inside the cone.
  void validate(std::size_t K) const;
};

/// Central differences of f at (t,h) along t and an orthonormal basis of S^K.
struct FiniteDifference {
  double dt = 0.0;
  SymMatrix grad;
  /// Largest gap between a one-sided and the central difference.
  double one_sided_gap = 0.0;
};

FiniteDifference finite_difference(const ValueFunction& f, double t, const SymMatrix& h, double delta);

struct ResidualPoint {
  double t = 0.0;
  SymMatrix h;
  double dt = 0.0;
  SymMatrix grad;
  double residual = 0.0;       ///< step δ
  double residual_half = 0.0;  ///< step δ/2
  bool kink = false;
  bool pass = false;
};

struct ResidualReport {
  std::vector<ResidualPoint> points;
  double median_abs = 0.0;  ///< over non-kink points
  double q90_abs = 0.0;
  double max_abs = 0.0;
  std::size_t kinks = 0;
  double kink_fraction = 0.0;
  double pass_fraction = 0.0;  ///< passing share of the non-kink points
};

ResidualReport residual_grid(const ValueFunction& f, const InteractionSpec& spec, const GridSpec& grid);

struct ConvergenceRow {
  std::size_t N = 0;
  double free_energy = 0.0;
  double std_error = 0.0;
  double hopf = 0.0;
  double gap = 0.0;  ///< F̄_N − Hopf
};

struct ConvergenceReport {
  double t = 0.0;
  SymMatrix h;
  std::vector<ConvergenceRow> rows;
  /// |gap| never grows by more than 3 combined standard errors between consecutive N.
  bool nonincreasing_3se = false;
  /// Point estimate of |gap| at the last N below that at the first.
  bool last_below_first = false;
  /// |gap(last)| ≤ |gap(first)| + 3 combined standard errors.
  bool last_within_3se = false;
};

ConvergenceReport convergence_report(const InteractionSpec& spec, const DiscretePrior& prior, double t,
                                     const SymMatrix& h, const std::vector<std::size_t>& N_list,
                                     std::size_t n_disorder, std::uint64_t seed, const SolverConfig& cfg = {});

struct OrderedPair {
  double t1 = 0.0;
  SymMatrix h1;
  double t2 = 0.0;
  SymMatrix h2;
};

struct MonotoneReport {
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  std::size_t violations = 0;
  /// Smallest slack over the checked pairs (negative means a violation).
  double worst_margin = 0.0;
  bool passed = false;
};

/// (∂_t, ∇)f(t1,h1) ≤ (∂_t, ∇)f(t2,h2) within 10·δ for each ordered pair.
MonotoneReport monotone_gradient_check(const ValueFunction& f, const std::vector<OrderedPair>& pairs, double delta = 1e-3,
                                       unsigned threads = 1);

}  // namespace hopfcone
