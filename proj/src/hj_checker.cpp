#include "hopfcone/hj_checker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hopfcone/errors.hpp"
#include "hopfcone/initial_condition.hpp"
#include "hopfcone/parallel.hpp"
#include "hopfcone/rng.hpp"

namespace hopfcone {

namespace {

/// Frobenius-orthonormal basis of S^K.
std::vector<SymMatrix> symmetric_basis(std::size_t K) {
  std::vector<SymMatrix> out;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = a; b < K; ++b) {
      SymMatrix e(K);
      e.set(a, b, a == b ? 1.0 : 1.0 / std::numbers::sqrt2);
      out.push_back(std::move(e));
    }
  return out;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Stencil {
  double dt;
  SymMatrix grad;
  double gap;
};

Stencil stencil(const ValueFunction& f, double t, const SymMatrix& h, double delta, double f0) {
  const std::size_t K = h.dim();
  Stencil s{0.0, SymMatrix(K), 0.0};
  const auto record = [&](double plus, double minus) {
    const double central = (plus - minus) / (2.0 * delta);
    const double forward = (plus - f0) / delta;
    s.gap = std::max(s.gap, std::abs(forward - central));
    return central;
  };
  s.dt = record(f(t + delta, h), f(t - delta, h));
  for (const auto& e : symmetric_basis(K)) {
    const double d = record(f(t, h + delta * e), f(t, h - delta * e));
    s.grad += d * e;
  }
  return s;
}

}  // namespace

SymMatrix GridSpec::direction(std::size_t K) const {
  if (slice == SliceKind::diagonal) return SymMatrix::identity(K);
  const CounterRng rng(seed, 21);
  Matrix g(K, K);
  for (std::size_t i = 0; i < K * K; ++i) g.data()[i] = rng.normal(i);
  SymMatrix b = gram(g) + SymMatrix::identity(K);
  b *= 1.0 / b.norm();
  return b;
}

SymMatrix GridSpec::h_at(std::size_t K, std::size_t j) const {
  const double s = n_h == 1 ? s_min : s_min + (s_max - s_min) * static_cast<double>(j) / static_cast<double>(n_h - 1);
  return s * direction(K);
}

double GridSpec::t_at(std::size_t i) const {
  return n_t == 1 ? t_min : t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(n_t - 1);
}

void GridSpec::validate(std::size_t K) const {
  if (!(delta > 0.0)) throw ValidationError("grid: delta must be positive");
  if (n_t == 0 || n_h == 0) throw ValidationError("grid: n_t and n_h must be positive");
  if (!(t_max >= t_min) || !(s_max >= s_min)) throw ValidationError("grid: ranges must be nondecreasing");
  if (t_min < delta) throw ValidationError("grid: t_min must be at least delta");
  if (!(tolerance > 0.0)) throw ValidationError("grid: tolerance must be positive");
  const SymMatrix lowest = s_min * direction(K) - delta * SymMatrix::identity(K);
  if (!is_psd(lowest, kPsdTolerance)) throw ValidationError("grid: h - delta*I must be PSD at every point (raise s_min)");
}

FiniteDifference finite_difference(const ValueFunction& f, double t, const SymMatrix& h, double delta) {
  const auto s = stencil(f, t, h, delta, f(t, h));
  return {s.dt, s.grad, s.gap};
}

ResidualReport residual_grid(const ValueFunction& f, const InteractionSpec& spec, const GridSpec& grid) {
  const std::size_t K = spec.K();
  grid.validate(K);
  ResidualReport rep;
  rep.points.resize(grid.n_t * grid.n_h);
  parallel_for(rep.points.size(), grid.threads, [&](std::size_t idx) {
    ResidualPoint& p = rep.points[idx];
    p.t = grid.t_at(idx / grid.n_h);
    p.h = grid.h_at(K, idx % grid.n_h);
    const double f0 = f(p.t, p.h);
    const auto full = stencil(f, p.t, p.h, grid.delta, f0);
    const auto half = stencil(f, p.t, p.h, 0.5 * grid.delta, f0);
    p.dt = full.dt;
    p.grad = full.grad;
    p.residual = full.dt - nonlinearity_H(spec, full.grad);
    p.residual_half = half.dt - nonlinearity_H(spec, half.grad);
    p.kink = full.gap > 10.0 * grid.delta;
    p.pass = !p.kink && std::abs(p.residual) <= grid.tolerance;
  });
  std::vector<double> abs_r;
  std::size_t passes = 0;
  for (const auto& p : rep.points) {
    if (p.kink) {
      ++rep.kinks;
      continue;
    }
    if (!std::isfinite(p.residual)) throw SolverCapError("residual_grid: non-finite residual");
    abs_r.push_back(std::abs(p.residual));
    passes += p.pass ? 1 : 0;
  }
  rep.kink_fraction = static_cast<double>(rep.kinks) / static_cast<double>(rep.points.size());
  rep.pass_fraction = abs_r.empty() ? 0.0 : static_cast<double>(passes) / static_cast<double>(abs_r.size());
  rep.median_abs = quantile(abs_r, 0.5);
  rep.q90_abs = quantile(abs_r, 0.9);
  rep.max_abs = abs_r.empty() ? 0.0 : *std::max_element(abs_r.begin(), abs_r.end());
  return rep;
}

ConvergenceReport convergence_report(const InteractionSpec& spec, const DiscretePrior& prior, double t,
                                     const SymMatrix& h, const std::vector<std::size_t>& N_list,
                                     std::size_t n_disorder, std::uint64_t seed, const SolverConfig& cfg) {
  if (N_list.empty()) throw ValidationError("convergence_report: N list is empty");
  // Fail on an infeasible N before any compute.
  for (std::size_t N : N_list) checked_power(prior.size(), N, kMaxConfigurations);
  const EvalMode mode = prior.dim() <= InitialCondition::kMaxQuadratureDim ? EvalMode{GaussHermiteMode{}}
                                                                           : EvalMode{MonteCarloMode{100000, seed}};
  const InitialCondition psi(prior, mode);
  const double hopf = hopf_value(psi, spec, t, h, cfg).value;

  ConvergenceReport rep;
  rep.t = t;
  rep.h = h;
  for (std::size_t N : N_list) {
    const auto est = mean_free_energy(spec, prior, N, t, h, n_disorder, seed, cfg.threads);
    rep.rows.push_back({N, est.value, est.std_error, hopf, est.value - hopf});
  }
  const auto allowance = [](const ConvergenceRow& a, const ConvergenceRow& b) {
    return 3.0 * std::hypot(a.std_error, b.std_error);
  };
  rep.nonincreasing_3se = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto &a = rep.rows[i - 1], &b = rep.rows[i];
    if (std::abs(b.gap) > std::abs(a.gap) + allowance(a, b)) rep.nonincreasing_3se = false;
  }
  const auto &first = rep.rows.front(), &last = rep.rows.back();
  rep.last_below_first = std::abs(last.gap) < std::abs(first.gap);
  rep.last_within_3se = std::abs(last.gap) <= std::abs(first.gap) + allowance(first, last);
  return rep;
}

MonotoneReport monotone_gradient_check(const ValueFunction& f, const std::vector<OrderedPair>& pairs, double delta,
                                       unsigned threads) {
  if (!(delta > 0.0)) throw ValidationError("monotone_gradient_check: delta must be positive");
  for (const auto& p : pairs) {
    if (p.t1 > p.t2 || !loewner_leq(p.h1, p.h2, kPsdTolerance))
      throw ValidationError("monotone_gradient_check: pair is not ordered");
  }
  const double tol = 10.0 * delta;
  std::vector<double> margin(pairs.size());
  std::vector<char> skipped(pairs.size(), 0);
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const auto& p = pairs[i];
    const auto a = finite_difference(f, p.t1, p.h1, delta);
    const auto b = finite_difference(f, p.t2, p.h2, delta);
    if (a.one_sided_gap > tol || b.one_sided_gap > tol) {
      skipped[i] = 1;
      return;
    }
    margin[i] = std::min(b.dt - a.dt, min_eigenvalue(b.grad - a.grad)) + tol;
  });
  MonotoneReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (skipped[i]) {
      ++rep.skipped_kinks;
      continue;
    }
    ++rep.checked;
    rep.worst_margin = std::min(rep.worst_margin, margin[i]);
    if (margin[i] < 0.0) ++rep.violations;
  }
  if (rep.checked == 0) rep.worst_margin = 0.0;
  rep.passed = rep.violations == 0;
  return rep;
}

}  // namespace hopfcone
