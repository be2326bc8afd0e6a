#include "hopfcone/hopf_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>

#include "hopfcone/errors.hpp"
#include "hopfcone/parallel.hpp"
#include "hopfcone/rng.hpp"

namespace hopfcone {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

SymMatrix project(const SymMatrix& y, Geometry geometry) {
  if (geometry == Geometry::cone) return psd_project(y);
  std::vector<double> d = y.diagonal_entries();
  for (double& v : d) v = std::max(v, 0.0);
  return SymMatrix::diagonal(d);
}

SymMatrix project_ball(SymMatrix y, Geometry geometry, double radius) {
  y = project(y, geometry);
  const double n = y.norm();
  if (n > radius) y *= radius / n;
  return y;
}

SymMatrix diagonal_part(const SymMatrix& y) { return SymMatrix::diagonal(y.diagonal_entries()); }

struct InnerProblem {
  const ConeFunction& psi;
  const SymMatrix& h_outer;
  const SolverConfig& cfg;
  Geometry geometry;
  double radius;
};

InnerResult minimize_from(const InnerProblem& pr, const SymMatrix& start) {
  const auto& cfg = pr.cfg;
  const double blowup = 1e6 * (1.0 + pr.radius);
  InnerResult out;
  SymMatrix x = project(start, pr.geometry);
  auto [fx, gx] = pr.psi.value_and_gradient(x);
  double f = fx - frobenius_dot(pr.h_outer, x);
  SymMatrix G = gx - pr.h_outer;
  double alpha = 1.0;
  // Nonmonotone acceptance against the largest of the last kMemory values.
  constexpr std::size_t kMemory = 10;
  std::deque<double> recent{f};
  for (;;) {
    if ((x - project(x - G, pr.geometry)).norm() <= cfg.inner_tolerance) break;
    if (out.iterations >= cfg.inner_max_iterations)
      throw SolverCapError("inner_inf: iteration cap reached without meeting the tolerance");
    ++out.iterations;
    const double reference = *std::max_element(recent.begin(), recent.end());
    bool accepted = false;
    SymMatrix xn, Gn;
    double fn = 0.0;
    while (alpha > 1e-30) {
      xn = project(x - alpha * G, pr.geometry);
      const SymMatrix d = xn - x;
      if (d.norm() <= 1e-15 * (1.0 + x.norm())) break;
      auto [fv, gv] = pr.psi.value_and_gradient(xn);
      fn = fv - frobenius_dot(pr.h_outer, xn);
      if (fn <= reference + cfg.sufficient_decrease * frobenius_dot(G, d)) {
        Gn = gv - pr.h_outer;
        accepted = true;
        break;
      }
      alpha *= cfg.shrink;
    }
    if (!accepted) break;  // stalled at the resolution of ψ's evaluation
    const SymMatrix s = xn - x;
    const double sy = frobenius_dot(s, Gn - G);
    alpha = sy > 0.0 ? frobenius_dot(s, s) / sy : 2.0 * alpha;
    alpha = std::clamp(alpha, 1e-12, 1e12);
    x = std::move(xn);
    G = std::move(Gn);
    f = fn;
    recent.push_back(f);
    if (recent.size() > kMemory) recent.pop_front();
    if (x.norm() > blowup) {
      out.unbounded = true;
      out.value = kNegInf;
      out.argmin = x;
      return out;
    }
  }
  out.value = f;
  out.argmin = std::move(x);
  return out;
}

InnerResult minimize_inner(const InnerProblem& pr, std::span<const SymMatrix> starts) {
  InnerResult best;
  bool have = false;
  std::size_t iterations = 0;
  for (const auto& s : starts) {
    auto r = minimize_from(pr, s);
    iterations += r.iterations;
    if (r.unbounded) {
      r.iterations = iterations;
      return r;
    }
    if (!have || r.value < best.value) {
      best = std::move(r);
      have = true;
    }
  }
  best.iterations = iterations;
  return best;
}

// ---------------------------------------------------------------- outer

struct OuterProblem {
  const ConeFunction& psi;
  const InteractionSpec& spec;
  double t;
  SymMatrix h;
  const SolverConfig& cfg;
  Geometry geometry;
  double radius;
  std::optional<SymMatrix> slope;
};

struct OuterPoint {
  double value = kNegInf;
  SymMatrix y;
  SymMatrix inner;
  SymMatrix grad;
  std::size_t inner_iterations = 0;
};

bool feasible(const OuterProblem& pr, const SymMatrix& y) {
  if (!pr.slope) return true;
  if (pr.geometry == Geometry::orthant) {
    const auto d = y.diagonal_entries();
    for (std::size_t k = 0; k < d.size(); ++k)
      if (d[k] > (*pr.slope)(k, k) + 1e-14) return false;
    return true;
  }
  return loewner_leq(y, *pr.slope, 1e-14);
}

OuterPoint evaluate_outer(const OuterProblem& pr, const SymMatrix& y, const SymMatrix* warm, bool screening = false) {
  OuterPoint p;
  p.y = y;
  if (!feasible(pr, y)) return p;
  SolverConfig cfg = pr.cfg;
  if (screening) cfg.inner_tolerance = std::max(cfg.inner_tolerance, cfg.screen_tolerance);
  const InnerProblem ip{pr.psi, y, cfg, pr.geometry, pr.radius};
  InnerResult inner;
  if (warm) {
    inner = minimize_inner(ip, std::span<const SymMatrix>(warm, 1));
  } else if (screening) {
    inner = minimize_inner(ip, std::span<const SymMatrix>(&y, 1));
  } else {
    const SymMatrix starts[] = {SymMatrix(y.dim()), y};
    inner = minimize_inner(ip, starts);
  }
  p.inner_iterations = inner.iterations;
  if (inner.unbounded) return p;
  p.value = frobenius_dot(y, pr.h) + pr.t * nonlinearity_H(pr.spec, y) + inner.value;
  p.inner = std::move(inner.argmin);
  SymMatrix dH = grad_H(pr.spec, y);
  if (pr.geometry == Geometry::orthant) dH = diagonal_part(dH);
  p.grad = pr.h + pr.t * dH - p.inner;
  return p;
}

bool better(const OuterPoint& a, const OuterPoint& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.y.norm() < b.y.norm();
}

// Spectral projected gradient with a nonmonotone acceptance test: a step is
// taken when it beats the lowest of the last kMemory values by the Armijo
// margin.  The best point seen is returned; the ascent also stops once
// kMemory steps in a row fail to raise the best value by a relative 1e-13.
OuterPoint ascend(const OuterProblem& pr, OuterPoint cur) {
  constexpr std::size_t kMemory = 10;
  const auto& cfg = pr.cfg;
  double alpha = 1.0;
  std::size_t total_inner = cur.inner_iterations;
  std::deque<double> recent{cur.value};
  OuterPoint best = cur;
  std::size_t stalled = 0;
  for (std::size_t it = 0;; ++it) {
    if ((cur.y - project_ball(cur.y + cur.grad, pr.geometry, pr.radius)).norm() <= cfg.outer_tolerance) break;
    if (it >= cfg.outer_max_iterations) throw SolverCapError("hopf: outer iteration cap reached");
    const double reference = *std::min_element(recent.begin(), recent.end());
    bool accepted = false;
    OuterPoint next;
    while (alpha > 1e-20) {
      const SymMatrix yn = project_ball(cur.y + alpha * cur.grad, pr.geometry, pr.radius);
      const SymMatrix d = yn - cur.y;
      if (d.norm() <= 1e-15 * (1.0 + cur.y.norm())) break;
      next = evaluate_outer(pr, yn, &cur.inner);
      total_inner += next.inner_iterations;
      if (next.value >= reference + cfg.sufficient_decrease * frobenius_dot(cur.grad, d)) {
        accepted = true;
        break;
      }
      alpha *= cfg.shrink;
    }
    if (!accepted) break;
    const SymMatrix s = next.y - cur.y;
    const double sq = frobenius_dot(s, next.grad - cur.grad);
    alpha = sq < 0.0 ? -frobenius_dot(s, s) / sq : 2.0 * alpha;
    alpha = std::clamp(alpha, 1e-12, 1e12);
    cur = std::move(next);
    recent.push_back(cur.value);
    if (recent.size() > kMemory) recent.pop_front();
    stalled = cur.value > best.value + 1e-13 * (1.0 + std::abs(best.value)) ? 0 : stalled + 1;
    if (better(cur, best)) best = cur;
    if (stalled >= kMemory) break;
  }
  best.inner_iterations = total_inner;
  return best;
}

/// Orthogonal K×K matrices: planar rotations for K = 2, seeded random bases otherwise.
std::vector<Matrix> rotation_set(std::size_t K, std::size_t count) {
  std::vector<Matrix> out;
  if (K == 1) {
    out.push_back(Matrix::identity(1));
    return out;
  }
  for (std::size_t r = 0; r < std::max<std::size_t>(count, 1); ++r) {
    if (K == 2) {
      const double th = std::numbers::pi * static_cast<double>(r) / static_cast<double>(std::max<std::size_t>(count, 1));
      out.push_back(Matrix(2, 2, {std::cos(th), -std::sin(th), std::sin(th), std::cos(th)}));
    } else if (r == 0) {
      out.push_back(Matrix::identity(K));
    } else {
      const CounterRng rng(0xC0FFEE, r);
      SymMatrix g(K);
      std::size_t idx = 0;
      for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i; j < K; ++j) g.set(i, j, rng.normal(idx++));
      out.push_back(eig_sym(g).vectors);
    }
  }
  return out;
}

std::vector<SymMatrix> outer_grid(const OuterProblem& pr) {
  const std::size_t K = pr.h.dim(), res = std::max<std::size_t>(pr.cfg.grid_resolution, 1);
  std::vector<SymMatrix> out;
  if (pr.geometry == Geometry::orthant) {
    std::vector<double> top(K, pr.radius);
    if (pr.slope)
      for (std::size_t k = 0; k < K; ++k) top[k] = std::min(pr.radius, (*pr.slope)(k, k));
    std::size_t total = 1;
    for (std::size_t k = 0; k < K; ++k) total *= res;
    std::vector<double> d(K);
    for (std::size_t c = 0; c < total; ++c) {
      for (std::size_t k = K, r = c; k-- > 0; r /= res)
        d[k] = top[k] * static_cast<double>(r % res) / static_cast<double>(res);
      out.push_back(SymMatrix::diagonal(d));
    }
  } else {
    double top = pr.radius;
    if (pr.slope) top = std::min(top, std::max(max_eigenvalue(*pr.slope), 0.0));
    // Nondecreasing eigenvalue tuples, each rotated by every basis.
    std::vector<std::size_t> idx(K, 0);
    const auto bases = rotation_set(K, pr.cfg.rotations);
    for (;;) {
      Matrix lam(K, K);
      for (std::size_t k = 0; k < K; ++k) lam(k, k) = top * static_cast<double>(idx[k]) / static_cast<double>(res);
      const bool scalar = std::all_of(idx.begin(), idx.end(), [&](std::size_t v) { return v == idx[0]; });
      for (std::size_t b = 0; b < (scalar ? 1 : bases.size()); ++b) {
        const Matrix& Q = bases[b];
        out.push_back(SymMatrix::from_dense(Q * lam * Q.transposed(), std::numeric_limits<double>::infinity()));
      }
      std::size_t k = K;
      while (k-- > 0) {
        if (idx[k] + 1 < res) {
          ++idx[k];
          for (std::size_t j = k + 1; j < K; ++j) idx[j] = idx[k];
          break;
        }
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
  }
  if (pr.slope) {
    SymMatrix m = pr.geometry == Geometry::orthant ? diagonal_part(*pr.slope) : *pr.slope;
    if (m.norm() <= pr.radius) out.push_back(project(m, pr.geometry));
  }
  return out;
}

HopfResult solve(const OuterProblem& pr) {
  const auto grid = outer_grid(pr);
  std::vector<OuterPoint> coarse(grid.size());
  parallel_for(grid.size(), pr.cfg.threads, [&](std::size_t i) { coarse[i] = evaluate_outer(pr, grid[i], nullptr, true); });
  std::size_t coarse_inner = 0;
  for (const auto& p : coarse) coarse_inner += p.inner_iterations;

  std::vector<std::size_t> order(coarse.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return better(coarse[a], coarse[b]); });

  std::vector<OuterPoint> starts;
  bool has_zero = false;
  for (std::size_t i : order) {
    if (starts.size() >= pr.cfg.multistarts || !std::isfinite(coarse[i].value)) break;
    has_zero = has_zero || coarse[i].y.norm() == 0.0;
    starts.push_back(evaluate_outer(pr, coarse[i].y, nullptr));
  }
  if (!has_zero) starts.push_back(evaluate_outer(pr, SymMatrix(pr.h.dim()), nullptr));
  if (!std::isfinite(starts.back().value)) starts.pop_back();
  if (starts.empty()) throw SolverCapError("hopf: no feasible outer start");

  std::vector<OuterPoint> refined(starts.size());
  parallel_for(starts.size(), pr.cfg.threads, [&](std::size_t i) { refined[i] = ascend(pr, starts[i]); });
  std::stable_sort(refined.begin(), refined.end(), better);

  HopfResult out;
  const auto& best = refined.front();
  out.h_outer = best.y;
  out.h_inner = best.inner;
  out.outer_starts = refined.size();
  out.inner_iterations = coarse_inner;
  for (const auto& r : refined) out.inner_iterations += r.inner_iterations;
  out.gap_estimate = refined.size() > 1 ? best.value - refined[1].value : 0.0;
  out.value = frobenius_dot(out.h_outer, pr.h - out.h_inner) + pr.psi.value(out.h_inner) +
              pr.t * nonlinearity_H(pr.spec, out.h_outer);
  return out;
}

void check_common(const ConeFunction& psi, const InteractionSpec& spec, double t, const SymMatrix& h,
                  const SolverConfig& cfg) {
  cfg.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("hopf: t must be finite and nonnegative");
  if (psi.dim() != spec.K() || h.dim() != spec.K()) throw ValidationError("hopf: dimension mismatch between psi, spec and h");
  if (!is_psd(h, kPsdTolerance * (1.0 + h.norm()))) throw ValidationError("hopf: h is not PSD");
}

}  // namespace

double SolverConfig::radius(std::size_t K) const {
  return outer_radius > 0.0 ? outer_radius : 2.0 * std::pow(static_cast<double>(K), 1.5);
}

void SolverConfig::validate() const {
  if (outer_radius < 0.0 || !std::isfinite(outer_radius)) throw ValidationError("solver: outer_radius must be >= 0");
  if (grid_resolution == 0) throw ValidationError("solver: grid_resolution must be positive");
  if (multistarts == 0) throw ValidationError("solver: multistarts must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ValidationError("solver: shrink must lie in (0,1)");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0))
    throw ValidationError("solver: sufficient_decrease must lie in (0,1)");
  if (!(inner_tolerance > 0.0)) throw ValidationError("solver: inner_tolerance must be positive");
  if (!(outer_tolerance > 0.0)) throw ValidationError("solver: outer_tolerance must be positive");
  if (!(screen_tolerance > 0.0)) throw ValidationError("solver: screen_tolerance must be positive");
  if (layered_grid < 2) throw ValidationError("solver: layered_grid must be at least 2");
}

InnerResult inner_inf(const ConeFunction& psi, const SymMatrix& h_outer, const SolverConfig& cfg, Geometry geometry) {
  cfg.validate();
  if (h_outer.dim() != psi.dim()) throw ValidationError("inner_inf: dimension mismatch");
  if (!is_psd(h_outer, kPsdTolerance * (1.0 + h_outer.norm()))) throw ValidationError("inner_inf: h'' is not PSD");
  const InnerProblem ip{psi, h_outer, cfg, geometry, cfg.radius(psi.dim())};
  const SymMatrix starts[] = {SymMatrix(psi.dim()), h_outer};
  return minimize_inner(ip, starts);
}

HopfResult hopf_value(const ConeFunction& psi, const InteractionSpec& spec, double t, const SymMatrix& h,
                      const SolverConfig& cfg) {
  check_common(psi, spec, t, h, cfg);
  const OuterProblem pr{psi, spec, t, h, cfg, Geometry::cone, cfg.radius(spec.K()), psi.slope_bound()};
  return solve(pr);
}

bool depends_only_on_diagonal(const InteractionSpec& spec, std::size_t samples, std::uint64_t seed) {
  const std::size_t K = spec.K();
  const CounterRng rng(seed, 11);
  std::size_t idx = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    Matrix g(K, K);
    for (std::size_t i = 0; i < K * K; ++i) g.data()[i] = rng.normal(idx++);
    const SymMatrix q = gram(g);
    const double full = nonlinearity_H(spec, q), diag = nonlinearity_H(spec, diagonal_part(q));
    if (std::abs(full - diag) > 1e-10 * (1.0 + std::abs(full))) return false;
  }
  return true;
}

HopfResult hopf_diagonal(const ConeFunction& psi, const InteractionSpec& spec, double t, std::span<const double> x,
                         const SolverConfig& cfg) {
  for (double v : x)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("hopf_diagonal: x must be finite and nonnegative");
  const SymMatrix h = SymMatrix::diagonal(x);
  check_common(psi, spec, t, h, cfg);
  if (!depends_only_on_diagonal(spec))
    throw ValidationError("hopf_diagonal: H depends on off-diagonal entries of its argument");
  const OuterProblem pr{psi, spec, t, h, cfg, Geometry::orthant, cfg.radius(spec.K()), psi.slope_bound()};
  return solve(pr);
}

double layered_reduced(double t, const std::vector<ScalarConvexFunction>& layers, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t K = layers.size();
  if (K < 2) throw ValidationError("layered_reduced: needs at least two layers");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("layered_reduced: t must be finite and nonnegative");
  const double R = cfg.radius(K);

  // Layers 1, 3, 5, … (indices 0, 2, 4, …) carry the dual variables.
  std::vector<std::size_t> odd;
  for (std::size_t k = 0; k < K; k += 2) odd.push_back(k);
  const std::size_t D = odd.size();
  std::vector<double> top(D);
  for (std::size_t i = 0; i < D; ++i) top[i] = std::min(R, layers[odd[i]].lipschitz);

  const auto objective = [&](std::span<const double> y) {
    double v = 0.0;
    for (std::size_t i = 0; i < D; ++i) v -= conjugate_1d(layers[odd[i]], y[i]);
    for (std::size_t k = 1; k < K; k += 2) {
      const double left = y[(k - 1) / 2];
      const double right = k + 1 < K ? y[(k + 1) / 2] : 0.0;
      v += layers[k](t * (left + right));
    }
    return v;
  };

  const std::size_t res = cfg.layered_grid;
  std::size_t total = 1;
  for (std::size_t i = 0; i < D; ++i) total *= res;
  std::vector<std::vector<double>> points(total, std::vector<double>(D));
  std::vector<double> values(total);
  parallel_for(total, cfg.threads, [&](std::size_t c) {
    for (std::size_t i = D, r = c; i-- > 0; r /= res)
      points[c][i] = top[i] * static_cast<double>(r % res) / static_cast<double>(res - 1);
    values[c] = objective(points[c]);
  });
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  // Compass search from the best grid points.
  const std::size_t n_starts = std::min(cfg.multistarts, total);
  std::vector<double> refined(n_starts);
  parallel_for(n_starts, cfg.threads, [&](std::size_t s) {
    std::vector<double> y = points[order[s]];
    double best = values[order[s]];
    double step = 1.0 / static_cast<double>(res - 1);
    std::vector<double> trial(D);
    while (step > 1e-10) {
      bool moved = false;
      for (std::size_t i = 0; i < D && !moved; ++i)
        for (double sign : {1.0, -1.0}) {
          trial = y;
          trial[i] = std::clamp(y[i] + sign * step * top[i], 0.0, top[i]);
          if (trial[i] == y[i]) continue;
          const double v = objective(trial);
          if (v > best) {
            best = v;
            y = trial;
            moved = true;
            break;
          }
        }
      if (!moved) step *= 0.5;
    }
    refined[s] = best;
  });
  return *std::max_element(refined.begin(), refined.end());
}

double hopf_lax_1d(const std::function<double(double)>& g, double lipschitz, double t, double x) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("hopf_lax_1d: t must be positive");
  if (!std::isfinite(x)) throw ValidationError("hopf_lax_1d: x must be finite");
  if (!(lipschitz >= 0.0)) throw ValidationError("hopf_lax_1d: Lipschitz bound must be nonnegative");
  const auto objective = [&](double y) { return g(y) + (y - x) * (y - x) / (4.0 * t); };
  const double half = 2.0 * t * lipschitz + 1.0;
  const double y = golden_section_max([&](double v) { return -objective(v); }, x - half, x + half, 1e-10);
  return objective(y);
}

}  // namespace hopfcone
