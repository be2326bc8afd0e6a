#include "hopfcone/initial_condition.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hopfcone/errors.hpp"
#include "hopfcone/rng.hpp"

namespace hopfcone {

namespace {

TensorRule monte_carlo_rule(std::size_t dim, const MonteCarloMode& mc) {
  if (mc.samples < 2) throw ValidationError("InitialCondition: Monte Carlo mode needs at least 2 samples");
  TensorRule rule;
  rule.dim = dim;
  rule.nodes.resize(mc.samples * dim);
  rule.weights.assign(mc.samples, 1.0 / static_cast<double>(mc.samples));
  const CounterRng rng(mc.seed, 3);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) rule.nodes[i] = rng.normal(i);
  return rule;
}

}  // namespace

InitialCondition::InitialCondition(DiscretePrior prior, EvalMode mode)
    : prior_(std::move(prior)), mode_(mode), second_moment_(prior_.second_moment()) {
  if (const auto* gh = std::get_if<GaussHermiteMode>(&mode_)) {
    if (prior_.dim() > kMaxQuadratureDim)
      throw ValidationError("InitialCondition: quadrature mode supports K <= 3, use Monte Carlo");
    rule_ = tensor_gauss_hermite(prior_.dim(), gh->nodes_per_axis);
  } else {
    rule_ = monte_carlo_rule(prior_.dim(), std::get<MonteCarloMode>(mode_));
  }
}

PsiEstimate InitialCondition::evaluate(const SymMatrix& h) const {
  const std::size_t K = prior_.dim(), A = prior_.size();
  if (h.dim() != K) throw ValidationError("psi: h has the wrong dimension");
  const Matrix hd = h.dense();
  const Matrix root = sqrt_psd(2.0 * h).dense();

  // cross(b, a) = x_b h x_aᵀ
  Matrix cross(A, A);
  std::vector<double> hx(K);
  for (std::size_t a = 0; a < A; ++a) {
    const auto& xa = prior_.atom(a);
    for (std::size_t k = 0; k < K; ++k) {
      hx[k] = 0.0;
      for (std::size_t l = 0; l < K; ++l) hx[k] += hd(k, l) * xa[l];
    }
    for (std::size_t b = 0; b < A; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += prior_.atom(b)[k] * hx[k];
      cross(b, a) = s;
    }
  }

  // exp(u_b + C_ba) is split as exp(u_b − max u)·exp(C_ba − max_b C_ba), so a
  // node costs A exponentials instead of A²; a node whose factored sum
  // underflows is redone term by term.
  std::vector<double> col_max(A, -std::numeric_limits<double>::infinity());
  Matrix factor(A, A);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t b = 0; b < A; ++b) col_max[a] = std::max(col_max[a], 2.0 * cross(b, a));
    for (std::size_t b = 0; b < A; ++b) factor(b, a) = std::exp(2.0 * cross(b, a) - col_max[a]);
  }

  const bool mc = std::holds_alternative<MonteCarloMode>(mode_);
  std::vector<double> s(K), u(A), eu(A), e(A), mean(K), per_sample;
  if (mc) per_sample.reserve(rule_.size());
  double value = 0.0;
  Matrix grad(K, K);
  for (std::size_t n = 0; n < rule_.size(); ++n) {
    const double* z = rule_.node(n);
    for (std::size_t k = 0; k < K; ++k) {
      s[k] = 0.0;
      for (std::size_t l = 0; l < K; ++l) s[k] += root(k, l) * z[l];
    }
    double u_max = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < A; ++b) {
      double v = 0.0;
      for (std::size_t k = 0; k < K; ++k) v += prior_.atom(b)[k] * s[k];
      u[b] = v + prior_.log_weights()[b] - cross(b, b);
      u_max = std::max(u_max, u[b]);
    }
    for (std::size_t b = 0; b < A; ++b) eu[b] = std::exp(u[b] - u_max);
    double sample = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      double total = 0.0, shift = u_max + col_max[a];
      std::fill(mean.begin(), mean.end(), 0.0);
      for (std::size_t b = 0; b < A; ++b) {
        const double p = eu[b] * factor(b, a);
        total += p;
        for (std::size_t k = 0; k < K; ++k) mean[k] += p * prior_.atom(b)[k];
      }
      if (!(total > 1e-200)) {
        shift = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < A; ++b) {
          e[b] = u[b] + 2.0 * cross(b, a);
          shift = std::max(shift, e[b]);
        }
        total = 0.0;
        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t b = 0; b < A; ++b) {
          const double p = std::exp(e[b] - shift);
          total += p;
          for (std::size_t k = 0; k < K; ++k) mean[k] += p * prior_.atom(b)[k];
        }
      }
      const double wa = prior_.weights()[a];
      sample += wa * (shift + std::log(total));
      for (double& m : mean) m /= total;
      const double g = rule_.weights[n] * wa;
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l) grad(k, l) += g * mean[k] * mean[l];
    }
    value += rule_.weights[n] * sample;
    if (mc) per_sample.push_back(sample);
  }

  PsiEstimate out;
  out.value = value;
  out.gradient = SymMatrix::from_dense(grad, std::numeric_limits<double>::infinity());
  if (mc) {
    double ss = 0.0;
    for (double v : per_sample) ss += (v - value) * (v - value);
    const double n = static_cast<double>(per_sample.size());
    out.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

double InitialCondition::psi(const SymMatrix& h) const {
  if (!is_psd(h, kPsdTolerance * (1.0 + h.norm()))) throw ValidationError("psi: h is not PSD");
  return evaluate(h).value;
}

SymMatrix InitialCondition::grad_psi(const SymMatrix& h) const {
  if (!is_psd(h, kPsdTolerance * (1.0 + h.norm()))) throw ValidationError("grad_psi: h is not PSD");
  return evaluate(h).gradient;
}

PsiEstimate InitialCondition::estimate(const SymMatrix& h) const {
  if (h.dim() != prior_.dim()) throw ValidationError("psi: h has the wrong dimension");
  if (is_psd(h, kPsdTolerance * (1.0 + h.norm()))) return evaluate(h);
  const SymMatrix p = psd_project(h);
  auto out = evaluate(p);
  out.projection_distance = (h - p).norm();
  return out;
}

std::pair<double, SymMatrix> InitialCondition::value_and_gradient(const SymMatrix& h) const {
  auto e = estimate(h);
  return {e.value, std::move(e.gradient)};
}

// ------------------------------------------------------------------ 1-D

double golden_section_max(const std::function<double(double)>& g, double a, double b, double tol) {
  constexpr double r = 0.6180339887498949;  // (√5 − 1)/2
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = g(c), gd = g(d);
  while (b - a > tol) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  // Compare the bracket against its endpoints so boundary maxima are exact.
  const double mid = 0.5 * (a + b);
  double best = mid, gbest = g(mid);
  for (double x : {a, b}) {
    const double gx = g(x);
    if (gx > gbest) {
      best = x;
      gbest = gx;
    }
  }
  return best;
}

ScalarConvexFunction layer_function(const DiscretePrior& prior, std::size_t nodes) {
  if (prior.dim() != 1) throw ValidationError("layer_function: prior must be one-dimensional");
  auto ic = std::make_shared<InitialCondition>(prior, GaussHermiteMode{nodes});
  ScalarConvexFunction out;
  out.f = [ic](double x) { return ic->value(SymMatrix(1, {std::max(x, 0.0)})); };
  out.lipschitz = prior.second_moment()(0, 0);
  out.tolerance = 1e-12;
  return out;
}

double conjugate_1d(const ScalarConvexFunction& f, double y, double radius) {
  if (!(y >= 0.0) || !std::isfinite(y)) throw ValidationError("conjugate_1d: y must be finite and nonnegative");
  double R = radius > 0.0 ? radius : 10.0 * (1.0 + f.lipschitz);
  const auto objective = [&](double x) { return x * y - f(x); };
  // At y equal to the tail slope the supremum is only approached as x → ∞,
  // so the radius grows (up to 2^10 times) until the objective flattens.
  for (int doubling = 0;; ++doubling) {
    const bool domain_edge = f.domain_max <= R;
    R = std::min(R, f.domain_max);
    const double x = golden_section_max(objective, 0.0, R, 1e-8 * (1.0 + R));
    if (domain_edge || x < R * (1.0 - 1e-6)) return objective(x);
    const double step = 0.01 * R;
    const double slope = (objective(R) - objective(R - step)) / step;
    if (slope <= std::max(f.tolerance, 1e-8)) return objective(x);
    if (doubling == 10) throw SolverCapError("conjugate_1d: supremum at the search radius, increase it");
    R *= 2.0;
  }
}

ScalarConvexFunction conjugate_function(ScalarConvexFunction f) {
  ScalarConvexFunction out;
  const double slope = f.lipschitz;
  const double radius = 10.0 * (1.0 + f.lipschitz);
  out.f = [g = std::move(f)](double y) { return conjugate_1d(g, y); };
  out.lipschitz = radius;
  out.tolerance = 1e-10;
  out.domain_max = slope;
  return out;
}

}  // namespace hopfcone
