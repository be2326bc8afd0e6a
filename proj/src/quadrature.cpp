#include "hopfcone/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "hopfcone/errors.hpp"

namespace hopfcone {

GaussHermite gauss_hermite(std::size_t n) {
  if (n == 0 || n > 400) throw ValidationError("gauss_hermite: node count must be in [1, 400]");
  // Newton on the orthonormal physicists' recurrence, then z = √2·x, w / √π.
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  std::vector<double> x(n), w(n);
  const std::size_t m = (n + 1) / 2;
  const double nd = static_cast<double>(n);
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(nd, 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * nd) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * (1.0 + std::abs(z))) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
  }
  GaussHermite out;
  out.nodes.resize(n);
  out.weights.resize(n);
  double total = 0.0;
  // Ascending order.
  for (std::size_t i = 0; i < n; ++i) {
    out.nodes[i] = std::numbers::sqrt2 * x[n - 1 - i];
    out.weights[i] = w[n - 1 - i] / std::sqrt(std::numbers::pi);
    total += out.weights[i];
  }
  for (double& v : out.weights) v /= total;
  return out;
}

TensorRule tensor_gauss_hermite(std::size_t dim, std::size_t n_per_axis, double prune) {
  if (dim == 0) throw ValidationError("tensor_gauss_hermite: dim must be positive");
  const auto rule = gauss_hermite(n_per_axis);
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= n_per_axis;
  TensorRule out;
  out.dim = dim;
  double mass = 0.0;
  std::vector<std::size_t> digit(dim);
  for (std::size_t c = 0; c < total; ++c) {
    double w = 1.0;
    for (std::size_t d = dim, r = c; d-- > 0; r /= n_per_axis) {
      digit[d] = r % n_per_axis;
      w *= rule.weights[digit[d]];
    }
    if (w < prune) continue;
    for (std::size_t d = 0; d < dim; ++d) out.nodes.push_back(rule.nodes[digit[d]]);
    out.weights.push_back(w);
    mass += w;
  }
  for (double& v : out.weights) v /= mass;
  return out;
}

}  // namespace hopfcone
