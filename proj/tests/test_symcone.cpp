#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "hopfcone/errors.hpp"
#include "hopfcone/rng.hpp"
#include "hopfcone/symcone.hpp"

using namespace hopfcone;

namespace {

SymMatrix random_sym(std::size_t K, std::uint64_t seed) {
  const CounterRng rng(seed, 0);
  SymMatrix m(K);
  std::size_t i = 0;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = a; b < K; ++b) m.set(a, b, rng.normal(i++));
  return m;
}

SymMatrix random_psd(std::size_t K, std::uint64_t seed) {
  const CounterRng rng(seed, 1);
  Matrix g(K, K);
  for (std::size_t i = 0; i < K * K; ++i) g.data()[i] = rng.normal(i);
  return gram(g);
}

}  // namespace

TEST_CASE("packed storage and arithmetic") {
  SymMatrix m(2, {1.0, 2.0, 3.0});
  CHECK(m(0, 1) == 2.0);
  CHECK(m(1, 0) == 2.0);
  CHECK(m.trace() == 4.0);
  CHECK(m.norm() == doctest::Approx(std::sqrt(1.0 + 8.0 + 9.0)));
  const SymMatrix twice = m + m;
  CHECK(twice(1, 1) == 6.0);
  CHECK((twice - m) == m);
  CHECK(frobenius_dot(m, SymMatrix::identity(2)) == 4.0);
  CHECK_THROWS_AS(SymMatrix(2, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(SymMatrix(1, {std::numeric_limits<double>::quiet_NaN()}), ValidationError);
  CHECK_THROWS_AS(SymMatrix::from_dense(Matrix(2, 2, {1, 2, 3, 4})), ValidationError);
}

TEST_CASE("Jacobi eigendecomposition reconstructs random matrices") {
  for (std::size_t K : {1u, 2u, 3u, 5u}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const SymMatrix m = random_sym(K, 100 * K + s);
      const auto e = eig_sym(m);
      CHECK((e.reconstruct() - m).norm() <= 1e-12 * (1.0 + m.norm()));
      for (std::size_t i = 1; i < K; ++i) CHECK(e.values[i - 1] <= e.values[i]);
      // Orthonormal columns.
      const Matrix vtv = e.vectors.transposed() * e.vectors;
      CHECK((SymMatrix::from_dense(vtv, 1e-12) - SymMatrix::identity(K)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("known spectrum") {
  const auto e = eig_sym(SymMatrix(2, {2.0, 1.0, 2.0}));
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("square root, projection and the Loewner order") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SymMatrix p = random_psd(3, s);
    const SymMatrix r = sqrt_psd(p);
    CHECK((SymMatrix::from_dense(r.dense() * r.dense(), 1e-10) - p).norm() <= 1e-10 * (1.0 + p.norm()));
    CHECK(is_psd(r, 1e-12));
    CHECK((psd_project(p) - p).norm() <= 1e-12 * (1.0 + p.norm()));
    const SymMatrix m = random_sym(3, 50 + s);
    const SymMatrix q = psd_project(m);
    CHECK(is_psd(q, 1e-12));
    // The residual m - q is negative semidefinite and orthogonal to q.
    CHECK(is_psd(q - m, 1e-10));
    CHECK(std::abs(frobenius_dot(q, m - q)) <= 1e-10);
    CHECK(loewner_leq(p, p + q, 1e-12));
  }
  CHECK_THROWS_AS(sqrt_psd(SymMatrix(1, {-1.0})), ValidationError);
  CHECK_FALSE(loewner_leq(SymMatrix::identity(2), SymMatrix(2, {2.0, 0.0, 0.5}), 1e-12));
}

TEST_CASE("condition number") {
  CHECK(condition_number(SymMatrix::identity(2)) == doctest::Approx(2.0));
  CHECK(std::isinf(condition_number(SymMatrix(2, {1.0, 0.0, 0.0}))));
}

TEST_CASE("gram matrices") {
  const Matrix x(3, 2, {1, 2, 3, 4, 5, 6});
  const SymMatrix g = gram(x);
  CHECK(g(0, 0) == 35.0);
  CHECK(g(0, 1) == 44.0);
  CHECK(g(1, 1) == 56.0);
  const Matrix c = cross_gram(x, Matrix(3, 1, {1, 0, -1}));
  CHECK(c(0, 0) == -4.0);
  CHECK(c(1, 0) == -4.0);
}
