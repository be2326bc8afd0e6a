#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hopfcone/rng.hpp"

using namespace hopfcone;

TEST_CASE("counter streams are reproducible and distinct") {
  const CounterRng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    CHECK(a.bits64(i) == b.bits64(i));
    CHECK(a.normal(i) == b.normal(i));
  }
  CHECK(a.bits64(0) != c.bits64(0));
  CHECK(a.bits64(0) != d.bits64(0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}

TEST_CASE("uniform and normal moments") {
  const CounterRng rng(7, 3);
  const std::size_t n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0, sn4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform(i);
    CHECK_UNARY(u > 0.0);
    CHECK_UNARY(u < 1.0);
    su += u;
    const double z = rng.normal(i);
    sn += z;
    sn2 += z * z;
    sn4 += z * z * z * z;
  }
  const double N = static_cast<double>(n);
  CHECK(std::abs(su / N - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / N));
  CHECK(std::abs(sn / N) < 5.0 / std::sqrt(N));
  CHECK(std::abs(sn2 / N - 1.0) < 5.0 * std::sqrt(2.0 / N));
  CHECK(std::abs(sn4 / N - 3.0) < 5.0 * std::sqrt(96.0 / N));
}

TEST_CASE("Philox4x32-10 known answers") {
  const auto zero = CounterRng(0, 0).block(0);
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);
  const std::uint64_t ones = ~std::uint64_t{0};
  const auto full = CounterRng(ones, ones).block(ones);
  CHECK(full[0] == 0x408f276du);
  CHECK(full[1] == 0x41c83b0eu);
  CHECK(full[2] == 0xa20bc7c6u);
  CHECK(full[3] == 0x6d5451fdu);
}
