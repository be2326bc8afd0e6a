#include "hopfcone/rng.hpp"

#include <cmath>
#include <numbers>

namespace hopfcone {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  const std::uint64_t m = bits & ((std::uint64_t{1} << 53) - 1);
  return (static_cast<double>(m) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t counter) const noexcept {
  std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return c;
}

double CounterRng::uniform(std::uint64_t index) const noexcept {
  const auto b = block(index);
  return to_unit(b[0], b[1]);
}

double CounterRng::normal(std::uint64_t index) const noexcept {
  const auto b = block(index >> 1);
  const double u1 = to_unit(b[0], b[1]);
  const double u2 = to_unit(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index & 1u) ? r * std::sin(angle) : r * std::cos(angle);
}

std::uint64_t CounterRng::bits64(std::uint64_t index) const noexcept {
  const auto b = block(index);
  return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return CounterRng(seed, 0x5EEDF00Dull).bits64(index);
}

}  // namespace hopfcone
