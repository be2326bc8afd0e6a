#pragma once

#include <array>
#include <cstdint>

namespace hopfcone {

/// Philox4x32-10 counter-based generator keyed by (seed, stream).  Every
/// draw is a pure function of (seed, stream, index), so draws can be
/// replayed or split across workers without shared state.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

  std::array<std::uint32_t, 4> block(std::uint64_t counter) const noexcept;

  /// Uniform on (0,1) with 53 random bits; never returns 0 or 1.
  double uniform(std::uint64_t index) const noexcept;
  /// Standard normal via Box–Muller on one Philox block.
  double normal(std::uint64_t index) const noexcept;
  std::uint64_t bits64(std::uint64_t index) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Seed for the `index`-th independent sub-experiment of a run seeded by `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace hopfcone
