#pragma once

// Exact finite-N free energy
//
//   F_N(t,h) = (1/N) log Σ_x P_N(x) exp(H_N(t,h,x))
//
// by enumeration of every assignment of prior atoms to the N rows, its
// disorder average by Monte Carlo, and the Gibbs brackets that give
// ∂_t F̄_N and ∇F̄_N.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hopfcone/model.hpp"
#include "hopfcone/symcone.hpp"

namespace hopfcone {

inline constexpr std::size_t kMaxConfigurations = std::size_t{1} << 21;

struct StatEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct FreeEnergyEstimate {
  double value = 0.0;  ///< nats per coordinate
  double std_error = 0.0;
  std::size_t n_disorder = 0;
  std::string method = "enumeration-exact-in-x";
  std::uint64_t seed = 0;
  std::size_t N = 0;
  double t = 0.0;
  SymMatrix h;
};

/// Per-disorder Gibbs derivatives; dt and grad average to ∂_t F̄_N and ∇F̄_N.
struct GibbsSummary {
  double dt = 0.0;
  SymMatrix grad;
  double residual = 0.0;  ///< dt − H(grad)
};

struct GibbsAverage {
  StatEstimate dt;
  SymMatrix grad;
  SymMatrix grad_std_error;
};

/// All atom assignments of N rows together with their disorder-free data.
class ConfigurationSpace {
 public:
  ConfigurationSpace(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N);

  std::size_t size() const noexcept { return count_; }
  std::size_t N() const noexcept { return N_; }
  std::size_t K() const noexcept { return prior_.dim(); }
  const DiscretePrior& prior() const noexcept { return prior_; }
  const InteractionSpec& spec() const noexcept { return spec_; }

  /// Writes configuration c into x (N×K).
  void fill(std::size_t c, Matrix& x) const;
  Matrix configuration(std::size_t c) const;
  double log_prior(std::size_t c) const { return log_prior_[c]; }
  /// H(xᵀx)
  double self_energy(std::size_t c) const { return self_energy_[c]; }
  /// xᵀx as a row-major K×K block.
  std::span<const double> self_overlap(std::size_t c) const {
    return {self_overlap_.data() + c * K() * K(), K() * K()};
  }

 private:
  InteractionSpec spec_;
  DiscretePrior prior_;
  std::size_t N_;
  std::size_t count_;
  std::vector<double> log_prior_;
  std::vector<double> self_energy_;
  std::vector<double> self_overlap_;
};

/// One disorder draw with every (t,h)-independent per-configuration term
/// precomputed, so F_N and its brackets at many (t,h) share the enumeration.
class QuenchedSystem {
 public:
  QuenchedSystem(std::shared_ptr<const ConfigurationSpace> space, Disorder disorder);

  const Disorder& disorder() const noexcept { return disorder_; }
  const ConfigurationSpace& space() const noexcept { return *space_; }

  double hamiltonian(std::size_t c, double t, const SymMatrix& h) const;
  /// F_N(t,h) for this draw.
  double log_partition(double t, const SymMatrix& h) const;
  GibbsSummary gibbs(double t, const SymMatrix& h) const;

 private:
  void energies(double t, const SymMatrix& h, std::vector<double>& out) const;

  std::shared_ptr<const ConfigurationSpace> space_;
  Disorder disorder_;
  std::vector<double> signal_;         // H(xᵀX)
  std::vector<double> noise_;          // (x^{⊗p}A)·W
  std::vector<double> truth_overlap_;  // xᵀX, K×K per configuration
  std::vector<double> noise_overlap_;  // xᵀZ, K×K per configuration
};

double log_partition(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                     const SymMatrix& h, const Disorder& d);

GibbsSummary gibbs_derivatives(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                               const SymMatrix& h, const Disorder& d);

/// Calls fn(i, system_i) for the n_disorder draws seeded by derive_seed(seed, i).
void for_each_disorder(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, std::size_t n_disorder,
                       std::uint64_t seed, unsigned threads,
                       const std::function<void(std::size_t, const QuenchedSystem&)>& fn);

FreeEnergyEstimate mean_free_energy(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                                    const SymMatrix& h, std::size_t n_disorder, std::uint64_t seed,
                                    unsigned threads = 1);

GibbsAverage mean_gibbs_derivatives(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                                    const SymMatrix& h, std::size_t n_disorder, std::uint64_t seed,
                                    unsigned threads = 1);

/// E dt − H(E grad), i.e. ∂_t F̄_N − H(∇F̄_N); std_error by the delta method.
StatEstimate hj_residual_N(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                           const SymMatrix& h, std::size_t n_disorder, std::uint64_t seed, unsigned threads = 1);

/// Sample mean and sd/sqrt(n).
StatEstimate mean_and_error(std::span<const double> samples);

}  // namespace hopfcone
