#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "hopfcone/symcone.hpp"

namespace hopfcone {

/// A convex, nondecreasing C¹ function on S^K_+, as consumed by the Hopf solver.
class ConeFunction {
 public:
  virtual ~ConeFunction() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const SymMatrix& h) const = 0;
  /// Frobenius gradient.
  virtual SymMatrix gradient(const SymMatrix& h) const = 0;
  virtual std::pair<double, SymMatrix> value_and_gradient(const SymMatrix& h) const {
    return {value(h), gradient(h)};
  }
  /// M with ∇f(h) ≤ M for every h, when known.  The monotone conjugate is
  /// then finite exactly on {0 ≤ h'' ≤ M}.
  virtual std::optional<SymMatrix> slope_bound() const { return std::nullopt; }
};

/// f(h) = m·h.
class LinearConeFunction final : public ConeFunction {
 public:
  explicit LinearConeFunction(SymMatrix m) : m_(std::move(m)) {}

  std::size_t dim() const override { return m_.dim(); }
  double value(const SymMatrix& h) const override { return frobenius_dot(m_, h); }
  SymMatrix gradient(const SymMatrix&) const override { return m_; }
  std::optional<SymMatrix> slope_bound() const override { return m_; }

 private:
  SymMatrix m_;
};

}  // namespace hopfcone
