#pragma once

#include <cstdint>
#include <string_view>

#include "jcecho/half_integer.h"
#include "jcecho/linalg.h"
#include "jcecho/operators.h"

namespace jcecho {

/// Pure state with unit 2-norm.
class QuantumState {
 public:
  /// Throws std::invalid_argument if |norm - 1| > 1e-12.
  explicit QuantumState(Vector amplitudes);

  /// Rescales to unit norm; throws on a zero vector.
  static QuantumState normalized(Vector amplitudes);

  Index dim() const { return amplitudes_.size(); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex operator[](Index k) const { return amplitudes_[k]; }

  Complex inner(const QuantumState& other) const;  // <this|other>
  Complex expectation(const Operator& op) const;

 private:
  Vector amplitudes_;
};

/// Poisson weight exp(-|a|^2) sum_{n >= nboson} |a|^{2n} / n! discarded by truncation.
double coherent_tail_weight(Complex alpha, int nboson);

/// Oscillator coherent state on |0>..|nboson-1>, renormalized after truncation.
/// Throws std::invalid_argument when the discarded tail weight is >= 1e-10.
QuantumState oscillator_coherent(Complex alpha, int nboson);

/// Spin coherent state (1 + |tau|^2)^-J exp(tau J-) |J,J>, tau = e^{i phi} tan(theta/2),
/// on the m-descending basis. theta = pi gives |J,-J>.
QuantumState su2_coherent(double theta, double phi, HalfInteger j);

/// s1 (x) s2 with amplitude index i * dim(s2) + nu.
QuantumState product_state(const QuantumState& s1, const QuantumState& s2);
QuantumState product_state(const QuantumState& s1, const QuantumState& s2,
                           const ProductSpace& space);

/// Name of the generator behind random_state, recorded in run metadata.
inline constexpr std::string_view kRandomStateAlgorithm = "mt19937_64 + Box-Muller (53-bit uniforms)";

/// Haar-random state: i.i.d. complex standard normals, normalized.
/// Bit-reproducible for a given (dim, seed) on any conforming platform.
QuantumState random_state(Index dim, std::uint64_t seed);

}  // namespace jcecho
