#include "jcecho/states.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace jcecho {

namespace {

constexpr double kTailTolerance = 1e-10;

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

QuantumState::QuantumState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() == 0) throw std::invalid_argument("empty state vector");
  if (std::abs(amplitudes_.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("state vector is not normalized");
  }
}

QuantumState QuantumState::normalized(Vector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalize state");
  amplitudes /= n;
  return QuantumState(std::move(amplitudes));
}

Complex QuantumState::inner(const QuantumState& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("state dimension mismatch");
  return amplitudes_.dot(other.amplitudes_);
}

Complex QuantumState::expectation(const Operator& op) const {
  if (op.dim() != dim()) throw std::invalid_argument("operator/state dimension mismatch");
  return amplitudes_.dot(op.matrix() * amplitudes_);
}

double coherent_tail_weight(Complex alpha, int nboson) {
  const double mean = std::norm(alpha);
  if (mean == 0.0) return 0.0;
  // Sum the Poisson tail directly; terms decay once n exceeds the mean.
  double tail = 0.0;
  for (int n = nboson;; ++n) {
    const double term = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
    tail += term;
    if (n > mean && term < 1e-18 * std::max(tail, 1e-300)) break;
    if (n > nboson + 100000) break;
  }
  return tail;
}

QuantumState oscillator_coherent(Complex alpha, int nboson) {
  if (nboson < 1) throw std::invalid_argument("boson truncation must be positive");
  const double tail = coherent_tail_weight(alpha, nboson);
  if (tail >= kTailTolerance) {
    std::ostringstream msg;
    msg << "coherent state |alpha|=" << std::abs(alpha) << " loses weight " << tail
        << " beyond " << nboson << " Fock levels; increase the boson truncation";
    throw std::invalid_argument(msg.str());
  }
  Vector c = Vector::Zero(nboson);
  if (alpha == Complex(0.0)) {
    c[0] = 1.0;
    return QuantumState(std::move(c));
  }
  const double log_r = std::log(std::abs(alpha));
  const double arg = std::arg(alpha);
  for (int n = 0; n < nboson; ++n) {
    c[n] = std::polar(std::exp(n * log_r - 0.5 * std::lgamma(n + 1.0)), n * arg);
  }
  return QuantumState::normalized(std::move(c));
}

QuantumState su2_coherent(double theta, double phi, HalfInteger j) {
  if (j.twice() < 1) throw std::invalid_argument("spin must be a positive half-integer");
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::invalid_argument("theta must lie in [0, pi]");
  }
  const int two_j = j.twice();
  Vector c = Vector::Zero(two_j + 1);
  // (1+|tau|^2)^-J tau^k = cos^{2J-k}(theta/2) sin^k(theta/2) e^{i k phi}, finite at theta = pi.
  const double cs = std::cos(0.5 * theta);
  const double sn = std::sin(0.5 * theta);
  for (int k = 0; k <= two_j; ++k) {
    const double mag =
        std::exp(0.5 * log_binomial(two_j, k)) * std::pow(cs, two_j - k) * std::pow(sn, k);
    c[k] = std::polar(mag, k * phi);
  }
  if (theta == std::numbers::pi) {
    c.setZero();
    c[two_j] = 1.0;
  }
  return QuantumState::normalized(std::move(c));
}

QuantumState product_state(const QuantumState& s1, const QuantumState& s2) {
  const Index n1 = s1.dim();
  const Index n2 = s2.dim();
  Vector out(n1 * n2);
  for (Index i = 0; i < n1; ++i) out.segment(i * n2, n2) = s1[i] * s2.amplitudes();
  return QuantumState(std::move(out));
}

QuantumState product_state(const QuantumState& s1, const QuantumState& s2,
                           const ProductSpace& space) {
  if (s1.dim() != space.n1() || s2.dim() != space.n2()) {
    throw std::invalid_argument("product_state: factor dimensions do not match the space");
  }
  return product_state(s1, s2);
}

QuantumState random_state(Index dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("random_state needs dim >= 1");
  std::mt19937_64 engine(seed);
  // Uniform on (0, 1] from the top 53 bits; avoids log(0) in Box-Muller.
  auto uniform = [&engine] { return (static_cast<double>(engine() >> 11) + 1.0) * 0x1.0p-53; };
  Vector c(dim);
  for (Index k = 0; k < dim; ++k) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    c[k] = Complex(r * std::cos(angle), r * std::sin(angle));
  }
  return QuantumState::normalized(std::move(c));
}

}  // namespace jcecho
