#pragma once

#include <memory>
#include <span>
#include <vector>

#include "jcecho/evolution.h"
#include "jcecho/linalg.h"
#include "jcecho/operators.h"
#include "jcecho/states.h"

namespace jcecho {

/// |<psi0|psi_echo>|^2.
double fidelity(const QuantumState& psi0, const QuantumState& psi_echo);

/// Hermitian, unit-trace, positive semidefinite matrix on one factor.
class ReducedDensityMatrix {
 public:
  /// Validates Hermiticity, trace and positivity to 1e-12.
  explicit ReducedDensityMatrix(Matrix entries);

  Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }

 private:
  Matrix entries_;
};

/// Traces out the factor not in `keep`.
ReducedDensityMatrix partial_trace(const QuantumState& psi, const ProductSpace& space, Factor keep);

/// tr rho^2.
double purity(const ReducedDensityMatrix& rho);

/// The two factors of a product initial state, with the state they span.
struct ProductInitialState {
  ProductInitialState(QuantumState first, QuantumState second);

  QuantumState first;
  QuantumState second;
  ProductSpace space;
  QuantumState joint;
};

struct CorrelationSeries {
  std::vector<double> times;
  std::vector<double> c;  // <Sigma^2> - <Sigma>^2
  std::vector<double> d;  // off-diagonal correlation sum
};

struct CorrelationPoint {
  double c;
  double d;
};

/// C(t) and D(t) on an arbitrary time grid from one precomputed SigmaAction.
class CorrelationEvaluator {
 public:
  CorrelationEvaluator(std::shared_ptr<const SpectralDecomposition> spec_h, const Operator& v,
                       const ProductInitialState& initial, double hbar);

  CorrelationPoint at(double t) const;
  CorrelationSeries series(std::span<const double> times) const;

 private:
  SigmaAction sigma_;
  ProductInitialState initial_;
};

/// Variance of Sigma(t) in psi0.
double correlation_C(const SpectralDecomposition& spec_h, const Operator& v, const QuantumState& psi0,
                     double t, double hbar);

/// With phi = Sigma(t)|s1 s2>, P1 = |s1><s1| (x) I and P2 = I (x) |s2><s2|:
///   D = <phi|P1|phi> + <phi|P2|phi> - 2 |<s1 s2|Sigma(t)|s1 s2>|^2,
/// which equals the sum of |<i,nu|Sigma|s1 s2>|^2 over the off-diagonal rows (i = s1, nu != s2)
/// and (i != s1, nu = s2) of any product basis containing s1 and s2.
double correlation_D(const SpectralDecomposition& spec_h, const Operator& v,
                     const ProductInitialState& initial, double t, double hbar);

struct LinearResponse {
  std::vector<double> fidelity;  // 1 - delta^2 hbar^-2 C
  std::vector<double> purity;    // 1 - 2 delta^2 hbar^-2 (C - D)
};

/// Second-order predictions; not clamped, so they may go negative at long times.
LinearResponse linear_response_curves(const CorrelationSeries& series, double delta, double hbar);

struct FitWindow {
  double t_min = 10.0;
  double t_max = 50.0;
};

struct DecayFit {
  double sigma = 0.0;   // mean of C / (2t) over the window
  double cbar = 0.0;    // mean of C / t^2 over the window
  double tau_em = 0.0;  // hbar^2 / (2 sigma delta^2)
  double tau_ne = 0.0;  // hbar / (sqrt(cbar) delta)
  FitWindow window;
  std::size_t samples = 0;
};

/// Throws std::invalid_argument when no grid point with t > 0 falls inside the window.
/// Decay times are +inf for delta = 0.
DecayFit fit_decay(const CorrelationSeries& series, FitWindow window, double delta, double hbar);

struct LineFit {
  double slope;
  double intercept;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least squares y = slope * x without intercept.
double fit_proportional(std::span<const double> x, std::span<const double> y);

}  // namespace jcecho
