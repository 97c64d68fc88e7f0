#include "jcecho/observables.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace jcecho {

double fidelity(const QuantumState& psi0, const QuantumState& psi_echo) {
  return std::norm(psi0.inner(psi_echo));
}

ReducedDensityMatrix::ReducedDensityMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (!jcecho::is_hermitian(entries_, 1e-12)) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(entries_.trace() - Complex(1.0)) > 1e-12) {
    throw std::invalid_argument("density matrix trace differs from 1");
  }
  const Matrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument("density matrix has a negative eigenvalue");
  }
}

namespace {

// Row-major view psi[i * n2 + nu] -> M(i, nu).
Matrix coefficient_matrix(const Vector& psi, const ProductSpace& space) {
  Matrix m(space.n1(), space.n2());
  for (int i = 0; i < space.n1(); ++i) m.row(i) = psi.segment(i * space.n2(), space.n2()).transpose();
  return m;
}

}  // namespace

ReducedDensityMatrix partial_trace(const QuantumState& psi, const ProductSpace& space, Factor keep) {
  if (psi.dim() != space.dim()) throw std::invalid_argument("partial_trace: dimension mismatch");
  const Matrix m = coefficient_matrix(psi.amplitudes(), space);
  Matrix rho = keep == Factor::First ? Matrix(m * m.adjoint()) : Matrix((m.transpose() * m.conjugate()));
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return ReducedDensityMatrix(std::move(rho));
}

double purity(const ReducedDensityMatrix& rho) { return rho.matrix().squaredNorm(); }

ProductInitialState::ProductInitialState(QuantumState first_, QuantumState second_)
    : first(std::move(first_)),
      second(std::move(second_)),
      space(static_cast<int>(first.dim()), static_cast<int>(second.dim())),
      joint(product_state(first, second)) {}

CorrelationEvaluator::CorrelationEvaluator(std::shared_ptr<const SpectralDecomposition> spec_h,
                                           const Operator& v, const ProductInitialState& initial,
                                           double hbar)
    : sigma_(std::move(spec_h), v, initial.joint, hbar), initial_(initial) {}

namespace {

CorrelationPoint correlations_from(const Vector& phi, const ProductInitialState& init) {
  const Complex mean = init.joint.amplitudes().dot(phi);
  const double mean2 = std::norm(mean);
  const double c = phi.squaredNorm() - mean2;
  // (<s1| (x) I) phi and (I (x) <s2|) phi.
  const Matrix m = coefficient_matrix(phi, init.space);
  const double p1 = (init.first.amplitudes().adjoint() * m).squaredNorm();
  const double p2 = (m * init.second.amplitudes().conjugate()).squaredNorm();
  return {c, p1 + p2 - 2.0 * mean2};
}

}  // namespace

CorrelationPoint CorrelationEvaluator::at(double t) const {
  return correlations_from(sigma_.apply(t), initial_);
}

CorrelationSeries CorrelationEvaluator::series(std::span<const double> times) const {
  CorrelationSeries out;
  out.times.assign(times.begin(), times.end());
  out.c.reserve(times.size());
  out.d.reserve(times.size());
  for (double t : times) {
    const auto p = at(t);
    out.c.push_back(p.c);
    out.d.push_back(p.d);
  }
  return out;
}

double correlation_C(const SpectralDecomposition& spec_h, const Operator& v, const QuantumState& psi0,
                     double t, double hbar) {
  const Operator s = sigma_operator(spec_h, v, t, hbar);
  const Vector phi = s.matrix() * psi0.amplitudes();
  return phi.squaredNorm() - std::norm(psi0.amplitudes().dot(phi));
}

double correlation_D(const SpectralDecomposition& spec_h, const Operator& v,
                     const ProductInitialState& initial, double t, double hbar) {
  if (initial.joint.dim() != spec_h.dim()) {
    throw std::invalid_argument("correlation_D: initial factors do not match the operator");
  }
  const Operator s = sigma_operator(spec_h, v, t, hbar);
  return correlations_from(s.matrix() * initial.joint.amplitudes(), initial).d;
}

LinearResponse linear_response_curves(const CorrelationSeries& series, double delta, double hbar) {
  if (series.c.size() != series.times.size() || series.d.size() != series.times.size()) {
    throw std::invalid_argument("correlation series columns differ in length");
  }
  const double k = delta * delta / (hbar * hbar);
  LinearResponse out;
  out.fidelity.reserve(series.c.size());
  out.purity.reserve(series.c.size());
  for (std::size_t i = 0; i < series.c.size(); ++i) {
    out.fidelity.push_back(1.0 - k * series.c[i]);
    out.purity.push_back(1.0 - 2.0 * k * (series.c[i] - series.d[i]));
  }
  return out;
}

DecayFit fit_decay(const CorrelationSeries& series, FitWindow window, double delta, double hbar) {
  DecayFit fit;
  fit.window = window;
  double sum_sigma = 0.0;
  double sum_cbar = 0.0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i];
    if (t <= 0.0 || t < window.t_min || t > window.t_max) continue;
    sum_sigma += series.c[i] / (2.0 * t);
    sum_cbar += series.c[i] / (t * t);
    ++fit.samples;
  }
  if (fit.samples == 0) throw std::invalid_argument("fit window contains no time points");
  fit.sigma = sum_sigma / fit.samples;
  fit.cbar = sum_cbar / fit.samples;
  constexpr double inf = std::numeric_limits<double>::infinity();
  fit.tau_em = delta > 0.0 ? hbar * hbar / (2.0 * fit.sigma * delta * delta) : inf;
  fit.tau_ne = delta > 0.0 ? hbar / (std::sqrt(fit.cbar) * delta) : inf;
  return fit;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs >= 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double fit_proportional(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("fit_proportional needs points");
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_proportional: all abscissae are zero");
  return sxy / sxx;
}

}  // namespace jcecho
