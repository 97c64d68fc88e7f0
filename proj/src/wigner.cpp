#include "jcecho/wigner.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gsl/gsl_integration.h>

namespace jcecho {

namespace {

// log(n!) for a non-negative integer stored as twice its value.
double log_factorial_twice(int twice) { return std::lgamma(0.5 * twice + 1.0); }

void check_pair(HalfInteger j, HalfInteger m) {
  if (j.twice() < 0) throw std::invalid_argument("angular momentum must be non-negative");
  if (std::abs(m.twice()) > j.twice()) throw std::invalid_argument("|m| exceeds j");
  if ((j.twice() - m.twice()) % 2 != 0) throw std::invalid_argument("j - m must be an integer");
}

}  // namespace

double clebsch_gordan(HalfInteger j1, HalfInteger m1, HalfInteger j2, HalfInteger m2, HalfInteger j,
                      HalfInteger m) {
  check_pair(j1, m1);
  check_pair(j2, m2);
  check_pair(j, m);
  if (m1 + m2 != m) return 0.0;
  const int a = j1.twice() + j2.twice() - j.twice();  // twice (j1 + j2 - j)
  const int b = j1.twice() - j2.twice() + j.twice();
  const int c = -j1.twice() + j2.twice() + j.twice();
  if (a < 0 || b < 0 || c < 0 || a % 2 != 0) return 0.0;

  const double log_triangle = log_factorial_twice(a) + log_factorial_twice(b) +
                              log_factorial_twice(c) -
                              log_factorial_twice(j1.twice() + j2.twice() + j.twice() + 2);
  const double log_prefactor =
      0.5 * (std::log(j.twice() + 1.0) + log_triangle +
             log_factorial_twice(j1.twice() + m1.twice()) + log_factorial_twice(j1.twice() - m1.twice()) +
             log_factorial_twice(j2.twice() + m2.twice()) + log_factorial_twice(j2.twice() - m2.twice()) +
             log_factorial_twice(j.twice() + m.twice()) + log_factorial_twice(j.twice() - m.twice()));

  // Integer arguments of the Racah denominator as functions of k.
  const int n1 = a / 2;                                     // j1 + j2 - j - k
  const int n2 = (j1.twice() - m1.twice()) / 2;             // j1 - m1 - k
  const int n3 = (j2.twice() + m2.twice()) / 2;             // j2 + m2 - k
  const int n4 = (j.twice() - j2.twice() + m1.twice()) / 2;  // j - j2 + m1 + k
  const int n5 = (j.twice() - j1.twice() - m2.twice()) / 2;  // j - j1 - m2 + k
  const int k_min = std::max({0, -n4, -n5});
  const int k_max = std::min({n1, n2, n3});

  double sum = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const double log_den = std::lgamma(k + 1.0) + std::lgamma(n1 - k + 1.0) +
                           std::lgamma(n2 - k + 1.0) + std::lgamma(n3 - k + 1.0) +
                           std::lgamma(n4 + k + 1.0) + std::lgamma(n5 + k + 1.0);
    const double term = std::exp(log_prefactor - log_den);
    sum += (k % 2 == 0) ? term : -term;
  }
  return sum;
}

MultipoleComponents::MultipoleComponents(HalfInteger spin, std::vector<Complex> values)
    : spin_(spin), values_(std::move(values)) {
  const auto expected = static_cast<std::size_t>((spin.twice() + 1) * (spin.twice() + 1));
  if (values_.size() != expected) throw std::invalid_argument("wrong number of multipole moments");
}

Matrix tensor_operator(HalfInteger spin, int k, int q) {
  const int dim = spin.twice() + 1;
  if (k < 0 || k > spin.twice() || std::abs(q) > k) throw std::invalid_argument("invalid tensor rank");
  const double norm = std::sqrt((2.0 * k + 1.0) / dim);
  const auto K = HalfInteger::from_twice(2 * k);
  const auto Q = HalfInteger::from_twice(2 * q);
  Matrix t = Matrix::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    const auto m = spin - HalfInteger::from_twice(2 * col);
    const auto mp = m + Q;
    if (std::abs(mp.twice()) > spin.twice()) continue;
    const int row = (spin - mp).twice() / 2;
    t(row, col) = norm * clebsch_gordan(spin, m, K, Q, spin, mp);
  }
  return t;
}

MultipoleComponents multipole_components(const ReducedDensityMatrix& rho, HalfInteger spin) {
  const int dim = spin.twice() + 1;
  if (rho.dim() != dim) throw std::invalid_argument("density matrix does not match the spin");
  std::vector<Complex> values;
  values.reserve(static_cast<std::size_t>(dim * dim));
  for (int k = 0; k <= spin.twice(); ++k)
    for (int q = -k; q <= k; ++q) {
      // tr(rho T^dagger) = sum_ab conj(T_ab) rho_ab.
      values.push_back((tensor_operator(spin, k, q).conjugate().array() * rho.matrix().array()).sum());
    }
  return MultipoleComponents(spin, std::move(values));
}

Complex spherical_harmonic(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) throw std::invalid_argument("invalid spherical harmonic index");
  const int am = std::abs(m);
  const Complex y = std::sph_legendre(l, am, theta) * std::polar(1.0, am * phi);
  if (m >= 0) return y;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
}

SphereGrid SphereGrid::gauss_legendre(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("sphere grid needs positive sizes");
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n_theta);
  if (table == nullptr) throw std::runtime_error("Gauss-Legendre table allocation failed");
  SphereGrid grid;
  grid.thetas.resize(n_theta);
  grid.phis.resize(n_phi);
  grid.weights.resize(n_theta, n_phi);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  for (int j = 0; j < n_phi; ++j) grid.phis[j] = j * dphi;
  for (int i = 0; i < n_theta; ++i) {
    double x = 0.0;
    double w = 0.0;
    gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(i), &x, &w, table);
    // Descending cos(theta), so thetas ascend from the north pole.
    grid.thetas[n_theta - 1 - i] = std::acos(x);
    grid.weights.row(n_theta - 1 - i).setConstant(w * dphi);
  }
  gsl_integration_glfixed_table_free(table);
  return grid;
}

SphereGrid SphereGrid::for_spin(HalfInteger spin) {
  const int n = 2 * spin.twice() + 2;
  return gauss_legendre(n, n);
}

double WignerField::integrate_squared() const {
  return (grid.weights.array() * values.array().square()).sum();
}

WignerField wigner_function(const MultipoleComponents& moments, const SphereGrid& grid) {
  const int kmax = moments.max_rank();
  WignerField field;
  field.grid = grid;
  field.values.resize(grid.thetas.size(), grid.phis.size());
  for (Index i = 0; i < grid.thetas.size(); ++i)
    for (Index j = 0; j < grid.phis.size(); ++j) {
      Complex w = 0.0;
      for (int k = 0; k <= kmax; ++k)
        for (int q = -k; q <= k; ++q) w += moments(k, q) * spherical_harmonic(k, q, grid.thetas[i], grid.phis[j]);
      field.values(i, j) = w.real();
      field.max_imag = std::max(field.max_imag, std::abs(w.imag()));
    }
  return field;
}

WignerField wigner_function(const ReducedDensityMatrix& rho, HalfInteger spin, const SphereGrid& grid) {
  return wigner_function(multipole_components(rho, spin), grid);
}

}  // namespace jcecho
