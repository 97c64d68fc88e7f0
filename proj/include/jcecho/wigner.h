#pragma once

#include <vector>

#include "jcecho/half_integer.h"
#include "jcecho/linalg.h"
#include "jcecho/observables.h"

namespace jcecho {

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m> from the Racah sum,
/// with factorials taken in log space. Zero when m != m1 + m2 or the triangle rule fails.
/// Throws std::invalid_argument for negative j, |m| > j, or j - m not an integer.
double clebsch_gordan(HalfInteger j1, HalfInteger m1, HalfInteger j2, HalfInteger m2, HalfInteger j,
                      HalfInteger m);

/// Multipole moments rho_KQ = tr(rho T_KQ^dagger), K = 0..2J, |Q| <= K, for the orthonormal
/// tensor operators T_KQ = sqrt((2K+1)/(2J+1)) sum_{m,m'} <J m; K Q | J m'> |J,m'><J,m|.
class MultipoleComponents {
 public:
  MultipoleComponents(HalfInteger spin, std::vector<Complex> values);

  HalfInteger spin() const { return spin_; }
  int max_rank() const { return spin_.twice(); }
  Complex operator()(int k, int q) const { return values_[offset(k, q)]; }
  const std::vector<Complex>& values() const { return values_; }

  static std::size_t offset(int k, int q) { return static_cast<std::size_t>(k * k + k + q); }

 private:
  HalfInteger spin_;
  std::vector<Complex> values_;
};

/// Matrix of the orthonormal tensor operator T_KQ on the m-descending basis.
Matrix tensor_operator(HalfInteger spin, int k, int q);

MultipoleComponents multipole_components(const ReducedDensityMatrix& rho, HalfInteger spin);

/// Orthonormal spherical harmonic with the Condon-Shortley phase.
Complex spherical_harmonic(int l, int m, double theta, double phi);

/// Product grid: Gauss-Legendre nodes in cos(theta) times uniform phi.
struct SphereGrid {
  RealVector thetas;
  RealVector phis;
  RealMatrix weights;  // thetas.size() x phis.size(), sums to 4 pi

  /// Exact for polynomials of degree < 2 * n_theta in cos(theta) and
  /// Fourier modes |M| < n_phi.
  static SphereGrid gauss_legendre(int n_theta, int n_phi);

  /// (4J + 2) x (4J + 2): integrates |W|^2 (degree 4J) exactly.
  static SphereGrid for_spin(HalfInteger spin);
};

struct WignerField {
  SphereGrid grid;
  RealMatrix values;  // W(theta_i, phi_j)
  double max_imag = 0.0;

  /// Quadrature of |W|^2 over the sphere.
  double integrate_squared() const;
};

WignerField wigner_function(const MultipoleComponents& moments, const SphereGrid& grid);
WignerField wigner_function(const ReducedDensityMatrix& rho, HalfInteger spin, const SphereGrid& grid);

}  // namespace jcecho
