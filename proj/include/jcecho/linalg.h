#pragma once

#include <complex>

#include <Eigen/Dense>

namespace jcecho {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

/// Largest absolute entry; 0 for an empty matrix.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// True when ||m - m^dagger||_max <= tol * max(1, ||m||_max).
bool is_hermitian(const Matrix& m, double tol);

}  // namespace jcecho
