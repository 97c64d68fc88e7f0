#pragma once

// Independent reference computations for the unit and acceptance tests.

#include <cstdint>
#include <random>

#include "jcecho/linalg.h"

namespace oracle {

using jcecho::Complex;
using jcecho::Index;
using jcecho::Matrix;
using jcecho::Vector;

// Kronecker product by explicit index loops.
Matrix kron(const Matrix& a, const Matrix& b);

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng);
Matrix random_hermitian(Index n, std::mt19937_64& rng);
Vector random_unit_vector(Index n, std::mt19937_64& rng);

// Hermitian, unit trace, positive definite.
Matrix random_density_matrix(Index n, std::mt19937_64& rng);

// Orthonormal basis whose first column is v (Gram-Schmidt on v, e_0, e_1, ...).
Matrix complete_basis(const Vector& v);

// Purity of the first d1 coordinates of psi(x) = exp(i x.A x) sampled on the uniform grid
// x_k = -half_width + k h, k < n, in every coordinate. Supports d1 + d2 <= 3.
double gaussian_purity(const Matrix& a, int d1, int d2, int n, double half_width, double hbar = 1.0);

}  // namespace oracle
