#pragma once

#include <cmath>
#include <iosfwd>
#include <string>

#include "jcecho/linalg.h"

namespace jcecho {

/// Complex (d1 + d2) square matrix with a block split, as read from a matrix file.
struct BlockMatrix {
  int d1 = 0;
  int d2 = 0;
  Matrix entries;
};

/// Matrix file: optional '#' comment lines, a header line "d1 d2", then d1 + d2 rows of
/// d1 + d2 whitespace-separated "re,im" pairs. Throws std::runtime_error naming the line.
BlockMatrix read_block_matrix(std::istream& in);
BlockMatrix read_block_matrix_file(const std::string& path);
void write_block_matrix(std::ostream& out, const BlockMatrix& m);

/// Width matrix A of a Gaussian packet exp(i/hbar x.A x): complex symmetric with
/// positive-definite imaginary part, split into subsystem blocks of size d1 and d2.
class CovarianceMatrix {
 public:
  /// Throws std::invalid_argument if A is not symmetric or Im A is not positive definite.
  CovarianceMatrix(int d1, int d2, Matrix a);
  explicit CovarianceMatrix(const BlockMatrix& m) : CovarianceMatrix(m.d1, m.d2, m.entries) {}

  int d1() const { return d1_; }
  int d2() const { return d2_; }
  const Matrix& matrix() const { return a_; }

  auto a11() const { return a_.topLeftCorner(d1_, d1_); }
  auto a12() const { return a_.topRightCorner(d1_, d2_); }
  auto a21() const { return a_.bottomLeftCorner(d2_, d1_); }
  auto a22() const { return a_.bottomRightCorner(d2_, d2_); }

 private:
  int d1_;
  int d2_;
  Matrix a_;
};

/// Purity of the reduced packet on the first d1 coordinates,
///   F_P = det(Im A) |det M|^{-1/2},
/// with M the 2d x 2d quadratic form of the four-fold overlap integral (independent of hbar).
/// Throws std::domain_error when det M vanishes.
double wavepacket_purity(const CovarianceMatrix& cov);

/// The 4 x 4 block matrix M entering wavepacket_purity.
Matrix purity_form(const CovarianceMatrix& cov);

struct QuadraticDecay {
  double k = 0.0;          // F_P(t) = 1 - (t delta / k)^2 + O(t^4); +inf without cross-block drift
  double curvature = 0.0;  // d^2 F_P / dt^2 at t = 0
  double slope = 0.0;      // d F_P / dt at t = 0 (vanishes)
  double step = 0.0;       // finite-difference step in t
  bool decays() const { return std::isfinite(k); }
};

/// Curvature of t -> wavepacket_purity(A0 + t delta B) at t = 0 by Richardson-extrapolated
/// central differences. A0 must be block diagonal.
QuadraticDecay quadratic_decay_constant(const CovarianceMatrix& a0, const Matrix& drift, double delta);

}  // namespace jcecho
