#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "jcecho/linalg.h"
#include "jcecho/operators.h"
#include "jcecho/states.h"

namespace jcecho {

// Dense matrix kept in real arithmetic when its entries are real.
class DenseBlock {
 public:
  DenseBlock() = default;
  explicit DenseBlock(RealMatrix m) : m_(std::move(m)) {}
  explicit DenseBlock(Matrix m) : m_(std::move(m)) {}

  bool is_real() const { return std::holds_alternative<RealMatrix>(m_); }
  Index rows() const;
  Index cols() const;

  Vector apply(const Vector& x) const;          // M x
  Vector apply_adjoint(const Vector& x) const;  // M^dagger x
  Matrix to_complex() const;

  const RealMatrix& real() const { return std::get<RealMatrix>(m_); }
  const Matrix& complex() const { return std::get<Matrix>(m_); }

 private:
  std::variant<RealMatrix, Matrix> m_;
};

/// One invariant subspace of the diagonalized operator.
struct EigenBlock {
  std::vector<Index> indices;  // computational-basis indices, ascending
  Index offset = 0;            // eigen-index of the first eigenvalue of the block
  RealVector energies;         // ascending
  DenseBlock vectors;          // indices.size() x indices.size(), columns are eigenvectors
};

/// Eigenpairs H W = W diag(E) of a Hermitian operator, stored per invariant subspace.
/// Eigen-indices run block by block (blocks ordered by their smallest basis index),
/// ascending in energy within a block.
class SpectralDecomposition {
 public:
  SpectralDecomposition(Index dim, std::vector<EigenBlock> blocks);

  Index dim() const { return dim_; }
  const RealVector& energies() const { return energies_; }
  const std::vector<EigenBlock>& blocks() const { return blocks_; }
  double max_abs_energy() const;

  Matrix basis() const;  // dense W

  Vector to_eigenbasis(const Vector& x) const;    // W^dagger x
  Vector from_eigenbasis(const Vector& y) const;  // W y
  Matrix transform(const Matrix& a) const;        // W^dagger A W
  Matrix back_transform(const Matrix& a) const;   // W A W^dagger
  Matrix reconstruct() const;                     // W diag(E) W^dagger

 private:
  Index dim_;
  std::vector<EigenBlock> blocks_;
  RealVector energies_;
};

/// Throws std::invalid_argument unless h is Hermitian to 1e-12 (relative to max entry).
SpectralDecomposition diagonalize(const Operator& h);

/// e^{-i H t / hbar} psi0.
QuantumState propagate(const SpectralDecomposition& spec, const QuantumState& psi0, double t,
                       double hbar);

/// U_delta(-t) U(t) psi0, with spec_hd the decomposition of H + delta V.
QuantumState echo_apply(const SpectralDecomposition& spec_h, const SpectralDecomposition& spec_hd,
                        const QuantumState& psi0, double t, double hbar);

/// Repeated echo evaluation from a fixed initial state.
class EchoPropagator {
 public:
  EchoPropagator(std::shared_ptr<const SpectralDecomposition> spec_h,
                 std::shared_ptr<const SpectralDecomposition> spec_hd, const QuantumState& psi0,
                 double hbar);

  QuantumState at(double t) const;

 private:
  std::shared_ptr<const SpectralDecomposition> spec_h_;
  std::shared_ptr<const SpectralDecomposition> spec_hd_;
  Vector coeffs_;  // W^dagger psi0
  double hbar_;
};

/// hbar (e^{i dE t/hbar} - 1) / (i dE); t when |dE| < degeneracy_threshold.
Complex sigma_kernel(double energy_gap, double t, double hbar, double degeneracy_threshold);

/// Relative degeneracy threshold: gaps below 1e-12 * max|E| use the t branch.
inline constexpr double kDegeneracyTolerance = 1e-12;

/// Sigma(t) = int_0^t U^dagger(s) V U(s) ds, built in the eigenbasis of H.
Operator sigma_operator(const SpectralDecomposition& spec_h, const Operator& v, double t,
                        double hbar);

/// Sigma(t)|psi0> for many t at O(dim^2) per time point.
///
/// In the eigenbasis, (Sigma' p)_j = sum_k V'_jk phi(E_j - E_k, t) p_k. For well separated
/// pairs phi factorizes as (hbar/i)(e^{iE_j t/hbar} e^{-iE_k t/hbar} - 1)/dE, which turns the
/// sum into one matrix-vector product per t with R_jk = V'_jk / dE_jk. Pairs closer than
/// kNearGap * max|E| are kept in a sparse list and evaluated with the exact kernel.
class SigmaAction {
 public:
  static constexpr double kNearGap = 1e-6;

  SigmaAction(std::shared_ptr<const SpectralDecomposition> spec_h, const Operator& v,
              const QuantumState& psi0, double hbar);

  Vector apply(double t) const;
  const QuantumState& initial() const { return psi0_; }
  double hbar() const { return hbar_; }

 private:
  struct Tile {
    std::size_t row_block;
    std::size_t col_block;
    DenseBlock ratio;  // V'_jk / dE_jk, zero on near pairs
  };
  struct NearPair {
    Index row;
    Index col;
    Complex element;
  };

  Vector apply_ratio(const Vector& x) const;

  std::shared_ptr<const SpectralDecomposition> spec_;
  QuantumState psi0_;
  double hbar_;
  double degeneracy_threshold_;
  Vector coeffs_;        // W^dagger psi0
  Vector ratio_coeffs_;  // R W^dagger psi0
  std::vector<Tile> tiles_;
  std::vector<NearPair> near_;
};

}  // namespace jcecho
