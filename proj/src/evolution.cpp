#include "jcecho/evolution.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <lapacke.h>

namespace jcecho {

Index DenseBlock::rows() const {
  return std::visit([](const auto& m) { return m.rows(); }, m_);
}

Index DenseBlock::cols() const {
  return std::visit([](const auto& m) { return m.cols(); }, m_);
}

Vector DenseBlock::apply(const Vector& x) const {
  if (is_real()) {
    const RealMatrix& m = real();
    Vector out(m.rows());
    out.real() = m * x.real();
    out.imag() = m * x.imag();
    return out;
  }
  return complex() * x;
}

Vector DenseBlock::apply_adjoint(const Vector& x) const {
  if (is_real()) {
    const RealMatrix& m = real();
    Vector out(m.cols());
    out.real() = m.transpose() * x.real();
    out.imag() = m.transpose() * x.imag();
    return out;
  }
  return complex().adjoint() * x;
}

Matrix DenseBlock::to_complex() const {
  if (is_real()) return real().cast<Complex>();
  return complex();
}

namespace {

// Tile (b, c) of W^dagger A W; tiles whose A sub-block is exactly zero are omitted.
struct TransformedTile {
  std::size_t row_block;
  std::size_t col_block;
  DenseBlock values;
};

std::vector<TransformedTile> transform_tiles(const std::vector<EigenBlock>& blocks,
                                             const Matrix& a) {
  const bool a_real = a.imag().isZero(0.0);
  std::vector<TransformedTile> tiles;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t c = 0; c < blocks.size(); ++c) {
      const auto& rows = blocks[b].indices;
      const auto& cols = blocks[c].indices;
      const Matrix sub = a(rows, cols);
      if (sub.isZero(0.0)) continue;
      const DenseBlock& wb = blocks[b].vectors;
      const DenseBlock& wc = blocks[c].vectors;
      if (a_real && wb.is_real() && wc.is_real()) {
        RealMatrix t = wb.real().transpose() * (sub.real() * wc.real());
        tiles.push_back({b, c, DenseBlock(std::move(t))});
      } else {
        Matrix t = wb.to_complex().adjoint() * (sub * wc.to_complex());
        tiles.push_back({b, c, DenseBlock(std::move(t))});
      }
    }
  }
  return tiles;
}

std::vector<std::vector<Index>> invariant_subspaces(const Matrix& h) {
  const Index n = h.rows();
  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&parent](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      if (h(i, j) == Complex(0.0) && h(j, i) == Complex(0.0)) continue;
      const Index ri = find(i);
      const Index rj = find(j);
      if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
    }
  // Roots are the smallest index of their component, so components come out ordered.
  std::vector<std::vector<Index>> groups;
  std::vector<Index> slot(n, -1);
  for (Index i = 0; i < n; ++i) {
    const Index r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<Index>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

EigenBlock diagonalize_block(const Matrix& h, std::vector<Index> indices) {
  const Matrix sub = h(indices, indices);
  const auto n = static_cast<lapack_int>(indices.size());
  EigenBlock block;
  block.indices = std::move(indices);
  block.energies.resize(n);
  lapack_int info = 0;
  if (sub.imag().isZero(0.0)) {
    RealMatrix w = sub.real();
    info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, w.data(), n, block.energies.data());
    block.vectors = DenseBlock(std::move(w));
  } else {
    Matrix w = sub;
    info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                          reinterpret_cast<lapack_complex_double*>(w.data()), n,
                          block.energies.data());
    block.vectors = DenseBlock(std::move(w));
  }
  if (info != 0) {
    throw std::runtime_error("Hermitian eigensolver failed, LAPACK info = " + std::to_string(info));
  }
  return block;
}

// Gathers x[indices].
Vector gather(const Vector& x, const std::vector<Index>& indices) { return x(indices); }

}  // namespace

SpectralDecomposition::SpectralDecomposition(Index dim, std::vector<EigenBlock> blocks)
    : dim_(dim), blocks_(std::move(blocks)), energies_(dim) {
  Index offset = 0;
  for (auto& b : blocks_) {
    b.offset = offset;
    energies_.segment(offset, b.energies.size()) = b.energies;
    offset += b.energies.size();
  }
  if (offset != dim_) throw std::invalid_argument("eigen blocks do not cover the space");
}

double SpectralDecomposition::max_abs_energy() const {
  return dim_ == 0 ? 0.0 : energies_.cwiseAbs().maxCoeff();
}

Matrix SpectralDecomposition::basis() const {
  Matrix w = Matrix::Zero(dim_, dim_);
  for (const auto& b : blocks_) {
    const Matrix v = b.vectors.to_complex();
    const auto n = static_cast<Index>(b.indices.size());
    for (Index col = 0; col < n; ++col)
      for (Index row = 0; row < n; ++row) w(b.indices[row], b.offset + col) = v(row, col);
  }
  return w;
}

Vector SpectralDecomposition::to_eigenbasis(const Vector& x) const {
  if (x.size() != dim_) throw std::invalid_argument("vector dimension mismatch");
  Vector y(dim_);
  for (const auto& b : blocks_) {
    y.segment(b.offset, b.energies.size()) = b.vectors.apply_adjoint(gather(x, b.indices));
  }
  return y;
}

Vector SpectralDecomposition::from_eigenbasis(const Vector& y) const {
  if (y.size() != dim_) throw std::invalid_argument("vector dimension mismatch");
  Vector x(dim_);
  for (const auto& b : blocks_) {
    x(b.indices) = b.vectors.apply(y.segment(b.offset, b.energies.size()));
  }
  return x;
}

Matrix SpectralDecomposition::transform(const Matrix& a) const {
  if (a.rows() != dim_ || a.cols() != dim_) throw std::invalid_argument("matrix dimension mismatch");
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const auto& t : transform_tiles(blocks_, a)) {
    const auto& rb = blocks_[t.row_block];
    const auto& cb = blocks_[t.col_block];
    out.block(rb.offset, cb.offset, rb.energies.size(), cb.energies.size()) = t.values.to_complex();
  }
  return out;
}

Matrix SpectralDecomposition::back_transform(const Matrix& a) const {
  if (a.rows() != dim_ || a.cols() != dim_) throw std::invalid_argument("matrix dimension mismatch");
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const auto& rb : blocks_) {
    const Matrix wr = rb.vectors.to_complex();
    for (const auto& cb : blocks_) {
      const auto tile = a.block(rb.offset, cb.offset, rb.energies.size(), cb.energies.size());
      if (tile.isZero(0.0)) continue;
      const Matrix wc = cb.vectors.to_complex();
      out(rb.indices, cb.indices) = wr * tile * wc.adjoint();
    }
  }
  return out;
}

Matrix SpectralDecomposition::reconstruct() const {
  Matrix diag = Matrix::Zero(dim_, dim_);
  diag.diagonal() = energies_.cast<Complex>();
  return back_transform(diag);
}

SpectralDecomposition diagonalize(const Operator& h) {
  const Matrix& m = h.matrix();
  if (!is_hermitian(m, 1e-12)) throw std::invalid_argument("diagonalize: operator is not Hermitian");
  std::vector<EigenBlock> blocks;
  for (auto& indices : invariant_subspaces(m)) blocks.push_back(diagonalize_block(m, std::move(indices)));
  return SpectralDecomposition(h.dim(), std::move(blocks));
}

namespace {

Vector phases(const RealVector& energies, double t, double hbar, double sign) {
  Vector out(energies.size());
  for (Index k = 0; k < energies.size(); ++k) out[k] = std::polar(1.0, sign * energies[k] * t / hbar);
  return out;
}

}  // namespace

QuantumState propagate(const SpectralDecomposition& spec, const QuantumState& psi0, double t,
                       double hbar) {
  if (psi0.dim() != spec.dim()) throw std::invalid_argument("propagate: dimension mismatch");
  Vector y = spec.to_eigenbasis(psi0.amplitudes());
  y.array() *= phases(spec.energies(), t, hbar, -1.0).array();
  return QuantumState(spec.from_eigenbasis(y));
}

QuantumState echo_apply(const SpectralDecomposition& spec_h, const SpectralDecomposition& spec_hd,
                        const QuantumState& psi0, double t, double hbar) {
  return propagate(spec_hd, propagate(spec_h, psi0, t, hbar), -t, hbar);
}

EchoPropagator::EchoPropagator(std::shared_ptr<const SpectralDecomposition> spec_h,
                               std::shared_ptr<const SpectralDecomposition> spec_hd,
                               const QuantumState& psi0, double hbar)
    : spec_h_(std::move(spec_h)), spec_hd_(std::move(spec_hd)), hbar_(hbar) {
  if (!spec_h_ || !spec_hd_) throw std::invalid_argument("EchoPropagator: null decomposition");
  if (spec_h_->dim() != psi0.dim() || spec_hd_->dim() != psi0.dim()) {
    throw std::invalid_argument("EchoPropagator: dimension mismatch");
  }
  coeffs_ = spec_h_->to_eigenbasis(psi0.amplitudes());
}

QuantumState EchoPropagator::at(double t) const {
  Vector y = coeffs_.array() * phases(spec_h_->energies(), t, hbar_, -1.0).array();
  Vector z = spec_hd_->to_eigenbasis(spec_h_->from_eigenbasis(y));
  z.array() *= phases(spec_hd_->energies(), t, hbar_, 1.0).array();
  return QuantumState(spec_hd_->from_eigenbasis(z));
}

Complex sigma_kernel(double energy_gap, double t, double hbar, double degeneracy_threshold) {
  if (std::abs(energy_gap) < degeneracy_threshold) return Complex(t);
  // e^{ix} - 1 = 2i sin(x/2) e^{ix/2}: no cancellation for small x.
  const double half = 0.5 * energy_gap * t / hbar;
  return std::polar(2.0 * hbar * std::sin(half) / energy_gap, half);
}

Operator sigma_operator(const SpectralDecomposition& spec_h, const Operator& v, double t,
                        double hbar) {
  if (v.dim() != spec_h.dim()) throw std::invalid_argument("sigma_operator: dimension mismatch");
  const RealVector& e = spec_h.energies();
  const double threshold = kDegeneracyTolerance * spec_h.max_abs_energy();
  Matrix s = spec_h.transform(v.matrix());
  for (Index k = 0; k < s.cols(); ++k)
    for (Index j = 0; j < s.rows(); ++j) {
      if (s(j, k) == Complex(0.0)) continue;
      s(j, k) *= sigma_kernel(e[j] - e[k], t, hbar, threshold);
    }
  Matrix out = spec_h.back_transform(s);
  out = 0.5 * (out + out.adjoint()).eval();
  return Operator(std::move(out), v.space());
}

SigmaAction::SigmaAction(std::shared_ptr<const SpectralDecomposition> spec_h, const Operator& v,
                         const QuantumState& psi0, double hbar)
    : spec_(std::move(spec_h)), psi0_(psi0), hbar_(hbar) {
  if (!spec_) throw std::invalid_argument("SigmaAction: null decomposition");
  if (v.dim() != spec_->dim() || psi0.dim() != spec_->dim()) {
    throw std::invalid_argument("SigmaAction: dimension mismatch");
  }
  const auto& blocks = spec_->blocks();
  const double scale = spec_->max_abs_energy();
  degeneracy_threshold_ = kDegeneracyTolerance * scale;
  const double near_gap = kNearGap * scale;

  for (auto& tile : transform_tiles(blocks, v.matrix())) {
    const auto& rb = blocks[tile.row_block];
    const auto& cb = blocks[tile.col_block];
    auto fill = [&](auto& m) {
      for (Index k = 0; k < m.cols(); ++k)
        for (Index j = 0; j < m.rows(); ++j) {
          const double gap = rb.energies[j] - cb.energies[k];
          if (std::abs(gap) < near_gap) {
            if (m(j, k) != 0.0) near_.push_back({rb.offset + j, cb.offset + k, Complex(m(j, k))});
            m(j, k) = 0.0;
          } else {
            m(j, k) /= gap;
          }
        }
    };
    if (tile.values.is_real()) {
      RealMatrix m = tile.values.real();
      fill(m);
      tiles_.push_back({tile.row_block, tile.col_block, DenseBlock(std::move(m))});
    } else {
      Matrix m = tile.values.complex();
      fill(m);
      tiles_.push_back({tile.row_block, tile.col_block, DenseBlock(std::move(m))});
    }
  }
  coeffs_ = spec_->to_eigenbasis(psi0_.amplitudes());
  ratio_coeffs_ = apply_ratio(coeffs_);
}

Vector SigmaAction::apply_ratio(const Vector& x) const {
  const auto& blocks = spec_->blocks();
  Vector out = Vector::Zero(x.size());
  for (const auto& t : tiles_) {
    const auto& rb = blocks[t.row_block];
    const auto& cb = blocks[t.col_block];
    out.segment(rb.offset, rb.energies.size()) +=
        t.ratio.apply(x.segment(cb.offset, cb.energies.size()));
  }
  return out;
}

Vector SigmaAction::apply(double t) const {
  const RealVector& e = spec_->energies();
  const Vector forward = phases(e, t, hbar_, -1.0);
  const Vector backward = phases(e, t, hbar_, 1.0);
  Vector y = apply_ratio((coeffs_.array() * forward.array()).matrix());
  y = (-kI * hbar_) * (backward.array() * y.array() - ratio_coeffs_.array()).matrix();
  for (const auto& p : near_) {
    y[p.row] += p.element * sigma_kernel(e[p.row] - e[p.col], t, hbar_, degeneracy_threshold_) *
                coeffs_[p.col];
  }
  return spec_->from_eigenbasis(y);
}

}  // namespace jcecho
