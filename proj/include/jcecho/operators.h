#pragma once

#include <optional>

#include "jcecho/half_integer.h"
#include "jcecho/linalg.h"

namespace jcecho {

/// Bipartite Hilbert space H1 (x) H2. Composite index k = i * n2 + nu, with
/// i labelling the first factor (the spin) and nu the second (the boson).
class ProductSpace {
 public:
  ProductSpace(int n1, int n2);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int dim() const { return n1_ * n2_; }
  int index(int i, int nu) const { return i * n2_ + nu; }

  friend bool operator==(const ProductSpace&, const ProductSpace&) = default;

 private:
  int n1_;
  int n2_;
};

enum class Factor { First = 1, Second = 2 };

/// Dense square operator, optionally tagged with the product space it acts on.
class Operator {
 public:
  explicit Operator(Matrix entries, std::optional<ProductSpace> space = std::nullopt);

  Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }
  const std::optional<ProductSpace>& space() const { return space_; }

  Operator adjoint() const;
  bool is_hermitian(double tol = 1e-13) const { return jcecho::is_hermitian(entries_, tol); }

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, const Operator& a);
  friend Operator operator*(double s, const Operator& a) { return Complex(s) * a; }

 private:
  Matrix entries_;
  std::optional<ProductSpace> space_;
};

Operator commutator(const Operator& a, const Operator& b);

struct BosonOperators {
  Operator a;
  Operator adag;
};

/// Annihilation/creation operators on the truncated Fock basis |0>..|nboson-1>.
BosonOperators boson_ops(int nboson);

struct SpinOperators {
  Operator jz;
  Operator jp;
  Operator jm;
};

/// su(2) generators for spin j on the basis |j,m>, m = j, j-1, ..., -j.
SpinOperators spin_ops(HalfInteger j);

/// op (x) I for Factor::First, I (x) op for Factor::Second.
Operator embed(const Operator& op, Factor which, const ProductSpace& space);

/// Parameters of the spin-boson model
///   H = hbar w a^dag a + hbar eps Jz + hbar / sqrt(2J) (G a J+ + G' a J- + h.c.)
/// with hbar tied to the spin through hbar * J = 1.
struct JCParams {
  HalfInteger spin = HalfInteger::from_twice(8);
  double hbar = 0.25;
  double omega = 0.3;
  double epsilon = 0.3;
  Complex g{1.0, 0.0};
  Complex gprime{1.0, 0.0};
  int nboson = 64;

  /// Builds a parameter set with hbar = 1/J.
  static JCParams with_spin(HalfInteger spin, double omega, double epsilon, Complex g,
                            Complex gprime, int nboson);

  ProductSpace space() const { return ProductSpace(spin.twice() + 1, nboson); }

  /// Throws std::invalid_argument on an inconsistent parameter set.
  void validate() const;
};

struct JCModel {
  Operator hamiltonian;
  Operator perturbation;  // V = hbar * Jz (x) I
};

JCModel build_jc(const JCParams& params);

}  // namespace jcecho
