#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "jcecho/operators.h"
#include "support/oracles.h"

using namespace jcecho;

namespace {

HalfInteger J(double j) { return HalfInteger::from_double(j); }

Matrix diag(std::initializer_list<double> d) {
  Matrix m = Matrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index k = 0;
  for (double x : d) m(k, k) = x, ++k;
  return m;
}

}  // namespace

TEST_CASE("boson operators on a truncated Fock basis") {
  const auto [a, adag] = boson_ops(3);
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 1) = 1.0;
  expected(1, 2) = std::sqrt(2.0);
  CHECK(max_abs(a.matrix() - expected) == 0.0);
  CHECK(max_abs(adag.matrix() - a.matrix().adjoint()) == 0.0);
  CHECK(max_abs((adag * a).matrix() - diag({0, 1, 2})) < 1e-15);

  const auto ops4 = boson_ops(4);
  CHECK(max_abs(commutator(ops4.a, ops4.adag).matrix() - diag({1, 1, 1, -3})) < 1e-14);

  CHECK_THROWS_AS(boson_ops(1), std::invalid_argument);
}

TEST_CASE("truncation breaks [a, a+] only in the last diagonal entry") {
  const int nb = 12;
  const auto ops = boson_ops(nb);
  Matrix defect = commutator(ops.a, ops.adag).matrix() - Matrix::Identity(nb, nb);
  CHECK(std::abs(defect(nb - 1, nb - 1) + static_cast<double>(nb)) < 1e-12);
  defect(nb - 1, nb - 1) = 0.0;
  CHECK(max_abs(defect) < 1e-13);
}

TEST_CASE("spin operators") {
  const auto half = spin_ops(J(0.5));
  CHECK(max_abs(half.jz.matrix() - diag({0.5, -0.5})) == 0.0);

  // Jp |4,3> = sqrt(20 - 12) |4,4>; basis index 1 is m = 3.
  const auto s4 = spin_ops(J(4));
  Vector m3 = Vector::Zero(9);
  m3[1] = 1.0;
  const Vector up = s4.jp.matrix() * m3;
  CHECK(std::abs(up[0] - std::sqrt(8.0)) < 1e-15);
  CHECK(up.norm() == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));

  CHECK_THROWS_AS(HalfInteger::from_double(0.3), std::invalid_argument);
}

TEST_CASE("su(2) algebra and Casimir for several spins") {
  for (double j : {0.5, 1.0, 1.5, 2.0, 3.5, 4.0, 12.0}) {
    CAPTURE(j);
    const auto s = spin_ops(J(j));
    const Index n = s.jz.dim();
    CHECK(max_abs(commutator(s.jp, s.jm).matrix() - 2.0 * s.jz.matrix()) < 1e-13);
    CHECK(max_abs(commutator(s.jz, s.jp).matrix() - s.jp.matrix()) < 1e-13);
    CHECK(max_abs(commutator(s.jz, s.jm).matrix() + s.jm.matrix()) < 1e-13);
    const Matrix casimir = (s.jp * s.jm).matrix() + s.jz.matrix() * s.jz.matrix() - s.jz.matrix();
    CHECK(max_abs(casimir - j * (j + 1.0) * Matrix::Identity(n, n)) < 1e-12);
    CHECK(s.jz.is_hermitian());
  }
}

TEST_CASE("embed places an operator on one tensor factor") {
  const ProductSpace s22(2, 2);
  const auto half = spin_ops(J(0.5));
  CHECK(max_abs(embed(half.jz, Factor::First, s22).matrix() - diag({0.5, 0.5, -0.5, -0.5})) == 0.0);

  const ProductSpace s35(3, 5);
  const Operator id2(Matrix::Identity(5, 5));
  CHECK(max_abs(embed(id2, Factor::Second, s35).matrix() - Matrix::Identity(15, 15)) == 0.0);

  // a on factor 2 maps |i=0, nu=1> to |i=0, nu=0>.
  const ProductSpace s23(2, 3);
  const auto ops = boson_ops(3);
  Vector e = Vector::Zero(6);
  e[s23.index(0, 1)] = 1.0;
  Vector expected = Vector::Zero(6);
  expected[s23.index(0, 0)] = 1.0;
  CHECK(max_abs(embed(ops.a, Factor::Second, s23).matrix() * e - expected) == 0.0);

  CHECK_THROWS_AS(embed(ops.a, Factor::First, s23), std::invalid_argument);
}

TEST_CASE("embed agrees with the Kronecker product and preserves spectra") {
  std::mt19937_64 rng(11);
  const Matrix a = oracle::random_hermitian(3, rng);
  const Matrix b = oracle::random_hermitian(4, rng);
  const ProductSpace space(3, 4);
  const Operator ea = embed(Operator(a), Factor::First, space);
  const Operator eb = embed(Operator(b), Factor::Second, space);
  CHECK(max_abs(ea.matrix() - oracle::kron(a, Matrix::Identity(4, 4))) == 0.0);
  CHECK(max_abs(eb.matrix() - oracle::kron(Matrix::Identity(3, 3), b)) == 0.0);

  Eigen::SelfAdjointEigenSolver<Matrix> small(a);
  Eigen::SelfAdjointEigenSolver<Matrix> big(ea.matrix());
  for (Index k = 0; k < 12; ++k) {
    CHECK(std::abs(big.eigenvalues()[k] - small.eigenvalues()[k / 4]) < 1e-12);
  }
}

TEST_CASE("JC Hamiltonian matches the operator-product form") {
  for (auto [g, gp] : {std::pair<Complex, Complex>{1.0, 1.0}, {1.0, 0.0}, {Complex(0.6, 0.8), Complex(0.2, -0.5)}}) {
    const JCParams p = JCParams::with_spin(J(4), 0.3, 0.3, g, gp, 12);
    const JCModel model = build_jc(p);
    const ProductSpace space = p.space();
    const auto b = boson_ops(p.nboson);
    const auto s = spin_ops(p.spin);
    const Operator a = embed(b.a, Factor::Second, space);
    const Operator n = embed(b.adag * b.a, Factor::Second, space);
    const Operator jz = embed(s.jz, Factor::First, space);
    const Operator jp = embed(s.jp, Factor::First, space);
    const Operator jm = embed(s.jm, Factor::First, space);
    const Operator coupling = g * (a * jp) + gp * (a * jm);
    const Operator h = p.hbar * p.omega * n + p.hbar * p.epsilon * jz +
                       (p.hbar / std::sqrt(2.0 * 4.0)) * (coupling + coupling.adjoint());
    CHECK(max_abs(model.hamiltonian.matrix() - h.matrix()) < 1e-14);
    CHECK(max_abs(model.perturbation.matrix() - (p.hbar * jz).matrix()) == 0.0);
    CHECK(model.hamiltonian.is_hermitian(1e-13));
    CHECK(model.perturbation.is_hermitian(1e-13));
  }
}

TEST_CASE("conserved quantities of the co- and counter-rotating models") {
  const int nb = 20;
  const ProductSpace space(9, nb);
  const auto b = boson_ops(nb);
  const Operator n = embed(b.adag * b.a, Factor::Second, space);
  const Operator jz = embed(spin_ops(J(4)).jz, Factor::First, space);

  auto restricted_norm = [&](const Matrix& c) {
    // Drop rows and columns on the top boson level.
    double worst = 0.0;
    for (int i = 0; i < 9; ++i)
      for (int nu = 0; nu < nb - 1; ++nu)
        for (int ip = 0; ip < 9; ++ip)
          for (int nup = 0; nup < nb - 1; ++nup)
            worst = std::max(worst, std::abs(c(space.index(i, nu), space.index(ip, nup))));
    return worst;
  };

  const JCModel co = build_jc(JCParams::with_spin(J(4), 0.3, 0.3, 1.0, 0.0, nb));
  const Matrix c1 = commutator(co.hamiltonian, n + jz).matrix();
  CHECK(restricted_norm(c1) < 1e-12);
  CHECK(max_abs(c1) < 1e-12);

  const JCModel counter = build_jc(JCParams::with_spin(J(4), 0.3, 0.3, 0.0, 1.0, nb));
  const Matrix c2 = commutator(counter.hamiltonian, n - jz).matrix();
  CHECK(restricted_norm(c2) < 1e-12);
  CHECK(max_abs(c2) < 1e-12);

  // With both couplings only the parity of n + m survives.
  const JCModel both = build_jc(JCParams::with_spin(J(4), 0.3, 0.3, 1.0, 1.0, nb));
  CHECK(max_abs(commutator(both.hamiltonian, n + jz).matrix()) > 0.1);
}

TEST_CASE("parameter validation") {
  JCParams p = JCParams::with_spin(J(4), 0.3, 0.3, 1.0, 1.0, 16);
  CHECK(p.hbar == 0.25);
  CHECK_NOTHROW(p.validate());
  p.hbar = 0.3;
  CHECK_THROWS_AS(build_jc(p), std::invalid_argument);
  p = JCParams::with_spin(J(4), 0.3, 0.3, 1.0, 1.0, 1);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(ProductSpace(1, 4), std::invalid_argument);
  CHECK_THROWS_AS(Operator(Matrix::Zero(3, 3), ProductSpace(2, 2)), std::invalid_argument);
}
