#include "jcecho/operators.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace jcecho {

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.adjoint()) <= tol * scale;
}

HalfInteger HalfInteger::from_double(double value) {
  const double twice = 2.0 * value;
  const double rounded = std::round(twice);
  if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-9) {
    std::ostringstream msg;
    msg << "not a half-integer: " << value;
    throw std::invalid_argument(msg.str());
  }
  return from_twice(static_cast<int>(rounded));
}

std::string HalfInteger::to_string() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

ProductSpace::ProductSpace(int n1, int n2) : n1_(n1), n2_(n2) {
  if (n1 < 2 || n2 < 2) {
    throw std::invalid_argument("product space factors need dimension >= 2");
  }
}

Operator::Operator(Matrix entries, std::optional<ProductSpace> space)
    : entries_(std::move(entries)), space_(space) {
  if (entries_.rows() != entries_.cols()) {
    throw std::invalid_argument("operator matrix must be square");
  }
  if (space_ && space_->dim() != entries_.rows()) {
    throw std::invalid_argument("operator dimension does not match its product space");
  }
}

Operator Operator::adjoint() const { return Operator(entries_.adjoint(), space_); }

namespace {

std::optional<ProductSpace> merged_space(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
  if (a.space() && b.space() && !(*a.space() == *b.space())) {
    throw std::invalid_argument("operators live on different product spaces");
  }
  return a.space() ? a.space() : b.space();
}

}  // namespace

Operator operator+(const Operator& a, const Operator& b) {
  auto space = merged_space(a, b);
  return Operator(a.entries_ + b.entries_, space);
}

Operator operator-(const Operator& a, const Operator& b) {
  auto space = merged_space(a, b);
  return Operator(a.entries_ - b.entries_, space);
}

Operator operator*(const Operator& a, const Operator& b) {
  auto space = merged_space(a, b);
  return Operator(a.entries_ * b.entries_, space);
}

Operator operator*(Complex s, const Operator& a) { return Operator(s * a.entries_, a.space_); }

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

BosonOperators boson_ops(int nboson) {
  if (nboson < 2) throw std::invalid_argument("boson truncation must be >= 2");
  Matrix a = Matrix::Zero(nboson, nboson);
  for (int n = 1; n < nboson; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  Matrix adag = a.adjoint();
  return {Operator(std::move(a)), Operator(std::move(adag))};
}

SpinOperators spin_ops(HalfInteger j) {
  if (j.twice() < 1) throw std::invalid_argument("spin must be a positive half-integer");
  const int dim = j.twice() + 1;
  const double jv = j.value();
  const double casimir = jv * (jv + 1.0);
  Matrix jz = Matrix::Zero(dim, dim);
  Matrix jp = Matrix::Zero(dim, dim);
  // Row/column k holds m = j - k.
  for (int k = 0; k < dim; ++k) {
    const double m = jv - k;
    jz(k, k) = m;
    if (k > 0) jp(k - 1, k) = std::sqrt(casimir - m * (m + 1.0));
  }
  Matrix jm = jp.adjoint();
  return {Operator(std::move(jz)), Operator(std::move(jp)), Operator(std::move(jm))};
}

Operator embed(const Operator& op, Factor which, const ProductSpace& space) {
  const int n1 = space.n1();
  const int n2 = space.n2();
  const Matrix& m = op.matrix();
  Matrix out = Matrix::Zero(space.dim(), space.dim());
  if (which == Factor::First) {
    if (op.dim() != n1) throw std::invalid_argument("embed: operator does not match factor 1");
    for (int i = 0; i < n1; ++i)
      for (int ip = 0; ip < n1; ++ip) {
        if (m(i, ip) == Complex(0.0)) continue;
        for (int nu = 0; nu < n2; ++nu) out(space.index(i, nu), space.index(ip, nu)) = m(i, ip);
      }
  } else {
    if (op.dim() != n2) throw std::invalid_argument("embed: operator does not match factor 2");
    for (int i = 0; i < n1; ++i) out.block(i * n2, i * n2, n2, n2) = m;
  }
  return Operator(std::move(out), space);
}

JCParams JCParams::with_spin(HalfInteger spin, double omega, double epsilon, Complex g,
                             Complex gprime, int nboson) {
  JCParams p;
  p.spin = spin;
  p.hbar = 1.0 / spin.value();
  p.omega = omega;
  p.epsilon = epsilon;
  p.g = g;
  p.gprime = gprime;
  p.nboson = nboson;
  return p;
}

void JCParams::validate() const {
  if (spin.twice() < 1) throw std::invalid_argument("spin J must be a positive half-integer");
  if (nboson < 2) throw std::invalid_argument("boson truncation must be >= 2");
  if (std::abs(hbar * spin.value() - 1.0) > 1e-14) {
    throw std::invalid_argument("hbar must equal 1/J");
  }
  if (!std::isfinite(omega) || !std::isfinite(epsilon) || !std::isfinite(g.real()) ||
      !std::isfinite(g.imag()) || !std::isfinite(gprime.real()) || !std::isfinite(gprime.imag())) {
    throw std::invalid_argument("model parameters must be finite");
  }
}

JCModel build_jc(const JCParams& params) {
  params.validate();
  const ProductSpace space = params.space();
  const int n1 = space.n1();
  const int n2 = space.n2();
  const double hbar = params.hbar;
  const double j = params.spin.value();
  const double casimir = j * (j + 1.0);
  const double coupling = hbar / std::sqrt(static_cast<double>(params.spin.twice()));

  // Assembled entrywise; each term moves (i, nu) by at most one step.
  Matrix h = Matrix::Zero(space.dim(), space.dim());
  for (int i = 0; i < n1; ++i) {
    const double m = j - i;
    for (int nu = 0; nu < n2; ++nu) {
      const int k = space.index(i, nu);
      h(k, k) = hbar * (params.omega * nu + params.epsilon * m);
      if (nu == 0) continue;
      const double boson = std::sqrt(static_cast<double>(nu));
      if (i > 0) {  // G a J+ : (i, nu) -> (i - 1, nu - 1)
        const Complex x = coupling * params.g * boson * std::sqrt(casimir - m * (m + 1.0));
        const int kk = space.index(i - 1, nu - 1);
        h(kk, k) += x;
        h(k, kk) += std::conj(x);
      }
      if (i + 1 < n1) {  // G' a J- : (i, nu) -> (i + 1, nu - 1)
        const Complex x = coupling * params.gprime * boson * std::sqrt(casimir - m * (m - 1.0));
        const int kk = space.index(i + 1, nu - 1);
        h(kk, k) += x;
        h(k, kk) += std::conj(x);
      }
    }
  }

  const auto spin = spin_ops(params.spin);
  return {Operator(std::move(h), space), hbar * embed(spin.jz, Factor::First, space)};
}

}  // namespace jcecho
