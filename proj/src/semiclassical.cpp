#include "jcecho/semiclassical.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace jcecho {

namespace {

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw std::runtime_error("matrix file line " + std::to_string(line) + ": " + what);
}

bool next_content_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

Complex parse_pair(const std::string& token, int line_no) {
  const auto comma = token.find(',');
  if (comma == std::string::npos) parse_error(line_no, "expected re,im but got '" + token + "'");
  try {
    std::size_t used_re = 0;
    std::size_t used_im = 0;
    const std::string re = token.substr(0, comma);
    const std::string im = token.substr(comma + 1);
    const double r = std::stod(re, &used_re);
    const double i = std::stod(im, &used_im);
    if (used_re != re.size() || used_im != im.size()) throw std::invalid_argument(token);
    return {r, i};
  } catch (const std::logic_error&) {
    parse_error(line_no, "malformed number pair '" + token + "'");
  }
}

}  // namespace

BlockMatrix read_block_matrix(std::istream& in) {
  std::string line;
  int line_no = 0;
  if (!next_content_line(in, line, line_no)) parse_error(line_no, "missing 'd1 d2' header");
  BlockMatrix m;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> m.d1 >> m.d2) || (header >> extra)) parse_error(line_no, "header must be 'd1 d2'");
    if (m.d1 < 1 || m.d2 < 1) parse_error(line_no, "block dimensions must be positive");
  }
  const int d = m.d1 + m.d2;
  m.entries.resize(d, d);
  for (int row = 0; row < d; ++row) {
    if (!next_content_line(in, line, line_no)) parse_error(line_no, "expected " + std::to_string(d) + " matrix rows");
    std::istringstream fields(line);
    std::string token;
    int col = 0;
    while (fields >> token) {
      if (col >= d) parse_error(line_no, "too many entries in row");
      m.entries(row, col++) = parse_pair(token, line_no);
    }
    if (col != d) parse_error(line_no, "expected " + std::to_string(d) + " entries in row");
  }
  if (next_content_line(in, line, line_no)) parse_error(line_no, "unexpected trailing content");
  return m;
}

BlockMatrix read_block_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file " + path);
  return read_block_matrix(in);
}

void write_block_matrix(std::ostream& out, const BlockMatrix& m) {
  out << m.d1 << ' ' << m.d2 << '\n' << std::setprecision(17);
  for (Index r = 0; r < m.entries.rows(); ++r) {
    for (Index c = 0; c < m.entries.cols(); ++c) {
      if (c > 0) out << ' ';
      out << m.entries(r, c).real() << ',' << m.entries(r, c).imag();
    }
    out << '\n';
  }
}

CovarianceMatrix::CovarianceMatrix(int d1, int d2, Matrix a) : d1_(d1), d2_(d2), a_(std::move(a)) {
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("covariance blocks need positive dimensions");
  if (a_.rows() != d1 + d2 || a_.cols() != d1 + d2) {
    throw std::invalid_argument("covariance matrix size does not match d1 + d2");
  }
  const double scale = std::max(1.0, max_abs(a_));
  if (max_abs(a_ - a_.transpose()) > 1e-12 * scale) {
    throw std::invalid_argument("covariance matrix must be symmetric");
  }
  const RealMatrix im = 0.5 * (a_.imag() + a_.imag().transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(im, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("Im A must be positive definite");
  }
}

Matrix purity_form(const CovarianceMatrix& cov) {
  // Variables ordered (x1, y2, y1, x2) of the overlap
  // int psi(x1,x2) psi*(y1,x2) psi*(x1,y2) psi(y1,y2).
  const int d1 = cov.d1();
  const int d2 = cov.d2();
  const Matrix im11 = cov.a11().imag().cast<Complex>();
  const Matrix im22 = cov.a22().imag().cast<Complex>();
  const Matrix a12 = 0.5 * kI * cov.a12();
  const Matrix a21 = 0.5 * kI * cov.a21();
  const Matrix a12c = 0.5 * kI * cov.a12().conjugate();
  const Matrix a21c = 0.5 * kI * cov.a21().conjugate();

  const int n = 2 * (d1 + d2);
  Matrix m = Matrix::Zero(n, n);
  const int r1 = 0;
  const int r2 = d1;
  const int r3 = d1 + d2;
  const int r4 = 2 * d1 + d2;
  m.block(r1, r1, d1, d1) = im11;
  m.block(r1, r2, d1, d2) = a12c;
  m.block(r1, r4, d1, d2) = -a12;
  m.block(r2, r1, d2, d1) = a21c;
  m.block(r2, r2, d2, d2) = im22;
  m.block(r2, r3, d2, d1) = -a21;
  m.block(r3, r2, d1, d2) = -a12;
  m.block(r3, r3, d1, d1) = im11;
  m.block(r3, r4, d1, d2) = a12c;
  m.block(r4, r1, d2, d1) = -a21;
  m.block(r4, r3, d2, d1) = a21c;
  m.block(r4, r4, d2, d2) = im22;
  return m;
}

double wavepacket_purity(const CovarianceMatrix& cov) {
  const double det_im = cov.matrix().imag().determinant();
  const double det_m = std::abs(purity_form(cov).partialPivLu().determinant());
  if (!(det_m > 0.0)) throw std::domain_error("degenerate purity form: det M = 0");
  return det_im / std::sqrt(det_m);
}

QuadraticDecay quadratic_decay_constant(const CovarianceMatrix& a0, const Matrix& drift, double delta) {
  const int d = a0.d1() + a0.d2();
  if (drift.rows() != d || drift.cols() != d) throw std::invalid_argument("drift matrix size mismatch");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double scale = std::max(1.0, max_abs(a0.matrix()));
  if (max_abs(a0.a12()) > 1e-14 * scale || max_abs(a0.a21()) > 1e-14 * scale) {
    throw std::invalid_argument("A0 must be block diagonal");
  }
  const double drift_scale = max_abs(drift);
  QuadraticDecay out;
  if (drift_scale == 0.0) {
    out.k = std::numeric_limits<double>::infinity();
    return out;
  }
  const double h = 1e-3 / (delta * drift_scale);
  out.step = h;
  auto purity_at = [&](double t) {
    return wavepacket_purity(CovarianceMatrix(a0.d1(), a0.d2(), a0.matrix() + (t * delta) * drift));
  };
  const double f0 = purity_at(0.0);
  auto second = [&](double s) { return (purity_at(s) - 2.0 * f0 + purity_at(-s)) / (s * s); };
  auto first = [&](double s) { return (purity_at(s) - purity_at(-s)) / (2.0 * s); };
  out.curvature = (4.0 * second(0.5 * h) - second(h)) / 3.0;
  out.slope = (4.0 * first(0.5 * h) - first(h)) / 3.0;
  // Difference quotients of values rounded at ~1e-16 carry noise ~1e-16/h and ~1e-16/h^2.
  const double first_noise = 1e-12 / h;
  const double noise = 1e-12 / (h * h);
  // Leading order must be quadratic: F_P has its maximum 1 at A12 = 0.
  if (std::abs(out.slope) > first_noise + 1e-6 * std::abs(out.curvature) * h) {
    throw std::logic_error("purity decay has a linear term; A0 is not a purity maximum");
  }
  if (out.curvature >= -noise) {
    out.k = std::numeric_limits<double>::infinity();
  } else {
    out.k = delta * std::sqrt(-2.0 / out.curvature);
  }
  return out;
}

}  // namespace jcecho
