// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "jcecho/runner.h"
#include "support/oracles.h"

using namespace jcecho;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%-4s %s  %s\n", id.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

// Values of y where lo <= t <= hi.
std::vector<double> window(const std::vector<double>& t, const std::vector<double>& y, double lo, double hi) {
  std::vector<double> out;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= lo - 1e-12 && t[k] <= hi + 1e-12) out.push_back(y[k]);
  return out;
}

ExperimentSpec spec_for(Regime regime, Mode mode, double delta, double t_max) {
  ExperimentSpec s = ExperimentSpec::preset(regime);
  s.mode = mode;
  s.delta = delta;
  s.t_max = t_max;
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sigma(t) psi0 by the midpoint rule with propagators from a Pade matrix exponential.
Vector riemann_sigma_action(const JCModel& model, const Vector& psi, double t, double hbar, double dtau) {
  const int steps = static_cast<int>(std::lround(t / dtau));
  const Matrix& h = model.hamiltonian.matrix();
  const Matrix& v = model.perturbation.matrix();
  const Matrix fwd = (Complex(0.0, -dtau / hbar) * h).exp();
  const Matrix half = (Complex(0.0, -0.5 * dtau / hbar) * h).exp();
  std::vector<Vector> w;
  w.reserve(steps);
  Vector phi = half * psi;
  for (int k = 0; k < steps; ++k) {
    w.push_back(v * phi);
    phi = fwd * phi;
  }
  const Matrix bwd = fwd.adjoint();
  Vector acc = w.back();
  for (int k = steps - 2; k >= 0; --k) acc = bwd * acc + w[k];
  return dtau * (half.adjoint() * acc);
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  ModelCache cache;

  // Correlation runs, both presets, default window [10, 50].
  const ExperimentSpec cha_corr = spec_for(Regime::Chaotic, Mode::Correlations, 0.1, 50.0);
  const ExperimentSpec reg_corr = spec_for(Regime::Regular, Mode::Correlations, 0.1, 50.0);
  const CorrelationRun cha = run_correlations(cha_corr, cache);
  const CorrelationRun reg = run_correlations(reg_corr, cache);

  // A1
  {
    const double sigma = cha.fit.sigma;
    report("A1", within(sigma, 0.10, 0.25), fmt("chaotic sigma = %.4f (target 0.10 +-25%%, N_b = %d)", sigma,
                                                cha_corr.params.nboson));
  }

  // A2
  {
    const double cbar = reg.fit.cbar;
    report("A2", within(cbar, 0.046, 0.25), fmt("regular cbar = %.4f (target 0.046 +-25%%)", cbar));
  }

  // A3
  {
    double lo_c = 1e9, hi_c = -1e9, lo_r = 1e9, hi_r = -1e9;
    for (std::size_t k = 0; k < cha.series.times.size(); ++k) {
      const double t = cha.series.times[k];
      if (t < 10.0 || t > 50.0) continue;
      const double rc = cha.series.d[k] / cha.series.c[k];
      const double rr = (reg.series.c[k] - reg.series.d[k]) / reg.series.c[k];
      lo_c = std::min(lo_c, rc), hi_c = std::max(hi_c, rc);
      lo_r = std::min(lo_r, rr), hi_r = std::max(hi_r, rr);
    }
    const double j = reg_corr.params.spin.value();
    const bool ok = lo_c >= 0.12 && hi_c <= 0.40 && lo_r >= 1.0 / (2.0 * j) && hi_r <= 2.0 / j;
    report("A3", ok,
           fmt("chaotic D/C in [%.3f, %.3f] (need [0.12, 0.40]); regular (C-D)/C in [%.3f, %.3f] (need [%.3f, %.3f])",
               lo_c, hi_c, lo_r, hi_r, 1.0 / (2.0 * j), 2.0 / j));
  }

  // Echo runs at delta = 0.1.
  const ExperimentSpec cha_echo_spec = spec_for(Regime::Chaotic, Mode::Echo, 0.1, 100.0);
  const RunResult cha_echo = run_echo(cha_echo_spec, cache);
  const ExperimentSpec reg_echo_spec = spec_for(Regime::Regular, Mode::Echo, 0.1, 100.0);
  const RunResult reg_echo = run_echo(reg_echo_spec, cache);
  const double hbar = cha_echo_spec.params.hbar;

  // A4
  {
    const auto t = cha_echo.table.column("t");
    const auto f2 = cha_echo.table.column("F2");
    std::vector<double> y(f2.size());
    for (std::size_t k = 0; k < f2.size(); ++k) y[k] = -std::log(f2[k]);
    const auto tw = window(t, t, 2.0, 25.0);
    const auto yw = window(t, y, 2.0, 25.0);
    const double slope = fit_proportional(tw, yw);
    const LineFit ols = fit_line(tw, yw);
    const double predicted = 2.0 * cha.fit.sigma * 0.01 / (hbar * hbar);
    report("A4", within(slope, predicted, 0.20),
           fmt("-ln F2 = t / tau_em over [2,25]: slope %.4f vs 2 sigma delta^2 / hbar^2 = %.4f (%+.1f%%); "
               "OLS with intercept: slope %.4f, intercept %.3f",
               slope, predicted, 100.0 * (slope / predicted - 1.0), ols.slope, ols.intercept));
  }

  // A5
  {
    const double tau_ne = hbar / (std::sqrt(reg.fit.cbar) * 0.1);
    const auto t = reg_echo.table.column("t");
    const auto f2 = reg_echo.table.column("F2");
    std::vector<double> t2(t.size()), y(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) t2[k] = t[k] * t[k], y[k] = -std::log(f2[k]);
    const auto xw = window(t, t2, 0.0, tau_ne);
    const auto yw = window(t, y, 0.0, tau_ne);
    const double slope = fit_proportional(xw, yw);
    const double predicted = 1.0 / (tau_ne * tau_ne);
    report("A5", within(slope, predicted, 0.20),
           fmt("-ln F2 = (t / tau_ne)^2 over [0, tau_ne = %.2f]: slope %.5f vs cbar delta^2 / hbar^2 = %.5f (%+.1f%%)",
               tau_ne, slope, predicted, 100.0 * (slope / predicted - 1.0)));
  }

  // Small-delta chaotic and regular echoes for A6 and A8.
  const RunResult cha_5 = run_echo(spec_for(Regime::Chaotic, Mode::Echo, 0.005, 20.0), cache);
  const RunResult reg_5 = run_echo(spec_for(Regime::Regular, Mode::Echo, 0.005, 20.0), cache);
  const RunResult cha_25 = run_echo(spec_for(Regime::Chaotic, Mode::Echo, 0.0025, 10.0), cache);

  // A6
  {
    const auto t = cha_5.table.column("t");
    const auto fc = cha_5.table.column("FP");
    const auto fr = reg_5.table.column("FP");
    std::vector<double> diff(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) diff[k] = fr[k] - fc[k];
    int inside = 0, outside = 0;
    double at = std::nan(""), early_max = 0.0;
    std::string others;
    for (std::size_t k = 1; k < t.size(); ++k) {
      if ((diff[k - 1] < 0.0) == (diff[k] < 0.0)) continue;
      // crossing between t[k-1] and t[k], located by linear interpolation
      const double tc = t[k - 1] + (t[k] - t[k - 1]) * diff[k - 1] / (diff[k - 1] - diff[k]);
      if (tc >= 6.0 && tc <= 18.0) {
        ++inside;
        at = tc;
      } else {
        ++outside;
        others += fmt("%s%.2f", others.empty() ? "" : ", ", tc);
        early_max = std::max({early_max, std::abs(diff[k - 1]), std::abs(diff[k])});
      }
    }
    report("A6", inside == 1,
           fmt("delta = 0.005: %d crossing(s) of F_P^reg - F_P^cha in [6,18] (at t = %.2f); %d outside (t = %s), "
               "largest |difference| next to those %.1e",
               inside, at, outside, others.c_str(), early_max));
  }

  // A7
  {
    const auto t = cha_echo.table.column("t");
    const double m = mean(window(t, cha_echo.table.column("FP"), 80.0, 100.0));
    report("A7", m >= 0.06 && m <= 0.17,
           fmt("delta = 0.1 chaotic: mean F_P over [80,100] = %.4f (need [0.06, 0.17], 1/(2J+1) = %.4f)", m, 1.0 / 9.0));
  }

  // A8
  {
    auto deviation = [](const RunResult& r) {
      const auto t = r.table.column("t");
      const auto fp = r.table.column("FP");
      const auto pred = r.table.column("FP_pred");
      double worst = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k)
        if (t[k] <= 10.0 + 1e-12) worst = std::max(worst, std::abs(fp[k] - pred[k]));
      return worst;
    };
    const double d5 = deviation(cha_5);
    const double d25 = deviation(cha_25);
    report("A8", d25 <= d5 / 8.0,
           fmt("max |F_P - F_P_pred| on [0,10]: %.3e at delta = 0.005, %.3e at 0.0025, ratio %.2f (need >= 8)", d5, d25,
               d5 / d25));
  }

  // A9
  {
    double worst = 0.0, imag = 0.0;
    std::size_t count = 0;
    for (Regime r : {Regime::Chaotic, Regime::Regular}) {
      const WignerRun w = run_wigner(spec_for(r, Mode::Wigner, 0.1, 100.0), cache);
      for (const auto& s : w.snapshots) {
        worst = std::max(worst, std::abs(s.quadrature_purity - s.purity));
        imag = std::max(imag, s.field.max_imag);
        ++count;
      }
    }
    report("A9", count == 10 && worst < 1e-8,
           fmt("%zu snapshots: max |quadrature - purity| = %.1e (need < 1e-8), max |Im W| = %.1e", count, worst, imag));
  }

  // A10
  {
    std::mt19937_64 rng(20240613);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto random_a = [&](int d) {
      RealMatrix x(d, d), b(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = u(rng), b(i, j) = 0.8 * u(rng);
      const RealMatrix re = 0.5 * (x + x.transpose());
      const RealMatrix im = b * b.transpose() + 0.3 * RealMatrix::Identity(d, d);
      Matrix a(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = Complex(re(i, j), im(i, j));
      return a;
    };
    double oracle_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix a = random_a(2);
      oracle_err = std::max(oracle_err, std::abs(wavepacket_purity(CovarianceMatrix(1, 1, a)) -
                                                 oracle::gaussian_purity(a, 1, 1, 300, 9.0)));
    }
    double unit_err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      Matrix a = random_a(4);
      a.topRightCorner(2, 2).setZero();
      a.bottomLeftCorner(2, 2).setZero();
      unit_err = std::max(unit_err, std::abs(wavepacket_purity(CovarianceMatrix(2, 2, a)) - 1.0));
    }
    // Step halving on F_P(A0 + t delta B) - (1 - (t delta / K)^2) with pure cross-block drift.
    double ratio_lo = 1e9, ratio_hi = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      Matrix a0 = random_a(2);
      a0(0, 1) = a0(1, 0) = 0.0;
      Matrix b = Matrix::Zero(2, 2);
      b(0, 1) = b(1, 0) = Complex(u(rng), u(rng));
      if (trial == 0) a0 = Complex(0.0, 1.0) * Matrix::Identity(2, 2), b << 0.0, 1.0, 1.0, 0.0;
      const double delta = 0.01;
      const CovarianceMatrix cov(1, 1, a0);
      const QuadraticDecay q = quadratic_decay_constant(cov, b, delta);
      auto rem = [&](double t) {
        const double x = t * delta / q.k;
        return wavepacket_purity(CovarianceMatrix(1, 1, a0 + (t * delta) * b)) - (1.0 - x * x);
      };
      const double r = rem(4.0) / rem(2.0);
      ratio_lo = std::min(ratio_lo, r), ratio_hi = std::max(ratio_hi, r);
    }
    const bool ok = oracle_err < 1e-8 && unit_err < 1e-12 && ratio_lo > 14.0 && ratio_hi < 18.0;
    report("A10", ok,
           fmt("100 random d1=d2=1 vs oracle: max err %.1e (need < 1e-8); A12=0: |F_P-1| %.1e (need < 1e-12); "
               "remainder ratio on halving t in [%.2f, %.2f] (quartic: 16)",
               oracle_err, unit_err, ratio_lo, ratio_hi));
  }

  // A11
  {
    // eigensolver residual, per invariant block of the chaotic Hamiltonian
    const auto model = cache.model(cha_echo_spec.params);
    const auto spectrum = cache.spectrum(cha_echo_spec.params, 0.0);
    const Matrix& h = model->hamiltonian.matrix();
    double residual = 0.0;
    for (const auto& block : spectrum->blocks()) {
      const Matrix hb = h(block.indices, block.indices);
      const Matrix w = block.vectors.to_complex();
      residual = std::max(residual, max_abs(hb * w - w * block.energies.cast<Complex>().asDiagonal()));
    }

    // echo norm
    double norm_err = 0.0;
    {
      const ProductInitialState init = initial_state(cha_echo_spec);
      const EchoPropagator echo(spectrum, cache.spectrum(cha_echo_spec.params, 0.1), init.joint, hbar);
      for (double t : {0.0, 5.0, 25.0, 50.0, 100.0})
        norm_err = std::max(norm_err, std::abs(echo.at(t).amplitudes().norm() - 1.0));
    }

    // Sigma(t) psi0 against the Riemann sum
    double sigma_err = 0.0;
    {
      ExperimentSpec small = spec_for(Regime::Chaotic, Mode::Correlations, 0.1, 5.0);
      small.params.nboson = 24;
      const JCModel m = build_jc(small.params);
      const ProductInitialState init = initial_state(small);
      const SigmaAction sigma(std::make_shared<const SpectralDecomposition>(diagonalize(m.hamiltonian)),
                              m.perturbation, init.joint, small.params.hbar);
      const Vector ref = riemann_sigma_action(m, init.joint.amplitudes(), 5.0, small.params.hbar, 1e-3);
      sigma_err = (sigma.apply(5.0) - ref).norm() / ref.norm();
    }

    // [H, n + Jz] for G' = 0 away from the top boson level
    double conserved = 0.0;
    {
      const JCParams p = ExperimentSpec::preset(Regime::Regular).params;
      const ProductSpace space = p.space();
      const BosonOperators bo = boson_ops(p.nboson);
      const Operator n = embed(bo.adag * bo.a, Factor::Second, space) + embed(spin_ops(p.spin).jz, Factor::First, space);
      const Matrix c = commutator(build_jc(p).hamiltonian, n).matrix();
      std::vector<Index> keep;
      for (int i = 0; i < space.n1(); ++i)
        for (int nu = 0; nu + 1 < space.n2(); ++nu) keep.push_back(space.index(i, nu));
      conserved = Matrix(c(keep, keep)).norm();
    }

    // Schmidt symmetry of the echo state
    double schmidt = 0.0;
    {
      const ProductInitialState init = initial_state(cha_echo_spec);
      const EchoPropagator echo(spectrum, cache.spectrum(cha_echo_spec.params, 0.1), init.joint, hbar);
      for (double t : {5.0, 50.0}) {
        const QuantumState psi = echo.at(t);
        schmidt = std::max(schmidt, std::abs(purity(partial_trace(psi, init.space, Factor::First)) -
                                             purity(partial_trace(psi, init.space, Factor::Second))));
      }
    }

    // CG orthogonality for j1 = j2 = 4
    double cg = 0.0;
    {
      const auto H = [](int m) { return HalfInteger::from_twice(2 * m); };
      for (int big_j = 0; big_j <= 8; ++big_j)
        for (int big_jp = 0; big_jp <= 8; ++big_jp)
          for (int m = -std::min(big_j, big_jp); m <= std::min(big_j, big_jp); ++m) {
            double s = 0.0;
            for (int m1 = -4; m1 <= 4; ++m1)
              if (std::abs(m - m1) <= 4)
                s += clebsch_gordan(H(4), H(m1), H(4), H(m - m1), H(big_j), H(m)) *
                     clebsch_gordan(H(4), H(m1), H(4), H(m - m1), H(big_jp), H(m));
            cg = std::max(cg, std::abs(s - (big_j == big_jp ? 1.0 : 0.0)));
          }
    }

    const bool ok = residual < 1e-10 && norm_err < 1e-12 && sigma_err < 1e-4 && conserved < 1e-12 &&
                    schmidt < 1e-12 && cg < 1e-12;
    report("A11", ok,
           fmt("eig residual %.1e (<1e-10); echo norm %.1e (<1e-12); Sigma vs Riemann %.1e (<1e-4); "
               "||[H, n+Jz]|| %.1e (<1e-12); Schmidt %.1e (<1e-12); CG %.1e (<1e-12)",
               residual, norm_err, sigma_err, conserved, schmidt, cg));
  }

  // hbar scaling of C - D in the regular regime
  {
    std::vector<double> ratio;
    std::string detail;
    for (int j : {4, 8, 16}) {
      ExperimentSpec s = spec_for(Regime::Regular, Mode::Correlations, 0.1, 50.0);
      s.params = JCParams::with_spin(HalfInteger::from_twice(2 * j), 0.3, 0.3, 1.0, 0.0, 16 * j);
      s.alpha = 1.15 * std::sqrt(j / 4.0);
      const CorrelationRun r = run_correlations(s, cache);
      std::vector<double> q;
      for (std::size_t k = 0; k < r.series.times.size(); ++k)
        if (r.series.times[k] >= 10.0) q.push_back((r.series.c[k] - r.series.d[k]) / r.series.c[k]);
      ratio.push_back(mean(q));
      detail += fmt("J=%d: %.4f  ", j, ratio.back());
    }
    const bool ok = within(ratio[1] * 2.0, ratio[0], 0.4) && within(ratio[2] * 4.0, ratio[0], 0.4);
    report("hbar", ok,
           fmt("mean (C-D)/C over [10,50]: %s(J (C-D)/C relative to J=4: %.2f, %.2f; need within 40%%)",
               detail.c_str(), ratio[1] * 2.0 / ratio[0], ratio[2] * 4.0 / ratio[0]));
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s: %d failing check(s), %.0f s\n", failures ? "FAILED" : "ALL PASSED", failures, seconds);
  return failures == 0 ? 0 : 1;
}
